"""Adaptive quadrature helpers used by every energy integral in the package.

Thin wrappers around `scipy.integrate.quad` that add the pieces the rest of
the code needs everywhere: interior singularity hints (the van Hove point,
chemical potentials), complex integrands, a principal-value rule based on
singularity subtraction, and a hard failure mode carrying the best estimate.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, DomainError

DEFAULT_TOL = 1e-7
_QUAD_LIMIT = 300


def _quad_real(f, a, b, points, tol):
    result = integrate.quad(
        f, a, b,
        points=points if points else None,
        limit=_QUAD_LIMIT,
        epsabs=tol, epsrel=tol,
        full_output=True,
    )
    value, abserr = result[0], result[1]
    if len(result) > 3:  # warning message present
        raise ConvergenceError(
            f"quadrature on [{a}, {b}] did not converge: {result[3]}",
            best_estimate=value, error_estimate=abserr,
        )
    return value, abserr


def integrate_adaptive(f, a, b, singular_points=(), tol=DEFAULT_TOL):
    """Integrate f over [a, b], splitting at hinted interior singularities.

    Returns ``(value, error_estimate)``.  The integrand may be real- or
    complex-valued (probed once at the midpoint).  Raises `ConvergenceError`
    (carrying the best estimate) if the requested tolerance is unreachable.
    """
    if not b > a:
        raise DomainError(f"empty or reversed interval [{a}, {b}]")
    points = sorted(p for p in singular_points if a < p < b)
    probe = f(a + 0.6180339887498949 * (b - a))  # irrational: avoids hints
    if np.iscomplexobj(probe) or isinstance(probe, complex):
        re, re_err = _quad_real(lambda t: f(t).real, a, b, points, tol)
        im, im_err = _quad_real(lambda t: f(t).imag, a, b, points, tol)
        return complex(re, im), math.hypot(re_err, im_err)
    return _quad_real(f, a, b, points, tol)


def principal_value(f, pole, a, b, singular_points=(), tol=DEFAULT_TOL):
    """Cauchy principal value of ``f(t) / (t - pole)`` over [a, b].

    Subtracts the singularity:

        PV int f/(t-c) = int (f(t) - f(c))/(t - c) dt + f(c) log((b-c)/(c-a))

    so the remaining integrand is bounded near the pole.  The pole must lie
    strictly inside the interval; `singular_points` are extra split hints
    for integrable singularities of f itself.
    """
    if not a < pole < b:
        raise DomainError(f"pole {pole} must lie strictly inside ({a}, {b})")
    fc = f(pole)

    def regular(t):
        if t == pole:
            return 0.0 * fc
        return (f(t) - fc) / (t - pole)

    hints = tuple(singular_points) + (pole,)
    value, _ = integrate_adaptive(regular, a, b, hints, tol)
    return value + fc * math.log((b - pole) / (pole - a))


def gauss_panels(breakpoints, nodes_per_panel):
    """Composite Gauss-Legendre nodes/weights over consecutive panels."""
    base_x, base_w = np.polynomial.legendre.leggauss(nodes_per_panel)
    xs, ws = [], []
    for lo, hi in zip(breakpoints[:-1], breakpoints[1:]):
        half = 0.5 * (hi - lo)
        xs.append(0.5 * (hi + lo) + half * base_x)
        ws.append(half * base_w)
    return np.concatenate(xs), np.concatenate(ws)


def graded_breakpoints(a, b, refine_at, base_width=0.5, levels=34):
    """Panel breakpoints on [a, b], geometrically refined toward `refine_at`.

    Each point of `refine_at` (interval endpoints allowed) receives panels
    shrinking by factors of two down to ``base_width * 2**-levels``,
    resolving integrable log/endpoint singularities to near machine level.
    """
    pts = {a, b}
    for c in refine_at:
        for j in range(levels + 1):
            d = base_width * 0.5 ** j
            for p in (c - d, c + d):
                if a < p < b:
                    pts.add(p)
    # coarse fill so no panel is wider than base_width
    n = int(math.ceil((b - a) / base_width))
    for i in range(1, n):
        pts.add(a + (b - a) * i / n)
    return np.array(sorted(pts))
