"""Large-distance form of the in-band resolvent kernel.

The shell integral defining P(e)_{0,x} has an oscillatory phase
``-K(e,theta) cos(phi - theta)`` along the observation direction phi.  Its
stationary angle determines a radial wave with slowly direction-dependent
wavenumber (the phase speed) and a square-lattice-symmetric amplitude; the
kernel then falls off like |x|^{-1/2} along every ray.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import optimize

from . import lattice
from .errors import DomainError


def _check_domain(e, phi):
    if not 0.0 < e < lattice.BAND_CENTER:
        raise DomainError(f"asymptotics require e in (0, 2), got {e}")
    if not -1e-12 <= phi <= math.pi / 2 + 1e-12:
        raise DomainError(f"direction angle {phi} outside [0, pi/2]")


def _phase_derivative(theta, e, phi):
    """d/dtheta of -K(e,theta) cos(phi - theta)."""
    K = lattice.shell_radius(e, theta)
    c, s = math.cos(theta), math.sin(theta)
    # implicit dK/dtheta from dispersion(K cos, K sin) = e
    d_theta = K * (math.cos(theta) * math.sin(K * s) - math.sin(theta) * math.sin(K * c))
    dK = -d_theta / lattice.radial_slope(K, theta)
    return -dK * math.cos(phi - theta) - K * math.sin(phi - theta)


def stationary_angle(e, phi):
    """Angle where the shell phase along direction phi is stationary.

    The root lies in [0, pi/2]: the derivative is <= 0 at 0 and >= 0 at
    pi/2 by the square symmetry of the shell, and the root is unique.
    """
    _check_domain(e, phi)
    phi = min(max(phi, 0.0), math.pi / 2)
    lo, hi = 0.0, math.pi / 2
    f_lo = _phase_derivative(lo, e, phi)
    f_hi = _phase_derivative(hi, e, phi)
    # endpoints are exact roots for axis/diagonal directions up to roundoff
    if f_lo >= 0.0 or abs(f_lo) < 1e-14:
        return lo
    if f_hi <= 0.0 or abs(f_hi) < 1e-14:
        return hi
    return optimize.brentq(
        _phase_derivative, lo, hi, args=(e, phi), xtol=1e-13, rtol=1e-15
    )


def asymptotic_amplitude(e, phi):
    """Direction-dependent amplitude entering the |x|^{-1/2} decay law."""
    theta_s = stationary_angle(e, phi)
    Ks = lattice.shell_radius(e, theta_s)
    a, b = Ks * math.cos(theta_s), Ks * math.sin(theta_s)
    return (math.cos(a) * math.sin(b) * math.sin(phi)
            + math.cos(b) * math.sin(a) * math.cos(phi))


def phase_speed(e, phi):
    """Radial wavenumber K_s cos(phi - theta_s) of the far-field wave."""
    theta_s = stationary_angle(e, phi)
    Ks = lattice.shell_radius(e, theta_s)
    return Ks * math.cos(phi - theta_s)


def direction_angle(x):
    """Polar angle of a displacement folded into the first octant's [0, pi/2]."""
    m, n = abs(x[0]), abs(x[1])
    if m == 0 and n == 0:
        raise DomainError("direction undefined for the zero displacement")
    return math.atan2(n, m)


def green_asymptotic(e, x):
    """Leading large-|x| approximation of g_+(e; x)."""
    phi = direction_angle(x)
    _check_domain(e, phi)
    r = math.hypot(x[0], x[1])
    psi = asymptotic_amplitude(e, phi)
    c = phase_speed(e, phi)
    return (np.exp(1j * (r * c + math.pi / 4))
            / math.sqrt(r * 2.0 * math.pi * psi))
