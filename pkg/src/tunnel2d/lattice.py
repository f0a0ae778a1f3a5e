"""Band structure and energy-shell geometry of the 2-D square lattice.

The kinetic energy of a single band electron is ``2 - cos(k1) - cos(k2)``
(half the lattice Laplacian), so the band is the interval [0, 4] with a
log-singular density of states at the band center e = 2.  For e < 2 the
constant-energy contour is a single closed curve inside the diamond
|k1| + |k2| < pi, parametrized by the polar angle of k; everything above
the band center is reached through the particle-hole symmetry
``e -> 4 - e``, ``k -> k + (pi, pi)``.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

BAND_MIN = 0.0
BAND_MAX = 4.0
BAND_CENTER = 2.0

#: interior points where energy integrands are singular or kinked
BAND_SINGULAR_POINTS = (BAND_CENTER,)

_BISECT_STEPS = 60  # 2^-60 of the initial bracket, well below 1e-12 absolute


def dispersion(k1, k2):
    """Band energy at momentum (k1, k2); accepts arrays."""
    return 2.0 - np.cos(k1) - np.cos(k2)


def diamond_radius(theta):
    """Distance from the origin to the contour ``omega = 2`` along ``theta``.

    The e = 2 contour is the diamond |k1| + |k2| = pi, which brackets every
    shell with e < 2.
    """
    return np.pi / (np.abs(np.cos(theta)) + np.abs(np.sin(theta)))


def radial_slope(K, theta):
    """d(omega)/dK along the ray with polar angle theta."""
    c, s = np.cos(theta), np.sin(theta)
    return c * np.sin(K * c) + s * np.sin(K * s)


def shell_radius(e, theta):
    """Radius K(e, theta) of the energy shell, for e in (0, 2).

    Solves ``dispersion(K cos(theta), K sin(theta)) = e`` by bisection on
    [0, diamond_radius(theta)]; the root is unique because the energy grows
    monotonically from 0 to 2 along every ray inside the diamond.
    """
    if not 0.0 < e < BAND_CENTER:
        raise DomainError(
            f"shell radius defined for energies in (0, 2), got {e}; "
            "map e > 2 through the 4 - e band symmetry"
        )
    # scalar fast path: plain-float bisection avoids numpy array overhead
    c, s = math.cos(theta), math.sin(theta)
    lo, hi = 0.0, math.pi / (abs(c) + abs(s))
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if 2.0 - math.cos(mid * c) - math.cos(mid * s) < e:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def shell_radius_grid(e, thetas):
    """Vectorized `shell_radius` over an array of angles."""
    thetas = np.asarray(thetas, dtype=float)
    lo = np.zeros_like(thetas)
    hi = diamond_radius(thetas)
    c, s = np.cos(thetas), np.sin(thetas)
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        below = (2.0 - np.cos(mid * c) - np.cos(mid * s)) < e
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def shell_jacobian(e, theta):
    """Jacobian K * dK/de of the (k1, k2) -> (e, theta) change of variables.

    Uses dK/de = 1 / radial_slope(K, theta) instead of differencing K in e.
    """
    K = shell_radius(e, theta)
    return K / radial_slope(K, theta)


def shell_jacobian_grid(e, thetas):
    """Vectorized `shell_jacobian`; returns (K, J) arrays."""
    K = shell_radius_grid(e, thetas)
    return K, K / radial_slope(K, thetas)
