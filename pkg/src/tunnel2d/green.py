"""Green's function of the 2-D lattice Laplacian and the shell density.

Everything downstream (scattering matrices, densities, currents) consumes
three objects computed here:

* ``shell_density(e, x)`` -- the spectral density P(e)_{0,x} obtained by
  integrating plane waves over the constant-energy contour,
* ``green_offband(z, x)`` -- the resolvent kernel for z off the band,
* ``green_boundary(e, side, x)`` -- its boundary values on the band cut,
  computed as a principal-value integral of P plus the half-residue
  ``side * i*pi*P(e)_{0,x}``.

A second, fully independent route to the boundary values (a damped integral
of a Bessel-function product, extrapolated in the damping parameter) lives
in `green_boundary_bessel` and is used for cross-validation only.

For bulk evaluation over many lattice displacements (field maps, bound-state
scans) the module provides `BandGrid` / `DensityTable`: a fixed composite
Gauss-Legendre grid over the band, geometrically refined at the band edges
and at the log-singular band center, with rows of P values per displacement
computed once and shared.  Tables are filled in a single writer phase and
read-only afterwards.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import special

from . import lattice
from .errors import DomainError
from .quadrature import (
    gauss_panels,
    graded_breakpoints,
    integrate_adaptive,
    principal_value,
)

BAND_GAP_DEFAULT = 1e-6  # minimum distance of off-band arguments to [0, 4]

_TWO_PI = 2.0 * math.pi
_MAX_THETA_NODES = 1 << 15


def canonical_displacement(x):
    """Reduce a displacement to its symmetry representative (0 <= m <= n)."""
    m, n = abs(int(x[0])), abs(int(x[1]))
    return (m, n) if m <= n else (n, m)


_VH_SWITCH = 0.05  # distance to the band center below which panels are graded


def _radius_bucket(max_radius):
    return 1 << math.ceil(math.log2(max(max_radius, 1.0) + 1.0))


def _theta_nodes_needed(e, r_bucket):
    """Trapezoid size resolving the e^{i|x|K} oscillation of the shell sum."""
    kmax = math.acos(max(-1.0, 1.0 - min(e, 4.0 - e)))
    need = max(256.0, 1.2 * r_bucket * kmax + 64.0)
    return min(_MAX_THETA_NODES, 1 << math.ceil(math.log2(need)))


def _graded_theta_quadrature(e, r_bucket):
    """Theta nodes and weighted Jacobians with panels graded into the peaks.

    Close to the band center the Jacobian peaks like 1/sqrt(theta^2 + c*d)
    (d the distance to the center) at every multiple of pi/2, which is what
    drives the van Hove logarithm.  Geometric panels down to sqrt(d)/8
    resolve the peak; wide panels are split to keep the phase advance per
    panel within the reach of the 12-point rule.
    """
    delta = lattice.BAND_CENTER - e
    quarter = 0.5 * math.pi
    base = quarter / 4.0
    w_min = max(math.sqrt(max(delta, 0.0)) / 8.0, 1e-10)
    levels = max(1, math.ceil(math.log2(base / w_min)))
    bp = graded_breakpoints(0.0, quarter, refine_at=(0.0, quarter),
                            base_width=base, levels=levels)
    max_w = 10.0 / max(6.3 * r_bucket, 64.0)
    pts = [bp[0]]
    for a, b in zip(bp[:-1], bp[1:]):
        k = max(1, math.ceil((b - a) / max_w))
        pts.extend(a + (b - a) * np.arange(1, k + 1) / k)
    quad_nodes, quad_weights = gauss_panels(np.asarray(pts), 12)
    thetas = np.concatenate([quad_nodes + k * quarter for k in range(4)])
    weights = np.tile(quad_weights, 4)
    K, J = lattice.shell_jacobian_grid(e, thetas)
    return K * np.cos(thetas), K * np.sin(thetas), J * weights


@lru_cache(maxsize=8192)
def _theta_quadrature(e, r_bucket):
    """(k1, k2, weighted J) arrays integrating over the shell at e < 2."""
    if lattice.BAND_CENTER - e <= _VH_SWITCH:
        return _graded_theta_quadrature(e, r_bucket)
    n_theta = _theta_nodes_needed(e, r_bucket)
    thetas = np.arange(n_theta) * (_TWO_PI / n_theta)
    K, J = lattice.shell_jacobian_grid(e, thetas)
    return K * np.cos(thetas), K * np.sin(thetas), J * (_TWO_PI / n_theta)


def _shell_sum(e, disps, r_bucket):
    """(1/(2 pi)^2) integral of J cos(k . x) for an array of displacements."""
    k1, k2, jw = _theta_quadrature(e, r_bucket)
    out = np.empty(len(disps))
    for i, (m, n) in enumerate(disps):
        out[i] = jw @ np.cos(m * k1 + n * k2)
    return out / (_TWO_PI * _TWO_PI)


def shell_density_rows(e, disps):
    """Vectorized P(e)_{0,x} over canonical displacements, e in (0, 4)."""
    signs = None
    if e > lattice.BAND_CENTER:
        e = lattice.BAND_MAX - e
        signs = np.array([(-1.0) ** (m + n) for m, n in disps])
    if not 0.0 < e < lattice.BAND_CENTER:
        raise DomainError(f"shell density undefined at e = {e}")
    max_r = max(math.hypot(m, n) for m, n in disps)
    vals = _shell_sum(e, disps, _radius_bucket(max_r))
    return vals * signs if signs is not None else vals


@lru_cache(maxsize=200_000)
def _shell_density_scalar(e, m, n):
    if not lattice.BAND_MIN < e < lattice.BAND_MAX or e == lattice.BAND_CENTER:
        raise DomainError(
            f"shell density is defined for e in (0, 4) \\ {{2}}, got {e}"
        )
    if e > lattice.BAND_CENTER:
        return (-1.0) ** (m + n) * _shell_density_scalar(4.0 - e, m, n)
    bucket = _radius_bucket(math.hypot(m, n))
    val = _shell_sum(e, [(m, n)], bucket)[0]
    # refine the quadrature until stable; one refinement normally confirms
    while bucket < _MAX_THETA_NODES:
        bucket *= 4
        refined = _shell_sum(e, [(m, n)], bucket)[0]
        if abs(refined - val) <= 1e-12 + 1e-10 * abs(refined):
            return refined
        val = refined
    return val


def shell_density(e, x):
    """Spectral density P(e)_{0,x} of the lattice Laplacian, e in (0, 4)."""
    m, n = canonical_displacement(x)
    return _shell_density_scalar(float(e), m, n)


def _band_distance(z):
    z = complex(z)
    if 0.0 <= z.real <= lattice.BAND_MAX:
        return abs(z.imag)
    edge = 0.0 if z.real < 0.0 else lattice.BAND_MAX
    return abs(z - edge)


@lru_cache(maxsize=100_000)
def _green_offband_cached(z, m, n, gap, tol):
    if _band_distance(z) <= gap:
        raise DomainError(
            f"{z} is within {gap} of the band [0, 4]; "
            "use green_boundary for in-band energies"
        )
    val, _ = integrate_adaptive(
        lambda t: _shell_density_scalar(t, m, n) / (t - z),
        lattice.BAND_MIN, lattice.BAND_MAX,
        singular_points=lattice.BAND_SINGULAR_POINTS,
        tol=tol,
    )
    if complex(z).imag == 0.0:
        return complex(val).real
    return val


def green_offband(z, x, gap=BAND_GAP_DEFAULT, tol=1e-9):
    """Resolvent kernel g(z; x) for z at distance > gap from the band.

    Real z outside [0, 4] gives a real value.
    """
    m, n = canonical_displacement(x)
    return _green_offband_cached(complex(z), m, n, gap, tol)


@lru_cache(maxsize=200_000)
def _green_boundary_cached(e, m, n, tol):
    if not lattice.BAND_MIN < e < lattice.BAND_MAX or e == lattice.BAND_CENTER:
        raise DomainError(
            f"boundary values exist for e in (0, 4) \\ {{2}}, got {e}"
        )
    pv = principal_value(
        lambda t: _shell_density_scalar(t, m, n),
        e, lattice.BAND_MIN, lattice.BAND_MAX,
        singular_points=lattice.BAND_SINGULAR_POINTS,
        tol=tol,
    )
    return pv + 1j * math.pi * _shell_density_scalar(e, m, n)


def green_boundary(e, side, x, tol=1e-9):
    """Boundary value g_{side}(e; x) of the resolvent on the band cut.

    ``side`` is +1 (limit from the upper half-plane) or -1.  With the real
    kernel here, g_- is the complex conjugate of g_+.
    """
    if side not in (+1, -1):
        raise DomainError(f"side must be +1 or -1, got {side!r}")
    m, n = canonical_displacement(x)
    val = _green_boundary_cached(float(e), m, n, tol)
    return val if side == +1 else val.conjugate()


# ----------------------------------------------------------------------
# independent verification route: damped Bessel-product integral
# ----------------------------------------------------------------------

def _neville_at_zero(xs, ys):
    """Polynomial extrapolation of (xs, ys) to x = 0."""
    ys = list(ys)
    for level in range(1, len(xs)):
        for i in range(len(xs) - level):
            dx = xs[i] - xs[i + level]
            ys[i] = (xs[i] * ys[i + 1] - xs[i + level] * ys[i]) / dx
    return ys[0]


@lru_cache(maxsize=512)
def _bessel_product_grid(m, n, t_max, nodes_per_panel):
    ts, ws = gauss_panels(np.arange(0.0, t_max + 1.0), nodes_per_panel)
    return ts, ws * special.jv(m, ts) * special.jv(n, ts)


def green_boundary_bessel(e, x, eps0=0.1, levels=6):
    """g_+(e; x) via the damped oscillatory route, extrapolated to zero damping.

    Evaluates ``i^{m+n+1} * integral_0^inf exp(-i t (2 - e - i eps)) Jm Jn dt``
    for a geometric ladder of dampings eps and removes the damping by
    polynomial extrapolation.  Entirely independent of the shell-density /
    principal-value route; used as its cross-check.
    """
    m, n = canonical_displacement(x)
    eps = eps0 * 0.5 ** np.arange(levels)
    t_max = math.ceil(18.0 / eps[-1])
    ts, jw = _bessel_product_grid(m, n, t_max, 12)
    phase = np.exp(-1j * (2.0 - e) * ts)
    vals = [np.sum(jw * phase * np.exp(-ek * ts)) for ek in eps]
    val = _neville_at_zero(list(eps), vals)
    return 1j ** (m + n + 1) * val


# ----------------------------------------------------------------------
# shared fixed-grid tables for bulk evaluation
# ----------------------------------------------------------------------

class BandGrid:
    """Composite Gauss-Legendre grid over the band [0, 4].

    Panels are geometrically refined toward the band edges and the band
    center; the grid is symmetric under t -> 4 - t so shell quantities are
    only ever solved on the lower half.
    """

    def __init__(self, nodes_per_panel=16, levels=24):
        left = graded_breakpoints(
            lattice.BAND_MIN, lattice.BAND_CENTER,
            refine_at=(lattice.BAND_MIN, lattice.BAND_CENTER),
            levels=levels,
        )
        lo_nodes, lo_weights = gauss_panels(left, nodes_per_panel)
        self.nodes = np.concatenate([lo_nodes, (4.0 - lo_nodes)[::-1]])
        self.weights = np.concatenate([lo_weights, lo_weights[::-1]])
        self.n_half = len(lo_nodes)

    def __len__(self):
        return len(self.nodes)


class DensityTable:
    """Rows of P(t)_{0,x} on a `BandGrid`, one row per canonical displacement.

    Rows are computed in batches on demand and never mutated afterwards, so
    a single table can be shared by every consumer of the same grid.
    """

    def __init__(self, grid: BandGrid):
        self.grid = grid
        self._rows: dict[tuple[int, int], np.ndarray] = {}

    def rows(self, disps):
        """P-row matrix for a list of displacements (any representatives)."""
        canon = [canonical_displacement(x) for x in disps]
        missing = sorted(set(c for c in canon if c not in self._rows))
        if missing:
            self._fill(missing)
        return np.array([self._rows[c] for c in canon])

    def _fill(self, canon):
        grid = self.grid
        half = np.empty((len(canon), grid.n_half))
        lo_nodes = grid.nodes[:grid.n_half]
        bucket = _radius_bucket(max(math.hypot(m, n) for m, n in canon))
        for i, t in enumerate(lo_nodes):
            half[:, i] = _shell_sum(t, canon, bucket)
        signs = np.array([(-1.0) ** (m + n) for m, n in canon])
        full = np.concatenate([half, signs[:, None] * half[:, ::-1]], axis=1)
        for c, row in zip(canon, full):
            self._rows[c] = row

    def density_at(self, e, disps):
        """P(e)_{0,x} for the given displacements (direct shell sums)."""
        canon = [canonical_displacement(x) for x in disps]
        order = {}
        for c in canon:
            order.setdefault(c, len(order))
        uniq = list(order)
        vals = shell_density_rows(e, uniq)
        return np.array([vals[order[c]] for c in canon])

    def boundary_minus(self, e, disps):
        """g_-(e; x) for many displacements via the shared grid.

        Principal value by subtraction against the row of P values, using
        the same nodes for every displacement so that downstream linear
        identities (current conservation, contour invariance) hold at the
        quadrature level.
        """
        if not lattice.BAND_MIN < e < lattice.BAND_MAX:
            raise DomainError(f"energy {e} outside the open band")
        rows = self.rows(disps)
        p_at_e = self.density_at(e, disps)
        diff = (rows - p_at_e[:, None]) / (self.grid.nodes - e)
        log_term = math.log((lattice.BAND_MAX - e) / (e - lattice.BAND_MIN))
        pv = diff @ self.grid.weights + p_at_e * log_term
        return pv - 1j * math.pi * p_at_e

    def offband(self, z, disps, gap=BAND_GAP_DEFAULT):
        """g(z; x) for many displacements via the shared grid."""
        if _band_distance(z) <= gap:
            raise DomainError(f"{z} is within {gap} of the band [0, 4]")
        rows = self.rows(disps)
        vals = rows @ (self.weights_over(z))
        if complex(z).imag == 0.0:
            return vals.real
        return vals

    def weights_over(self, z):
        return self.grid.weights / (self.grid.nodes - complex(z))


_DEFAULT_TABLE: DensityTable | None = None


def default_table() -> DensityTable:
    """Process-wide shared table on the default band grid."""
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        _DEFAULT_TABLE = DensityTable(BandGrid())
    return _DEFAULT_TABLE
