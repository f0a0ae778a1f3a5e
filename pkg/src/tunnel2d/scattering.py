"""Tunneling junction, scattering matrices and bound states.

The junction couples finite contact sets S1, S2 of the two reservoirs with
a real amplitude matrix.  All scattering information is carried by the
finite matrix ``Q(z) = v (v + v r0(z) v)^{-1} v`` on the contact sites; its
band boundary values Q_+/Q_- feed every observable, and real energies
outside the band where ``v + v r0 v`` develops a kernel are the bound
states of the coupled Hamiltonian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import green, lattice
from .errors import BoundStateProximityError, DomainError
from .quadrature import integrate_adaptive

RCOND_MIN = 1e-12
_KERNEL_REL = 1e-8  # singular values below this fraction of the largest span the kernel


@dataclass(frozen=True)
class Junction:
    """Contact sites and real tunneling amplitudes between the reservoirs.

    ``amplitudes[i, j]`` couples ``contacts1[i]`` to ``contacts2[j]``.
    """

    contacts1: tuple
    contacts2: tuple
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=float)
        object.__setattr__(self, "contacts1", tuple(map(tuple, self.contacts1)))
        object.__setattr__(self, "contacts2", tuple(map(tuple, self.contacts2)))
        object.__setattr__(self, "amplitudes", amps)
        if amps.shape != (len(self.contacts1), len(self.contacts2)):
            raise DomainError(
                f"amplitude matrix shape {amps.shape} does not match "
                f"{len(self.contacts1)}x{len(self.contacts2)} contacts"
            )
        amps.setflags(write=False)

    @classmethod
    def paired(cls, pairs):
        """Junction from (site1, site2, amplitude) triples, one per channel."""
        c1 = [p[0] for p in pairs]
        c2 = [p[1] for p in pairs]
        amps = np.diag([float(p[2]) for p in pairs])
        return cls(tuple(c1), tuple(c2), amps)

    @property
    def sites(self):
        """Contact sites of both reservoirs in the fixed basis order."""
        return self.contacts1 + self.contacts2

    @property
    def n1(self):
        return len(self.contacts1)

    def v_matrix(self):
        """Hopping perturbation as a matrix on S1 + S2."""
        n1, n2 = len(self.contacts1), len(self.contacts2)
        v = np.zeros((n1 + n2, n1 + n2))
        v[:n1, n1:] = self.amplitudes
        v[n1:, :n1] = self.amplitudes.T
        return v

    def coupling_basis(self):
        """Orthonormal basis of the range of v (empty for a dead junction)."""
        v = self.v_matrix()
        vals, vecs = np.linalg.eigh(v)
        keep = np.abs(vals) > 1e-14 * max(1.0, np.abs(vals).max())
        return vecs[:, keep]

    def junction_bonds(self):
        """Oriented bonds (x in S1, y in S2) with nonzero amplitude."""
        return [
            (x, y, self.amplitudes[i, j])
            for i, x in enumerate(self.contacts1)
            for j, y in enumerate(self.contacts2)
            if self.amplitudes[i, j] != 0.0
        ]


def _green_values(z_or_e, side):
    if side is None:
        return lambda d: green.green_offband(z_or_e, d)
    return lambda d: green.green_boundary(z_or_e, side, d)


def _resolvent_block(contacts, g):
    n = len(contacts)
    r = np.empty((n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            d = (contacts[a][0] - contacts[b][0], contacts[a][1] - contacts[b][1])
            r[a, b] = g(d)
    return r


def resolvent_on_contacts(junction, z_or_e, side=None):
    """Block-diagonal free resolvent restricted to S1 + S2."""
    g = _green_values(z_or_e, side)
    r1 = _resolvent_block(junction.contacts1, g)
    r2 = _resolvent_block(junction.contacts2, g)
    n1, n2 = len(r1), len(r2)
    r = np.zeros((n1 + n2, n1 + n2), dtype=complex)
    r[:n1, :n1] = r1
    r[n1:, n1:] = r2
    return r


def m_matrix(junction, z_or_e, side=None):
    """Junction matrix v + v r0 v on S1 + S2.

    Off the band pass a complex/real ``z_or_e`` with ``side=None``; on the
    band pass the energy together with ``side`` +1 or -1.
    """
    v = junction.v_matrix()
    if not v.any():
        return np.zeros_like(v, dtype=complex)
    r = resolvent_on_contacts(junction, z_or_e, side)
    return v + v @ r @ v


@dataclass(frozen=True)
class QMatrices:
    """Scattering matrix on the contact sites with addressable blocks."""

    argument: complex
    side: object
    matrix: np.ndarray
    n1: int

    def block(self, i, j):
        """Reservoir block Q^{(i,j)}, i, j in {1, 2}."""
        sl = [None, slice(None, self.n1), slice(self.n1, None)]
        return self.matrix[sl[i], sl[j]]


def q_matrix(junction, z_or_e, side=None):
    """Scattering matrix Q = v (v + v r0 v)^{-1} v restricted to the contacts.

    The inverse is taken on the range of v; a dead junction gives Q = 0.
    Raises `BoundStateProximityError` when the junction matrix is singular
    at a real off-band argument (an eigenvalue of the coupled Hamiltonian
    is nearby).
    """
    n = len(junction.sites)
    basis = junction.coupling_basis()
    if basis.shape[1] == 0:
        return QMatrices(complex(z_or_e), side, np.zeros((n, n), dtype=complex),
                         junction.n1)
    m_red = basis.T @ m_matrix(junction, z_or_e, side) @ basis
    svals = np.linalg.svd(m_red, compute_uv=False)
    rcond = svals.min() / svals.max() if svals.max() > 0 else 0.0
    if rcond < RCOND_MIN:
        raise BoundStateProximityError(
            f"junction matrix singular at {z_or_e} (rcond {rcond:.2e}); "
            "a bound state is nearby",
            det_estimate=np.linalg.det(m_red),
        )
    v = junction.v_matrix()
    q = v @ basis @ np.linalg.solve(m_red, basis.T) @ v
    return QMatrices(complex(z_or_e), side, q, junction.n1)


@dataclass(frozen=True)
class BoundState:
    """Eigenvalue of the coupled Hamiltonian outside the band.

    ``kernel_vector`` spans the null space of the junction matrix at the
    eigenvalue; ``source`` is v applied to it, which generates the (not yet
    normalized) eigenvector amplitudes through the off-band resolvent.
    """

    energy: float
    kernel_vector: np.ndarray
    source: np.ndarray
    norm_squared: float
    residual: float
    junction: Junction

    def amplitude(self, x, reservoir):
        """Unnormalized eigenvector component at site x of a reservoir."""
        contacts = (self.junction.contacts1 if reservoir == 1
                    else self.junction.contacts2)
        offset = 0 if reservoir == 1 else self.junction.n1
        total = 0.0
        for a, s in enumerate(contacts):
            w = self.source[offset + a]
            if w != 0.0:
                d = (x[0] - s[0], x[1] - s[1])
                total -= green.green_offband(self.energy, d) * w
        return total

    def source_overlap(self, e):
        """(v psi, P(e) v psi), the shell weight of the source vector."""
        j = self.junction
        w1 = self.source[:j.n1]
        w2 = self.source[j.n1:]
        total = 0.0
        for contacts, w in ((j.contacts1, w1), (j.contacts2, w2)):
            for a in range(len(contacts)):
                for b in range(len(contacts)):
                    if w[a] == 0.0 or w[b] == 0.0:
                        continue
                    d = (contacts[a][0] - contacts[b][0],
                         contacts[a][1] - contacts[b][1])
                    total += w[a] * w[b] * green.shell_density(e, d)
        return total


def _det_scan_grid(decades_from=1e-6, decades_to=40.0, points=2000):
    """Log-spaced distances from the band edges, per the scan policy."""
    return np.geomspace(decades_from, decades_to, points)


def _fast_m_red(junction, basis):
    """Reduced junction matrix off the band via the shared density table.

    One row lookup per distinct contact displacement; evaluating at a new
    z is then a single matrix-vector product, which keeps the det scan
    cheap even for points a hair outside the band edges.
    """
    table = green.default_table()
    n1 = junction.n1
    n = len(junction.sites)
    disps = []
    index = []
    for block, contacts in ((0, junction.contacts1), (n1, junction.contacts2)):
        for a in range(len(contacts)):
            for b in range(len(contacts)):
                d = (contacts[a][0] - contacts[b][0],
                     contacts[a][1] - contacts[b][1])
                disps.append(d)
                index.append((block + a, block + b))
    rows = table.rows(disps)
    v = junction.v_matrix()

    def m_red_at(z):
        g_vals = rows @ table.weights_over(z).real
        r = np.zeros((n, n))
        for (a, b), g in zip(index, g_vals):
            r[a, b] = g
        return basis.T @ (v + v @ r @ v) @ basis

    return m_red_at


def find_bound_states(junction, tol=1e-10, scan_points=2000):
    """Locate all point-spectrum energies outside the band.

    Scans ``det (v + v r0 v)`` restricted to the coupling subspace on a
    logarithmic grid of distances from both band edges, refines every sign
    change by bisection, and extracts the kernel by SVD.  Degenerate
    kernels yield one `BoundState` per singular direction.
    """
    basis = junction.coupling_basis()
    if basis.shape[1] == 0:
        return []
    m_red_at = _fast_m_red(junction, basis)
    states = []
    distances = _det_scan_grid(points=scan_points)
    for edge, direction in ((lattice.BAND_MIN, -1.0), (lattice.BAND_MAX, +1.0)):
        zs = edge + direction * distances
        dets = np.array([np.linalg.det(m_red_at(z)) for z in zs])
        sign_flip = np.nonzero(np.sign(dets[:-1]) * np.sign(dets[1:]) < 0)[0]
        for i in sign_flip:
            lo, hi = sorted((zs[i], zs[i + 1]))
            states.extend(_refine_root(junction, basis, m_red_at, lo, hi, tol))
    states.sort(key=lambda s: s.energy)
    # merge duplicates found from adjacent brackets
    merged = []
    for s in states:
        if merged and abs(s.energy - merged[-1].energy) < 10 * tol:
            continue
        merged.append(s)
    return merged


def _refine_root(junction, basis, m_red_at, lo, hi, tol):
    def _reduced_det(z):
        return float(np.linalg.det(m_red_at(z)))

    f_lo = _reduced_det(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = _reduced_det(mid)
        if f_mid == 0.0:
            lo = hi = mid
            break
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    energy = _polish_root(junction, basis, 0.5 * (lo + hi), tol)
    try:
        m_red = (basis.T @ m_matrix(junction, energy) @ basis).real
    except DomainError:
        m_red = m_red_at(energy)
    u, svals, vt = np.linalg.svd(m_red)
    kernel_dim = int(np.sum(svals < _KERNEL_REL * svals.max()))
    out = []
    for k in range(kernel_dim if kernel_dim else 1):
        psi_red = vt[-1 - k]
        psi = basis @ psi_red
        residual = float(np.linalg.norm(m_red @ psi_red))
        source = junction.v_matrix() @ psi
        out.append(BoundState(
            energy=float(energy),
            kernel_vector=psi,
            source=source,
            norm_squared=_norm_squared(junction, source, energy),
            residual=residual,
            junction=junction,
        ))
    return out


def _polish_root(junction, basis, energy, tol):
    """Re-bisect a det root against the adaptive-quadrature resolvent.

    The scan root carries the density table's quadrature error; a short
    bisection with expanding bracket removes it.  Falls back to the scan
    value when the energy sits too close to the band for the adaptive
    route.
    """
    def det_at(z):
        return float(np.linalg.det((basis.T @ m_matrix(junction, z) @ basis).real))

    try:
        f0 = det_at(energy)
    except DomainError:
        return energy
    if f0 == 0.0:
        return energy
    edge = lattice.BAND_MIN if energy < lattice.BAND_CENTER else lattice.BAND_MAX
    h = max(10.0 * tol, 1e-14 * abs(energy - edge))
    cap = 0.25 * abs(energy - edge)
    lo = hi = energy
    f_lo = f_hi = f0
    while h < cap:
        try:
            lo, hi = energy - h, energy + h
            f_lo, f_hi = det_at(lo), det_at(hi)
        except DomainError:
            return energy
        if np.sign(f_lo) != np.sign(f_hi):
            break
        h *= 4.0
    else:
        return energy
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = det_at(mid)
        if f_mid == 0.0:
            return mid
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _norm_squared(junction, source, energy, tol=1e-9):
    bs = BoundState(energy, source, source, 0.0, 0.0, junction)

    def integrand(e):
        return bs.source_overlap(e) / (e - energy) ** 2

    val, _ = integrate_adaptive(
        integrand, lattice.BAND_MIN, lattice.BAND_MAX,
        singular_points=lattice.BAND_SINGULAR_POINTS, tol=tol,
    )
    return float(val)


def occupation_weight(bound_state, states, tol=1e-9):
    """(f, rho0 f) for the unnormalized eigenvector of a bound state.

    ``states`` is the pair of reservoir states; each contributes the Fermi
    weighted shell overlap of its part of the source vector.
    """
    j = bound_state.junction
    energy = bound_state.energy
    total = 0.0
    for reservoir, state in ((1, states[0]), (2, states[1])):
        offset = 0 if reservoir == 1 else j.n1
        contacts = j.contacts1 if reservoir == 1 else j.contacts2
        w = bound_state.source[offset:offset + len(contacts)]
        if not np.any(w):
            continue

        def overlap(e):
            total_e = 0.0
            for a in range(len(contacts)):
                for b in range(len(contacts)):
                    if w[a] == 0.0 or w[b] == 0.0:
                        continue
                    d = (contacts[a][0] - contacts[b][0],
                         contacts[a][1] - contacts[b][1])
                    total_e += w[a] * w[b] * green.shell_density(e, d)
            return total_e / (e - energy) ** 2

        lo, hi = state.band_support()
        if hi > lo:
            val, _ = integrate_adaptive(
                lambda e: state.fermi_weight(e) * overlap(e), lo, hi,
                singular_points=lattice.BAND_SINGULAR_POINTS, tol=tol,
            )
            total += float(val)
    return total
