"""Site and bond fields over a rectangular window of reservoir 2.

The engine evaluates the per-energy kernels once per quadrature node on a
fixed energy grid shared by every site and bond.  All resolvent boundary
values, on the band grid and at the field sites, come from one shared
density table, so linear identities (sitewise current conservation,
contour invariance of the total current) hold at the level of the
quadrature itself rather than to independent integration errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import green, lattice
from .errors import DomainError
from .observables import ReservoirState, equilibrium_density
from .quadrature import gauss_panels
from .scattering import Junction

DENSITY_CHANNELS = ("transmitted", "reflected", "point", "total")
CURRENT_CHANNELS = ("transmitted", "reflected", "total")


@dataclass(frozen=True)
class Window:
    """Inclusive integer rectangle [x1_min, x1_max] x [x2_min, x2_max]."""

    x1_min: int
    x1_max: int
    x2_min: int
    x2_max: int

    def __post_init__(self):
        if self.x1_max < self.x1_min or self.x2_max < self.x2_min:
            raise DomainError(f"empty window {self}")

    @classmethod
    def around(cls, contacts, size=40):
        """Square window of given side centered on a contact set."""
        c1 = sum(c[0] for c in contacts) / len(contacts)
        c2 = sum(c[1] for c in contacts) / len(contacts)
        lo1 = round(c1) - size // 2 + 1
        lo2 = round(c2) - size // 2 + 1
        return cls(lo1, lo1 + size - 1, lo2, lo2 + size - 1)

    def sites(self):
        """All window sites, lexicographically sorted, as an (N, 2) array."""
        g1 = np.arange(self.x1_min, self.x1_max + 1)
        g2 = np.arange(self.x2_min, self.x2_max + 1)
        a, b = np.meshgrid(g1, g2, indexing="ij")
        return np.column_stack([a.ravel(), b.ravel()])

    def contains(self, x):
        return (self.x1_min <= x[0] <= self.x1_max
                and self.x2_min <= x[1] <= self.x2_max)

    def interior(self, x):
        return (self.x1_min < x[0] < self.x1_max
                and self.x2_min < x[1] < self.x2_max)

    def bonds(self):
        """Oriented nearest-neighbor bonds with both ends in the window.

        Each undirected bond appears once, oriented from the smaller to
        the larger endpoint in lexicographic order.
        """
        out = []
        for x1 in range(self.x1_min, self.x1_max + 1):
            for x2 in range(self.x2_min, self.x2_max + 1):
                if x1 < self.x1_max:
                    out.append((x1, x2, x1 + 1, x2))
                if x2 < self.x2_max:
                    out.append((x1, x2, x1, x2 + 1))
        out.sort()
        return np.array(out, dtype=int)


@dataclass(frozen=True)
class DensityField:
    window: Window
    channel: str
    sites: np.ndarray
    values: np.ndarray

    def at(self, x):
        i = np.nonzero((self.sites[:, 0] == x[0]) & (self.sites[:, 1] == x[1]))[0]
        if len(i) == 0:
            raise DomainError(f"site {x} outside field window")
        return float(self.values[i[0]])


@dataclass(frozen=True)
class CurrentField:
    window: Window
    channel: str
    bonds: np.ndarray
    values: np.ndarray
    junction_bonds: tuple = ()
    junction_values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def bond_value(self, x, y):
        """Current along the oriented bond (x, y); antisymmetric exactly."""
        m = ((self.bonds[:, 0] == x[0]) & (self.bonds[:, 1] == x[1])
             & (self.bonds[:, 2] == y[0]) & (self.bonds[:, 3] == y[1]))
        i = np.nonzero(m)[0]
        if len(i):
            return float(self.values[i[0]])
        m = ((self.bonds[:, 0] == y[0]) & (self.bonds[:, 1] == y[1])
             & (self.bonds[:, 2] == x[0]) & (self.bonds[:, 3] == x[1]))
        i = np.nonzero(m)[0]
        if len(i):
            return -float(self.values[i[0]])
        raise DomainError(f"bond {x}-{y} not in field")

    def divergence(self, x):
        """Net outflow from site x through lattice and junction bonds."""
        total = 0.0
        out = ((self.bonds[:, 0] == x[0]) & (self.bonds[:, 1] == x[1]))
        total += self.values[out].sum()
        inc = ((self.bonds[:, 2] == x[0]) & (self.bonds[:, 3] == x[1]))
        total -= self.values[inc].sum()
        for (s2, val) in zip(self.junction_bonds, self.junction_values):
            if s2 == (x[0], x[1]):
                total -= val  # junction bond oriented reservoir 1 -> 2
        return float(total)


def _phase_rate(e, radius):
    """Bound on d(phase)/de of the outgoing waves at distance `radius`."""
    e_fold = min(e, lattice.BAND_MAX - e)
    k = lattice.shell_radius(max(min(e_fold, 1.999), 1e-9), 0.0)
    return 1.3 * radius / max(math.sin(k), 1e-3)


def energy_breakpoints(lo, hi, radius, phase_budget=3.0, min_width=1e-5):
    """Panel breakpoints resolving wave oscillation in the energy integral."""
    pts = [lo]
    e = lo
    while e < hi:
        step = max(phase_budget / _phase_rate(max(e, min_width), radius),
                   min_width)
        e = min(e + step, hi)
        pts.append(e)
    return np.array(pts)


class FieldEngine:
    """Evaluates density and current fields on a shared energy grid."""

    def __init__(self, junction: Junction, states, window: Window | None = None,
                 nodes_per_panel=10, phase_budget=3.0):
        self.junction = junction
        self.states = tuple(states)
        self.window = window or Window.around(junction.contacts2)
        self.table = green.default_table()
        self.sites = self.window.sites()
        self.bonds = self.window.bonds()
        radius = self._max_radius()
        self._build_energy_grid(nodes_per_panel, phase_budget, radius)
        self._site_index = {tuple(s): i for i, s in enumerate(self.sites)}
        self._node_cache = {}

    def _max_radius(self):
        r = 1.0
        for s in self.junction.contacts2:
            for corner in [(self.window.x1_min, self.window.x2_min),
                           (self.window.x1_min, self.window.x2_max),
                           (self.window.x1_max, self.window.x2_min),
                           (self.window.x1_max, self.window.x2_max)]:
                r = max(r, math.hypot(corner[0] - s[0], corner[1] - s[1]))
        return r

    def _build_energy_grid(self, nodes_per_panel, phase_budget, radius):
        """Composite Gauss-Legendre grid split at every occupation step."""
        cuts = {lattice.BAND_MIN}
        for s in self.states:
            lo, hi = s.band_support()
            cuts.add(hi)
        for s in lattice.BAND_SINGULAR_POINTS:
            if s < max(cuts):
                cuts.add(s)
        cuts = sorted(cuts)
        nodes, weights = [], []
        for a, b in zip(cuts[:-1], cuts[1:]):
            bp = energy_breakpoints(a, b, radius, phase_budget)
            n, w = gauss_panels(bp, nodes_per_panel)
            nodes.append(n)
            weights.append(w)
        self.energy_nodes = np.concatenate(nodes)
        self.energy_weights = np.concatenate(weights)
        self.channel_weights = {
            "transmitted": self.states[0].fermi_weight(self.energy_nodes),
            "reflected": self.states[1].fermi_weight(self.energy_nodes),
        }

    # per-node kernel assembly, all values drawn from the shared table

    def _pair_disps(self, contacts):
        return [(a[0] - b[0], a[1] - b[1]) for a in contacts for b in contacts]

    def _q_plus(self, e):
        j = self.junction
        n1, n2 = j.n1, len(j.contacts2)
        g1m = self.table.boundary_minus(e, self._pair_disps(j.contacts1))
        g2m = self.table.boundary_minus(e, self._pair_disps(j.contacts2))
        r_plus = np.zeros((n1 + n2, n1 + n2), dtype=complex)
        r_plus[:n1, :n1] = g1m.conj().reshape(n1, n1)
        r_plus[n1:, n1:] = g2m.conj().reshape(n2, n2)
        v = j.v_matrix()
        m = v + v @ r_plus @ v
        basis = j.coupling_basis()
        if basis.shape[1] == 0:
            return np.zeros_like(m), r_plus
        m_red = basis.T @ m @ basis
        q = v @ basis @ np.linalg.solve(m_red, basis.T) @ v
        return q, r_plus

    def _node_data(self, e):
        if e in self._node_cache:
            return self._node_cache[e]
        j = self.junction
        n1 = j.n1
        q_plus, r_plus = self._q_plus(e)
        q_minus = q_plus.conj()
        p1 = self.table.density_at(e, self._pair_disps(j.contacts1))
        p1 = p1.reshape(n1, n1)
        n2 = len(j.contacts2)
        p2 = self.table.density_at(e, self._pair_disps(j.contacts2))
        p2 = p2.reshape(n2, n2)
        m_tr = q_plus[n1:, :n1] @ p1 @ q_minus[:n1, n1:]
        m_ref = q_plus[n1:, n1:] @ p2 @ q_minus[n1:, n1:]
        disps = [(x[0] - s[0], x[1] - s[1])
                 for x in self.sites for s in j.contacts2]
        v_minus = self.table.boundary_minus(e, disps).reshape(len(self.sites), n2)
        v_zero = self.table.density_at(e, disps).reshape(len(self.sites), n2)
        # junction spectral currents per channel (reservoir 1 -> 2)
        g1p = r_plus[:n1, :n1]
        g2m = r_plus[n1:, n1:].conj()
        q12m = q_minus[:n1, n1:]
        term_tr = -p1 @ q12m @ g2m + g1p @ q_plus[:n1, :n1] @ p1 @ q12m @ g2m
        term_ref = (-g1p @ q_plus[:n1, n1:] @ p2
                    + g1p @ q_plus[:n1, n1:] @ p2 @ q_minus[n1:, n1:] @ g2m)
        amps = j.amplitudes
        data = {
            "p00": float(self.table.density_at(e, [(0, 0)])[0]),
            "m_tr": m_tr,
            "m_ref": m_ref,
            "q22_plus": q_plus[n1:, n1:],
            "v_minus": v_minus,
            "v_zero": v_zero,
            "junction_tr": 2.0 * amps * term_tr.imag,
            "junction_ref": 2.0 * amps * term_ref.imag,
        }
        self._node_cache[e] = data
        return data

    def _density_spectral(self, data, channel):
        vm = data["v_minus"]
        if channel == "transmitted":
            return np.einsum("xi,ij,xj->x", vm.conj(), data["m_tr"], vm).real
        v0 = data["v_zero"]
        cross = np.einsum("xi,ij,xj->x", vm.conj(), data["q22_plus"], v0).real
        quad = np.einsum("xi,ij,xj->x", vm.conj(), data["m_ref"], vm).real
        return data["p00"] - 2.0 * cross + quad

    def _current_spectral(self, data, channel, ia, ib):
        vm = data["v_minus"]
        if channel == "transmitted":
            return -np.einsum("xi,ij,xj->x", vm[ia].conj(), data["m_tr"],
                              vm[ib]).imag
        v0 = data["v_zero"]
        # the cross term must enter antisymmetrized in (x, y): only then does
        # the reflected field satisfy the lattice continuity equation
        cxy = np.einsum("xi,ij,xj->x", vm[ia].conj(), data["q22_plus"],
                        v0[ib]).imag
        cyx = np.einsum("xi,ij,xj->x", vm[ib].conj(), data["q22_plus"],
                        v0[ia]).imag
        quad = np.einsum("xi,ij,xj->x", vm[ia].conj(), data["m_ref"],
                         vm[ib]).imag
        return cxy - cyx - quad

    def density_field(self, channel, bound_states=None) -> DensityField:
        """Energy-integrated density over the window for one channel."""
        if channel == "point":
            return self._point_field(bound_states)
        if channel == "total":
            tr = self.density_field("transmitted")
            ref = self.density_field("reflected")
            pt = self._point_field(bound_states)
            return DensityField(self.window, "total", self.sites,
                                tr.values + ref.values + pt.values)
        if channel not in ("transmitted", "reflected"):
            raise DomainError(f"unknown density channel {channel!r}")
        total = np.zeros(len(self.sites))
        fw = self.channel_weights[channel]
        for e, w, f in zip(self.energy_nodes, self.energy_weights, fw):
            if f == 0.0:
                continue
            total += w * f * self._density_spectral(self._node_data(e), channel)
        return DensityField(self.window, channel, self.sites, total)

    def density_spectral_field(self, channel, e) -> DensityField:
        """Fixed-energy density over the window (per unit energy)."""
        vals = self._density_spectral(self._node_data(e), channel)
        return DensityField(self.window, channel, self.sites, vals.copy())

    def _point_field(self, bound_states=None) -> DensityField:
        from . import scattering
        if bound_states is None:
            bound_states = scattering.find_bound_states(self.junction)
        total = np.zeros(len(self.sites))
        for b in bound_states:
            disps = [(x[0] - s[0], x[1] - s[1])
                     for x in self.sites for s in self.junction.contacts2]
            g_rows = self.table.offband(b.energy, disps, gap=0.0)
            g_rows = g_rows.reshape(len(self.sites), -1)
            w2 = b.source[self.junction.n1:]
            fx = -(g_rows @ w2)
            weight = scattering.occupation_weight(b, self.states)
            total += (fx * fx) * weight / b.norm_squared ** 2
        return DensityField(self.window, "point", self.sites, total)

    def _bond_site_indices(self):
        ia = np.array([self._site_index[(b[0], b[1])] for b in self.bonds])
        ib = np.array([self._site_index[(b[2], b[3])] for b in self.bonds])
        return ia, ib

    def current_field(self, channel) -> CurrentField:
        """Energy-integrated bond currents over the window for one channel."""
        if channel == "total":
            tr = self.current_field("transmitted")
            ref = self.current_field("reflected")
            return CurrentField(self.window, "total", self.bonds,
                                tr.values + ref.values, tr.junction_bonds,
                                tr.junction_values + ref.junction_values)
        if channel not in ("transmitted", "reflected"):
            raise DomainError(f"unknown current channel {channel!r}")
        ia, ib = self._bond_site_indices()
        total = np.zeros(len(self.bonds))
        key = "junction_tr" if channel == "transmitted" else "junction_ref"
        junc_bonds = [tuple(s2) for s2 in self.junction.contacts2]
        junc = np.zeros(len(junc_bonds))
        fw = self.channel_weights[channel]
        for e, w, f in zip(self.energy_nodes, self.energy_weights, fw):
            if f == 0.0:
                continue
            data = self._node_data(e)
            total += w * f * self._current_spectral(data, channel, ia, ib)
            junc += w * f * data[key].sum(axis=0)
        return CurrentField(self.window, channel, self.bonds, total,
                            tuple(junc_bonds), junc)

    def current_spectral_field(self, channel, e) -> CurrentField:
        """Fixed-energy bond currents over the window (per unit energy)."""
        ia, ib = self._bond_site_indices()
        data = self._node_data(e)
        vals = self._current_spectral(data, channel, ia, ib)
        key = "junction_tr" if channel == "transmitted" else "junction_ref"
        junc_bonds = [tuple(s2) for s2 in self.junction.contacts2]
        return CurrentField(self.window, channel, self.bonds, vals,
                            tuple(junc_bonds), data[key].sum(axis=0).copy())

    def total_current(self) -> float:
        """Total junction current on the engine's energy grid."""
        total = 0.0
        for key, channel in (("junction_tr", "transmitted"),
                             ("junction_ref", "reflected")):
            fw = self.channel_weights[channel]
            for e, w, f in zip(self.energy_nodes, self.energy_weights, fw):
                if f == 0.0:
                    continue
                total += w * f * self._node_data(e)[key].sum()
        return float(total)

    def contour_flux(self, current: CurrentField, margin) -> float:
        """Net outflow through the boundary of a rectangle around S2.

        The rectangle extends `margin` sites beyond the bounding box of
        the reservoir-2 contacts and must fit inside the window.
        """
        c = self.junction.contacts2
        lo1 = min(s[0] for s in c) - margin
        hi1 = max(s[0] for s in c) + margin
        lo2 = min(s[1] for s in c) - margin
        hi2 = max(s[1] for s in c) + margin
        if not (self.window.x1_min < lo1 and hi1 < self.window.x1_max
                and self.window.x2_min < lo2 and hi2 < self.window.x2_max):
            raise DomainError("contour does not fit strictly inside the window")
        flux = 0.0
        for x1 in range(lo1, hi1 + 1):
            flux += current.bond_value((x1, hi2), (x1, hi2 + 1))
            flux -= current.bond_value((x1, lo2 - 1), (x1, lo2))
        for x2 in range(lo2, hi2 + 1):
            flux += current.bond_value((hi1, x2), (hi1 + 1, x2))
            flux -= current.bond_value((lo1 - 1, x2), (lo1, x2))
        return flux


def far_field_density(junction, states, x, tol=1e-7):
    """Total stationary density at one (possibly distant) site."""
    from . import observables
    tr, ref = observables.density_ac(junction, states, x, tol=tol)
    return tr + ref


def equilibrium_reference(states) -> float:
    """Initial equilibrium density of reservoir 2 (the far-field value)."""
    return equilibrium_density(states[1])
