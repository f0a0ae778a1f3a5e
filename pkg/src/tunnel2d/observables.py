"""Stationary-state observables of the coupled reservoir pair.

Everything here reduces to finite matrix algebra on the contact sites:
the scattering blocks Q(e), the shell-density matrices P(e) restricted to
the contacts, and the two site-dependent vectors V_-(e, x) (outgoing
waves from the reservoir-2 contacts) and V0(e, x) (shell overlaps).
Densities are quadratic forms in those vectors, bond currents are their
imaginary sesquilinear parts, and the total current is an energy integral
of a transmission trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import green, lattice
from .errors import DomainError
from .quadrature import integrate_adaptive
from .scattering import Junction, q_matrix


@dataclass(frozen=True)
class ReservoirState:
    """Inverse temperature and chemical potential of one reservoir."""

    beta: float
    mu: float

    def fermi_weight(self, e):
        """Occupation weight in [0, 1]; an exact step at beta = inf."""
        e = np.asarray(e, dtype=float)
        if math.isinf(self.beta):
            out = np.where(e < self.mu, 1.0, np.where(e > self.mu, 0.0, 0.5))
        else:
            # clip the exponent so extreme tails underflow instead of overflow
            arg = np.clip(self.beta * (e - self.mu), -700.0, 700.0)
            out = 1.0 / (1.0 + np.exp(arg))
        return out if out.ndim else float(out)

    def band_support(self):
        """Energy interval where the occupation weight is nonzero."""
        if math.isinf(self.beta):
            hi = min(max(self.mu, lattice.BAND_MIN), lattice.BAND_MAX)
            return lattice.BAND_MIN, hi
        return lattice.BAND_MIN, lattice.BAND_MAX


def equilibrium_density(state: ReservoirState, tol=1e-9) -> float:
    """Particles per site of an isolated reservoir in equilibrium."""
    lo, hi = state.band_support()
    if hi <= lo:
        return 0.0

    def integrand(e):
        return state.fermi_weight(e) * green.shell_density(e, (0, 0))

    val, _ = integrate_adaptive(integrand, lo, hi,
                                singular_points=lattice.BAND_SINGULAR_POINTS,
                                tol=tol)
    return float(val)


def _pair_disps(contacts):
    return [(a[0] - b[0], a[1] - b[1]) for a in contacts for b in contacts]


def shell_matrix(contacts, e):
    """Real symmetric matrix P(e) restricted to a contact set."""
    n = len(contacts)
    vals = green.default_table().density_at(e, _pair_disps(contacts))
    return vals.reshape(n, n)


@dataclass(frozen=True)
class InterferenceKernels:
    """Contact-space kernels controlling the fields at one energy.

    m_tr drives the density and current of electrons transmitted from
    reservoir 1; m_ref and the Q^(2,2) block drive the reflected channel.
    Both are Hermitian positive semidefinite.
    """

    energy: float
    junction: Junction
    q_plus: np.ndarray
    m_tr: np.ndarray
    m_ref: np.ndarray

    @cached_property
    def q22_plus(self):
        n1 = self.junction.n1
        return self.q_plus[n1:, n1:]

    def v_minus(self, x):
        """Vector of g_-(e; x - s) over the reservoir-2 contacts."""
        disps = [(x[0] - s[0], x[1] - s[1]) for s in self.junction.contacts2]
        return green.default_table().boundary_minus(self.energy, disps)

    def v_zero(self, x):
        """Vector of P(e)_{x,s} over the reservoir-2 contacts (real)."""
        disps = [(x[0] - s[0], x[1] - s[1]) for s in self.junction.contacts2]
        return green.default_table().density_at(self.energy, disps)


def table_q_plus(junction: Junction, e: float) -> np.ndarray:
    """Upper boundary value of Q(e) from the shared band-grid table.

    Much faster than `q_matrix` (no adaptive quadrature per matrix
    element) and consistent with every other table-based quantity, which
    is what makes the energy-integrated conservation identities exact at
    the quadrature level.
    """
    n1, n2 = junction.n1, len(junction.contacts2)
    g1m = green.default_table().boundary_minus(e, _pair_disps(junction.contacts1))
    g2m = green.default_table().boundary_minus(e, _pair_disps(junction.contacts2))
    r_plus = np.zeros((n1 + n2, n1 + n2), dtype=complex)
    r_plus[:n1, :n1] = g1m.conj().reshape(n1, n1)
    r_plus[n1:, n1:] = g2m.conj().reshape(n2, n2)
    v = junction.v_matrix()
    m = v + v @ r_plus @ v
    basis = junction.coupling_basis()
    if basis.shape[1] == 0:
        return np.zeros_like(m)
    m_red = basis.T @ m @ basis
    return v @ basis @ np.linalg.solve(m_red, basis.T) @ v


def kernels(junction: Junction, e: float,
            method: str = "table") -> InterferenceKernels:
    """Assemble the interference kernels at one band energy.

    `method="table"` draws everything from the shared band-grid table;
    `method="adaptive"` recomputes the junction resolvent by adaptive
    quadrature (slower, useful for cross-validation).
    """
    if method == "table":
        q_plus = table_q_plus(junction, e)
    elif method == "adaptive":
        q_plus = q_matrix(junction, e, +1).matrix
    else:
        raise DomainError(f"unknown kernel method {method!r}")
    # real couplings make Q symmetric, so the lower boundary value is the
    # plain complex conjugate
    q_minus = q_plus.conj()
    n1 = junction.n1
    p1 = shell_matrix(junction.contacts1, e)
    p2 = shell_matrix(junction.contacts2, e)
    m_tr = q_plus[n1:, :n1] @ p1 @ q_minus[:n1, n1:]
    m_ref = q_plus[n1:, n1:] @ p2 @ q_minus[n1:, n1:]
    return InterferenceKernels(e, junction, q_plus, m_tr, m_ref)


def delta_transmitted(kern: InterferenceKernels, x) -> float:
    """Density per energy at site x of reservoir 2, transmitted channel."""
    vm = kern.v_minus(x)
    return float(np.real(vm.conj() @ kern.m_tr @ vm))


def delta_reflected(kern: InterferenceKernels, x) -> float:
    """Density per energy at site x of reservoir 2, reflected channel."""
    vm = kern.v_minus(x)
    v0 = kern.v_zero(x)
    p00 = green.shell_density(kern.energy, (0, 0))
    cross = np.real(vm.conj() @ kern.q22_plus @ v0)
    return float(p00 - 2.0 * cross + np.real(vm.conj() @ kern.m_ref @ vm))


def _require_bond(x, y):
    if abs(x[0] - y[0]) + abs(x[1] - y[1]) != 1:
        raise DomainError(f"sites {x} and {y} are not nearest neighbors")


def bond_current_spectral(kern: InterferenceKernels, x, y, channel) -> float:
    """Current per energy along the oriented lattice bond (x, y).

    Positive values mean net particle flow from x to y.
    """
    _require_bond(x, y)
    vmx = kern.v_minus(x)
    vmy = kern.v_minus(y)
    if channel == "transmitted":
        return float(-np.imag(vmx.conj() @ kern.m_tr @ vmy))
    if channel == "reflected":
        # antisymmetrized cross term: required for the lattice continuity
        # equation to hold for the reflected field
        v0x = kern.v_zero(x)
        v0y = kern.v_zero(y)
        return float(np.imag(vmx.conj() @ kern.q22_plus @ v0y)
                     - np.imag(vmy.conj() @ kern.q22_plus @ v0x)
                     - np.imag(vmx.conj() @ kern.m_ref @ vmy))
    if channel == "total":
        return (bond_current_spectral(kern, x, y, "transmitted")
                + bond_current_spectral(kern, x, y, "reflected"))
    raise DomainError(f"unknown current channel {channel!r}")


def _channel_integral(junction, state, evaluate, tol):
    lo, hi = state.band_support()
    if hi <= lo:
        return 0.0
    singular = tuple(s for s in lattice.BAND_SINGULAR_POINTS if lo < s < hi)

    def integrand(e):
        return state.fermi_weight(e) * evaluate(kernels(junction, e))

    val, _ = integrate_adaptive(integrand, lo, hi, singular_points=singular,
                                tol=tol)
    return float(val)


def density_ac(junction, states, x, tol=1e-7):
    """Energy-integrated (transmitted, reflected) densities at site x."""
    if not junction.v_matrix().any():
        return 0.0, equilibrium_density(states[1])
    tr = _channel_integral(junction, states[0],
                           lambda k: delta_transmitted(k, x), tol)
    ref = _channel_integral(junction, states[1],
                            lambda k: delta_reflected(k, x), tol)
    return tr, ref


def bond_current(junction, states, x, y, tol=1e-7):
    """Stationary current along the lattice bond (x, y), both channels."""
    if not junction.v_matrix().any():
        return 0.0
    tr = _channel_integral(
        junction, states[0],
        lambda k: bond_current_spectral(k, x, y, "transmitted"), tol)
    ref = _channel_integral(
        junction, states[1],
        lambda k: bond_current_spectral(k, x, y, "reflected"), tol)
    return tr + ref


def spectral_total_current(junction, e) -> float:
    """Transmission trace j(e); its integral over the bias window is J."""
    if not junction.v_matrix().any():
        return 0.0
    kern = kernels(junction, e)
    p2 = shell_matrix(junction.contacts2, e)
    return float(2.0 * math.pi * np.real(np.trace(kern.m_tr @ p2)))


def total_current(junction, states, tol=1e-8) -> float:
    """Net particle current from reservoir 1 in the stationary state."""
    if not junction.v_matrix().any():
        return 0.0
    s1, s2 = states
    if math.isinf(s1.beta) and math.isinf(s2.beta):
        lo, hi = sorted((min(max(s.mu, lattice.BAND_MIN), lattice.BAND_MAX)
                         for s in states))
        sign = 1.0 if s1.mu >= s2.mu else -1.0
        if hi - lo == 0.0:
            return 0.0
        weight = lambda e: sign
    else:
        lo, hi = lattice.BAND_MIN, lattice.BAND_MAX
        weight = lambda e: s1.fermi_weight(e) - s2.fermi_weight(e)
    singular = tuple(s for s in lattice.BAND_SINGULAR_POINTS if lo < s < hi)
    val, _ = integrate_adaptive(
        lambda e: weight(e) * spectral_total_current(junction, e),
        lo, hi, singular_points=singular, tol=tol)
    return float(val)


def _boundary_matrix(contacts, e, side):
    n = len(contacts)
    g = green.default_table().boundary_minus(e, _pair_disps(contacts))
    g = g.reshape(n, n)
    return g.conj() if side > 0 else g


def junction_current_spectral(junction, e):
    """Per-energy currents along the junction bonds, split by channel.

    Returns two |S1| x |S2| real arrays (transmitted, reflected); entry
    (i, j) is the current from contact i of reservoir 1 to contact j of
    reservoir 2, per unit of the corresponding reservoir's occupation.
    """
    q_plus = table_q_plus(junction, e)
    q_minus = q_plus.conj()
    n1 = junction.n1
    p1 = shell_matrix(junction.contacts1, e)
    p2 = shell_matrix(junction.contacts2, e)
    g1p = _boundary_matrix(junction.contacts1, e, +1)
    g2m = _boundary_matrix(junction.contacts2, e, -1)
    q12m = q_minus[:n1, n1:]
    q11p = q_plus[:n1, :n1]
    q12p = q_plus[:n1, n1:]
    q22m = q_minus[n1:, n1:]
    term_tr = -p1 @ q12m @ g2m + g1p @ q11p @ p1 @ q12m @ g2m
    term_ref = -g1p @ q12p @ p2 + g1p @ q12p @ p2 @ q22m @ g2m
    amps = junction.amplitudes
    return (2.0 * amps * term_tr.imag, 2.0 * amps * term_ref.imag)


def junction_bond_current(junction, states, tol=1e-7):
    """Energy-integrated currents along the junction bonds (|S1| x |S2|)."""
    shape = junction.amplitudes.shape
    if not junction.v_matrix().any():
        return np.zeros(shape)
    total = np.zeros(shape)
    for channel, state in (("transmitted", states[0]), ("reflected", states[1])):
        lo, hi = state.band_support()
        if hi <= lo:
            continue
        idx = 0 if channel == "transmitted" else 1
        singular = tuple(s for s in lattice.BAND_SINGULAR_POINTS if lo < s < hi)
        for i in range(shape[0]):
            for j in range(shape[1]):
                if junction.amplitudes[i, j] == 0.0:
                    continue
                val, _ = integrate_adaptive(
                    lambda e: float(state.fermi_weight(e)
                                    * junction_current_spectral(junction, e)[idx][i, j]),
                    lo, hi, singular_points=singular, tol=tol)
                total[i, j] += val
    return total


def total_current_bondwise(junction, states, tol=1e-7) -> float:
    """Total current as the sum of all junction bond currents.

    Independent of `total_current`: it integrates the bondwise formula
    (which involves the boundary resolvents on the contacts) rather than
    the transmission trace.
    """
    shape = junction.amplitudes.shape
    if not junction.v_matrix().any():
        return 0.0
    total = 0.0
    for channel, state in (("transmitted", states[0]), ("reflected", states[1])):
        lo, hi = state.band_support()
        if hi <= lo:
            continue
        idx = 0 if channel == "transmitted" else 1
        singular = tuple(s for s in lattice.BAND_SINGULAR_POINTS if lo < s < hi)
        val, _ = integrate_adaptive(
            lambda e: float(state.fermi_weight(e)
                            * junction_current_spectral(junction, e)[idx].sum()),
            lo, hi, singular_points=singular, tol=tol)
        total += val
    return float(total)


def density_point(junction, states, x, bound_states=None, tol=1e-9) -> float:
    """Bound-state contribution to the density at site x of reservoir 2."""
    from . import scattering
    if bound_states is None:
        bound_states = scattering.find_bound_states(junction)
    total = 0.0
    for b in bound_states:
        fx = b.amplitude(x, 2)
        if fx == 0.0:
            continue
        weight = scattering.occupation_weight(b, states, tol=tol)
        total += (fx * fx) * weight / b.norm_squared ** 2
    return float(total)
