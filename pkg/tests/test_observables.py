import math

import numpy as np
import pytest
from scipy import integrate

from tunnel2d import green
from tunnel2d.observables import (InterferenceKernels, ReservoirState,
                                  bond_current_spectral, delta_reflected,
                                  delta_transmitted, density_ac,
                                  density_point, equilibrium_density,
                                  junction_current_spectral, kernels,
                                  spectral_total_current, total_current,
                                  total_current_bondwise)
from tunnel2d.scattering import Junction, find_bound_states

PAPER_JUNCTION = Junction.paired([((0, 0), (0, 0), 1.0),
                                  ((1, 0), (20, 0), 1.0)])
PAPER_STATES = (ReservoirState(math.inf, 1.4), ReservoirState(math.inf, 0.3))


def bz_area_density(mu):
    """Independent oracle: filled-sea area fraction of the Brillouin zone.

    For the dispersion 2 - cos k1 - cos k2 the filled region at chemical
    potential mu reduces to a one-dimensional integral of arccos.
    """
    def measure(k1):
        c = 2.0 - mu - math.cos(k1)
        if c >= 1.0:
            return 0.0
        if c <= -1.0:
            return 2.0 * math.pi
        return 2.0 * math.acos(c)

    val, _ = integrate.quad(measure, -math.pi, math.pi, limit=200,
                            epsabs=1e-12)
    return val / (2.0 * math.pi) ** 2


def test_fermi_weight_zero_temperature_step():
    s = ReservoirState(math.inf, 1.0)
    assert s.fermi_weight(0.5) == 1.0
    assert s.fermi_weight(1.5) == 0.0
    assert s.fermi_weight(1.0) == 0.5
    assert s.band_support() == (0.0, 1.0)


def test_fermi_weight_finite_temperature():
    s = ReservoirState(10.0, 1.0)
    assert s.fermi_weight(1.0) == pytest.approx(0.5)
    assert s.fermi_weight(0.0) + s.fermi_weight(2.0) == pytest.approx(1.0)
    assert s.band_support() == (0.0, 4.0)


@pytest.mark.parametrize("mu", [0.3, 1.4, 2.6])
def test_equilibrium_density_against_area_oracle(mu):
    val = equilibrium_density(ReservoirState(math.inf, mu))
    assert val == pytest.approx(bz_area_density(mu), abs=1e-8)


def test_equilibrium_density_full_and_empty_band():
    assert equilibrium_density(ReservoirState(math.inf, 0.0)) == 0.0
    assert equilibrium_density(ReservoirState(math.inf, 4.0)) == (
        pytest.approx(1.0, abs=1e-9))


def test_kernel_routes_agree():
    for e in (0.3, 1.4):
        kt = kernels(PAPER_JUNCTION, e, method="table")
        ka = kernels(PAPER_JUNCTION, e, method="adaptive")
        assert np.max(np.abs(kt.q_plus - ka.q_plus)) < 1e-8
        assert np.max(np.abs(kt.m_tr - ka.m_tr)) < 1e-8


def test_interference_kernels_positive():
    k = kernels(PAPER_JUNCTION, 0.3)
    for m in (k.m_tr, k.m_ref):
        assert np.max(np.abs(m - m.conj().T)) < 1e-12
        assert np.all(np.linalg.eigvalsh(m) > -1e-14)
    assert delta_transmitted(k, (4, 7)) > 0.0
    assert delta_reflected(k, (4, 7)) > 0.0


def test_spectral_bond_current_antisymmetry_and_conservation():
    k = kernels(PAPER_JUNCTION, 0.7)
    x, y = (3, 2), (3, 3)
    for channel in ("transmitted", "reflected", "total"):
        a = bond_current_spectral(k, x, y, channel)
        b = bond_current_spectral(k, y, x, channel)
        assert a == pytest.approx(-b, abs=1e-15)
    # continuity at a non-contact site: net outflow vanishes per channel
    for channel in ("transmitted", "reflected"):
        site = (5, -4)
        flux = sum(
            bond_current_spectral(k, site, (site[0] + dx, site[1] + dy),
                                  channel)
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)))
        assert abs(flux) < 1e-10


def test_spectral_conservation_at_contact_with_junction_bond():
    # at a reservoir-2 contact the lattice outflow equals the junction inflow
    e = 0.7
    k = kernels(PAPER_JUNCTION, e)
    j_tr, j_ref = junction_current_spectral(PAPER_JUNCTION, e)
    site = (0, 0)  # first reservoir-2 contact
    for channel, inflow in (("transmitted", j_tr[:, 0].sum()),
                            ("reflected", j_ref[:, 0].sum())):
        out = sum(
            bond_current_spectral(k, site, (site[0] + dx, site[1] + dy),
                                  channel)
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)))
        assert out == pytest.approx(inflow, abs=1e-10)


def test_total_current_routes_agree():
    J = total_current(PAPER_JUNCTION, PAPER_STATES)
    Jb = total_current_bondwise(PAPER_JUNCTION, PAPER_STATES)
    assert J == pytest.approx(Jb, abs=1e-6)
    assert 0.0 < J < 1.0


def test_total_current_sign_and_equilibrium():
    J = total_current(PAPER_JUNCTION, PAPER_STATES)
    swapped = (PAPER_STATES[1], PAPER_STATES[0])
    assert total_current(PAPER_JUNCTION, swapped) == pytest.approx(-J,
                                                                   abs=1e-9)
    equal = (PAPER_STATES[1], PAPER_STATES[1])
    assert total_current(PAPER_JUNCTION, equal) == 0.0


def test_trivial_junction_observables():
    j = Junction.paired([((0, 0), (0, 0), 0.0)])
    assert total_current(j, PAPER_STATES) == 0.0
    tr, ref = density_ac(j, PAPER_STATES, (2, 2))
    assert tr == 0.0
    assert ref == pytest.approx(
        equilibrium_density(PAPER_STATES[1]), abs=1e-9)


def test_completeness_at_full_filling():
    # with both reservoirs completely filled the stationary density is one
    # particle per site: transmitted + reflected + bound-state channels
    full = (ReservoirState(math.inf, 4.0), ReservoirState(math.inf, 4.0))
    bound = find_bound_states(PAPER_JUNCTION)
    for x in [(3, 2), (0, 0)]:
        tr, ref = density_ac(PAPER_JUNCTION, full, x, tol=1e-8)
        pt = density_point(PAPER_JUNCTION, full, x, bound_states=bound)
        assert tr + ref + pt == pytest.approx(1.0, abs=1e-6)


def test_single_contact_transmission_closed_form():
    # with one coupled pair, j(e) collapses to a scalar formula in g and P
    j1 = Junction.paired([((1, 0), (20, 0), 1.0)])
    for e in (0.5, 1.2):
        g1 = green.green_boundary(e, +1, (0, 0))
        p0 = green.shell_density(e, (0, 0))
        q21 = -1.0 / (g1 * g1 - 1.0)
        expected = 2.0 * math.pi * abs(q21) ** 2 * p0 * p0
        assert spectral_total_current(j1, e) == pytest.approx(expected,
                                                              rel=1e-8)
