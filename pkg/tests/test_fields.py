import math

import numpy as np
import pytest

from tunnel2d.errors import DomainError
from tunnel2d.fields import (CurrentField, FieldEngine, Window,
                             energy_breakpoints, equilibrium_reference,
                             far_field_density)
from tunnel2d.observables import (ReservoirState, delta_transmitted,
                                  equilibrium_density, kernels,
                                  total_current)
from tunnel2d.scattering import Junction

PAPER_JUNCTION = Junction.paired([((0, 0), (0, 0), 1.0),
                                  ((1, 0), (20, 0), 1.0)])
PAPER_STATES = (ReservoirState(math.inf, 1.4), ReservoirState(math.inf, 0.3))


@pytest.fixture(scope="module")
def engine():
    return FieldEngine(PAPER_JUNCTION, PAPER_STATES,
                       window=Window(-3, 24, -5, 5))


def test_window_geometry():
    w = Window(0, 3, 0, 3)
    sites = w.sites()
    assert sites.shape == (16, 2)
    assert [tuple(s) for s in sites] == sorted(tuple(s) for s in sites)
    bonds = w.bonds()
    # n x m grid has n(m-1) + m(n-1) undirected bonds
    assert len(bonds) == 2 * 4 * 3
    for x1, x2, y1, y2 in bonds:
        assert (x1, x2) < (y1, y2)
        assert abs(x1 - y1) + abs(x2 - y2) == 1


def test_window_around_contacts():
    w = Window.around(((0, 0), (20, 0)), size=40)
    assert (w.x1_min, w.x1_max, w.x2_min, w.x2_max) == (-9, 30, -19, 20)
    assert len(w.sites()) == 1600


def test_empty_window_rejected():
    with pytest.raises(DomainError):
        Window(2, 1, 0, 0)


def test_energy_breakpoints_cover_interval():
    bp = energy_breakpoints(0.0, 1.4, radius=30.0)
    assert bp[0] == 0.0 and bp[-1] == pytest.approx(1.4)
    assert np.all(np.diff(bp) > 0)


def test_spectral_density_field_matches_pointwise(engine):
    e = 0.3
    f = engine.density_spectral_field("transmitted", e)
    k = kernels(PAPER_JUNCTION, e)
    for x in [(-3, -5), (0, 0), (5, 3)]:
        assert f.at(x) == pytest.approx(delta_transmitted(k, x), abs=1e-10)


def test_current_field_antisymmetric_lookup(engine):
    f = engine.current_field("transmitted")
    a = f.bond_value((0, 0), (1, 0))
    b = f.bond_value((1, 0), (0, 0))
    assert a == -b  # exact, by orientation convention


def test_current_conservation_on_window(engine):
    cur = engine.current_field("total")
    bound = 1e-6 * np.max(np.abs(cur.values))
    w = engine.window
    for x1 in range(w.x1_min + 1, w.x1_max):
        for x2 in range(w.x2_min + 1, w.x2_max):
            assert abs(cur.divergence((x1, x2))) < bound


def test_contour_flux_equals_total_current(engine):
    cur = engine.current_field("total")
    J = engine.total_current()
    for margin in (1, 2):
        assert engine.contour_flux(cur, margin) == pytest.approx(J,
                                                                 abs=1e-7)


def test_contour_must_fit_window(engine):
    cur = engine.current_field("total")
    with pytest.raises(DomainError):
        engine.contour_flux(cur, 40)


def test_engine_total_current_matches_adaptive_route(engine):
    J_engine = engine.total_current()
    J_adaptive = total_current(PAPER_JUNCTION, PAPER_STATES)
    assert J_engine == pytest.approx(J_adaptive, abs=1e-6)


def test_density_field_total_includes_all_channels(engine):
    tr = engine.density_field("transmitted")
    ref = engine.density_field("reflected")
    pt = engine.density_field("point")
    tot = engine.density_field("total")
    assert np.allclose(tot.values, tr.values + ref.values + pt.values,
                       atol=1e-12)
    assert np.all(tot.values > 0.0)


def test_unknown_channel_rejected(engine):
    with pytest.raises(DomainError):
        engine.density_field("sideways")
    with pytest.raises(DomainError):
        engine.current_field("sideways")


def test_far_field_reference():
    assert equilibrium_reference(PAPER_STATES) == pytest.approx(
        equilibrium_density(PAPER_STATES[1]))
    val = far_field_density(PAPER_JUNCTION, PAPER_STATES, (-60, 0),
                            tol=1e-6)
    assert val == pytest.approx(equilibrium_reference(PAPER_STATES),
                                abs=2e-3)
