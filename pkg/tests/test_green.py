import math

import numpy as np
import pytest

from tunnel2d import green, lattice
from tunnel2d.errors import DomainError


# ---------------------------------------------------------------------------
# shell density P(e)_{0,x}

def test_shell_density_square_symmetry():
    for e in (0.3, 1.4, 2.7):
        ref = green.shell_density(e, (3, 1))
        for x in [(1, 3), (-3, 1), (3, -1), (-1, -3)]:
            assert green.shell_density(e, x) == pytest.approx(ref, rel=1e-12)


def test_shell_density_particle_hole_sign():
    for (m, n) in [(0, 0), (1, 0), (2, 1)]:
        a = green.shell_density(1.3, (m, n))
        b = green.shell_density(4.0 - 1.3, (m, n))
        assert b == pytest.approx((-1.0) ** (m + n) * a, rel=1e-10)


def test_shell_density_rows_match_scalar():
    disps = [(0, 0), (1, 0), (2, 2), (7, 3)]
    for e in (0.45, 1.95, 1.9995, 3.2):
        rows = green.shell_density_rows(e, disps)
        for d, v in zip(disps, rows):
            assert v == pytest.approx(green.shell_density(e, d),
                                      rel=1e-9, abs=1e-12)


def test_shell_density_rejects_band_center_and_exterior():
    for e in (0.0, 2.0, 4.0, -0.5, 4.5):
        with pytest.raises(DomainError):
            green.shell_density(e, (0, 0))


def test_density_of_states_normalization_on_table():
    table = green.default_table()
    disps = [(0, 0), (1, 0), (1, 1), (2, 0)]
    ints = table.rows(disps) @ table.grid.weights
    assert ints[0] == pytest.approx(1.0, abs=1e-9)
    for v in ints[1:]:
        assert abs(v) < 1e-9


def test_first_moment_equals_lattice_hamiltonian():
    # int e P(e)_{0,x} de = (h0)_{0,x}: 2 on the diagonal, -1/2... the
    # hopping matrix element is -1/2 per neighbor pair in this normalization
    table = green.default_table()
    disps = [(0, 0), (1, 0), (1, 1)]
    m1 = (table.rows(disps) * table.grid.nodes) @ table.grid.weights
    assert m1[0] == pytest.approx(2.0, abs=1e-9)
    assert m1[1] == pytest.approx(-0.5, abs=1e-9)
    assert m1[2] == pytest.approx(0.0, abs=1e-9)


# ---------------------------------------------------------------------------
# boundary values g_{+/-}(e; x)

def test_boundary_imaginary_part_is_pi_density():
    for e in (0.3, 1.4, 3.0):
        for x in [(0, 0), (2, 1)]:
            g = green.green_boundary(e, +1, x)
            assert g.imag == pytest.approx(
                math.pi * green.shell_density(e, x), abs=1e-10)


def test_boundary_sides_are_conjugate():
    g_plus = green.green_boundary(0.9, +1, (1, 1))
    g_minus = green.green_boundary(0.9, -1, (1, 1))
    assert g_minus == pytest.approx(np.conj(g_plus), abs=1e-12)


def test_boundary_square_symmetry():
    ref = green.green_boundary(1.1, +1, (2, 1))
    for x in [(1, 2), (-2, 1), (-1, -2)]:
        assert green.green_boundary(1.1, +1, x) == pytest.approx(ref,
                                                                 abs=1e-10)


def test_boundary_particle_hole_relation():
    for (m, n) in [(0, 0), (1, 0), (1, 1)]:
        a = green.green_boundary(0.7, +1, (m, n))
        b = green.green_boundary(4.0 - 0.7, -1, (m, n))
        assert b == pytest.approx(-((-1.0) ** (m + n)) * a, abs=1e-9)


def test_boundary_matches_bessel_route_samples():
    for e, x in [(0.3, (0, 0)), (0.9, (2, 1)), (1.4, (5, 5))]:
        pv = green.green_boundary(e, +1, x)
        bessel = green.green_boundary_bessel(e, x)
        assert abs(pv - bessel) < 1e-7


def test_table_boundary_minus_matches_scalar():
    table = green.default_table()
    disps = [(0, 0), (1, 0), (4, 2), (20, 0)]
    for e in (0.3, 1.4, 1.999, 3.5):
        vals = table.boundary_minus(e, disps)
        for d, v in zip(disps, vals):
            ref = green.green_boundary(e, -1, d)
            assert abs(v - ref) < 1e-7


# ---------------------------------------------------------------------------
# off-band resolvent g(z; x)

def test_offband_large_z_decay():
    # g(z; 0) = int P(t)/(t - z) dt ~ -1/(z - 2) far from the band
    z = 60.0
    val = green.green_offband(z, (0, 0))
    assert val == pytest.approx(-1.0 / (z - 2.0), rel=1e-2)


def test_offband_real_below_band_is_real_and_positive():
    val = green.green_offband(-0.5, (0, 0))
    assert abs(np.imag(val)) < 1e-12
    assert np.real(val) > 0.0


def test_offband_table_matches_adaptive():
    table = green.default_table()
    disps = [(0, 0), (1, 0), (3, 2)]
    for z in (-0.3, 4.7, 2.0 + 1.5j):
        vals = table.offband(z, disps)
        for d, v in zip(disps, vals):
            assert abs(v - green.green_offband(z, d)) < 1e-7


def test_offband_rejects_in_band_real_argument():
    with pytest.raises(DomainError):
        green.green_offband(1.0, (0, 0))
