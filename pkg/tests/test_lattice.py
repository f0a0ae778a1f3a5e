import math

import numpy as np
import pytest

from tunnel2d import lattice
from tunnel2d.errors import DomainError


def test_dispersion_band_limits():
    assert lattice.dispersion(0.0, 0.0) == 0.0
    assert lattice.dispersion(math.pi, math.pi) == 4.0
    assert lattice.dispersion(math.pi / 2, math.pi / 2) == pytest.approx(2.0)


def test_shell_radius_axis_closed_form():
    # along theta = 0 the shell condition reduces to 1 - cos K = e - ... with
    # k2 = 0: 2 - cos K - 1 = e, K = acos(2 - e - 1)
    for e in (0.1, 0.5, 1.0, 1.7):
        K = lattice.shell_radius(e, 0.0)
        assert lattice.dispersion(K, 0.0) == pytest.approx(e, abs=1e-12)
        assert K == pytest.approx(math.acos(1.0 - e), abs=1e-10)


def test_shell_radius_diagonal_closed_form():
    for e in (0.2, 1.0, 1.9):
        K = lattice.shell_radius(e, math.pi / 4)
        k = K / math.sqrt(2.0)
        assert 2.0 - 2.0 * math.cos(k) == pytest.approx(e, abs=1e-10)


def test_shell_radius_solves_dispersion_at_generic_angles():
    rng = np.random.default_rng(7)
    for _ in range(50):
        e = float(rng.uniform(0.05, 1.95))
        theta = float(rng.uniform(0.0, 2.0 * math.pi))
        K = lattice.shell_radius(e, theta)
        val = lattice.dispersion(K * math.cos(theta), K * math.sin(theta))
        assert val == pytest.approx(e, abs=1e-10)


def test_radial_slope_matches_finite_difference():
    for e, theta in [(0.7, 0.3), (1.3, 1.1), (0.2, 2.5)]:
        K = lattice.shell_radius(e, theta)
        h = 1e-6
        c, s = math.cos(theta), math.sin(theta)
        fd = (lattice.dispersion((K + h) * c, (K + h) * s)
              - lattice.dispersion((K - h) * c, (K - h) * s)) / (2.0 * h)
        assert lattice.radial_slope(K, theta) == pytest.approx(fd, rel=1e-6)


def test_shell_jacobian_grid_matches_scalar():
    thetas = np.linspace(0.0, 2.0 * math.pi, 17, endpoint=False)
    K, J = lattice.shell_jacobian_grid(0.9, thetas)
    for i, th in enumerate(thetas):
        assert J[i] == pytest.approx(lattice.shell_jacobian(0.9, float(th)),
                                     rel=1e-12)


def test_shell_radius_rejects_out_of_range_energy():
    with pytest.raises(DomainError):
        lattice.shell_radius(2.5, 0.0)
