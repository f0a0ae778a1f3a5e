import math

import numpy as np
import pytest

from tunnel2d.quadrature import (gauss_panels, graded_breakpoints,
                                 integrate_adaptive, principal_value)


def test_adaptive_smooth_integral():
    val, err = integrate_adaptive(np.sin, 0.0, math.pi)
    assert val == pytest.approx(2.0, abs=1e-10)


def test_adaptive_log_endpoint_singularity():
    val, _ = integrate_adaptive(lambda x: math.log(x), 0.0, 1.0,
                                singular_points=(0.0,))
    assert val == pytest.approx(-1.0, abs=1e-8)


def test_adaptive_interior_kink():
    val, _ = integrate_adaptive(lambda x: abs(x - 0.3), 0.0, 1.0,
                                singular_points=(0.3,))
    exact = 0.3 ** 2 / 2 + 0.7 ** 2 / 2
    assert val == pytest.approx(exact, abs=1e-10)


def test_principal_value_log_kernel():
    # PV int_0^2 dx / (x - 1) = 0 by symmetry
    val = principal_value(lambda x: 1.0, 1.0, 0.0, 2.0)
    assert val == pytest.approx(0.0, abs=1e-9)


def test_principal_value_linear_numerator():
    # PV int_0^2 x/(x-1) dx = 2
    val = principal_value(lambda x: x, 1.0, 0.0, 2.0)
    assert val == pytest.approx(2.0, abs=1e-8)


def test_gauss_panels_polynomial_exactness():
    bp = np.array([0.0, 0.4, 1.0, 2.0])
    x, w = gauss_panels(bp, 6)
    # 6-point Gauss is exact through degree 11 on each panel
    for p in range(12):
        assert w @ x ** p == pytest.approx(2.0 ** (p + 1) / (p + 1), rel=1e-13)


def test_graded_breakpoints_structure():
    bp = graded_breakpoints(0.0, 1.0, refine_at=(0.0,), base_width=0.25,
                            levels=10)
    assert bp[0] == 0.0 and bp[-1] == 1.0
    assert np.all(np.diff(bp) > 0)
    # smallest panel adjacent to the refined endpoint
    assert bp[1] == pytest.approx(0.25 * 2.0 ** -10)
