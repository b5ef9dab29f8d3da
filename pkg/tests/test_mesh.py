import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from forchheimer.errors import ParameterError
from forchheimer.mesh import (DiscreteField, Grid, SpaceTimeTrace, boundary_integral,
                              extrapolate_side, grad_norm, lp_norm, read_snapshot, write_snapshot)

SQ = Grid((1.0, 1.0), (16, 16))


def test_grid_geometry():
    g = Grid((2.0, 1.0), (4, 8))
    assert g.h == (0.5, 0.125) and g.cell_volume == 0.0625
    assert g.measure == 2.0 and g.boundary_measure == 6.0
    assert g.refine().cells == (8, 16)
    assert len(g.sides()) == 4
    assert g.side_points(0, 1).shape == (8, 2)
    assert np.all(g.side_points(0, 1)[:, 0] == 2.0)


def test_grid_validation():
    with pytest.raises(ParameterError):
        Grid((1.0,), (0,))
    with pytest.raises(ParameterError):
        Grid((1.0, -1.0), (4, 4))


def test_midpoint_oracle():
    n = 10
    g = Grid((1.0,), (n,))
    f = DiscreteField.from_function(g, lambda x: x)
    # midpoint rule for x^2 on [0,1]: 1/3 - h^2/12
    assert lp_norm(f, 2.0) == pytest.approx(1 / 3 - (1 / n) ** 2 / 12, rel=1e-14)


def test_boundary_integral_constant_and_linear():
    c = DiscreteField(SQ, np.full(SQ.shape, 2.0))
    assert boundary_integral(c, 3.0) == pytest.approx(8.0 * 4.0, rel=1e-14)
    lin = DiscreteField.from_function(SQ, lambda x, y: 1.0 + x + 2 * y)
    # exact on linear fields: face values are reproduced by the extrapolation
    exact = sum(
        np.mean(v) for v in (1 + 2 * SQ.side_points(0, 0)[:, 1], 2 + 2 * SQ.side_points(0, 1)[:, 1],
                             1 + SQ.side_points(1, 0)[:, 0], 3 + SQ.side_points(1, 1)[:, 0]))
    assert boundary_integral(lin, 1.0) == pytest.approx(exact, rel=1e-13)


def test_extrapolation_exact_for_linear():
    f = DiscreteField.from_function(SQ, lambda x, y: 3 * x - y)
    ys = SQ.side_points(0, 1)[:, 1]
    assert np.allclose(extrapolate_side(f.values, 0, 1), 3 - ys, atol=1e-14)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_grad_norm_linear_exact(p):
    f = DiscreteField.from_function(SQ, lambda x, y: 0.5 + 3 * x - 4 * y)
    assert grad_norm(f, p) == pytest.approx(5.0 ** p, rel=1e-12)


def test_grad_norm_quadratic_1d_second_order():
    errs = []
    for n in (16, 32, 64):
        g = Grid((1.0,), (n,))
        f = DiscreteField.from_function(g, lambda x: x ** 2)
        errs.append(abs(grad_norm(f, 2.0) - 4 / 3))
    assert math.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.1)
    assert math.log2(errs[1] / errs[2]) == pytest.approx(2.0, abs=0.1)


def test_grad_norm_converges_2d():
    errs = []
    for n in (16, 32, 64):
        g = Grid((1.0, 1.0), (n, n))
        f = DiscreteField.from_function(g, lambda x, y: np.sin(np.pi * x) * np.cos(np.pi * y))
        errs.append(abs(grad_norm(f, 2.0) - np.pi ** 2 / 2))
    assert math.log2(errs[1] / errs[2]) > 1.5


def test_weighted_floor_reported():
    f = DiscreteField.from_function(SQ, lambda x, y: x)
    val, floored = grad_norm(f, 2.0, weight_exponent=-0.5, report_floor=True)
    assert np.isfinite(val) and floored


def test_space_time_integral():
    times = np.linspace(0, 1, 5)
    vals = np.array([np.full(SQ.shape, 1.0 + t) for t in times])
    tr = SpaceTimeTrace(SQ, times, vals)
    assert tr.time_integral(lambda f: lp_norm(f, 1.0)) == pytest.approx(1.5)
    with pytest.raises(ParameterError):
        SpaceTimeTrace(SQ, times[::-1], vals)


@given(arrays(np.float64, (3, 5), elements=st.floats(-1e300, 1e300, allow_nan=False)),
       st.floats(0, 10))
def test_snapshot_round_trip(tmp_path_factory, values, t):
    g = Grid((0.3, 1.7), (3, 5))
    p = tmp_path_factory.mktemp("snap") / "s.csv"
    write_snapshot(p, DiscreteField(g, values, t))
    back = read_snapshot(p)
    assert back.grid == g and back.time == t
    assert np.array_equal(back.values, values)


def test_snapshot_1d(tmp_path):
    g = Grid((1.0,), (7,))
    f = DiscreteField.from_function(g, np.exp, 0.25)
    write_snapshot(tmp_path / "a.csv", f)
    assert np.array_equal(read_snapshot(tmp_path / "a.csv").values, f.values)
