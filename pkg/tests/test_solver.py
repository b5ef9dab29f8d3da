import math

import numpy as np
import pytest

from forchheimer.boundary import ConstantFlux, FunctionFlux, PiecewiseLinearFlux
from forchheimer.constitutive import ForchheimerLaw
from forchheimer.errors import ParameterError, SolverFailure
from forchheimer.mesh import DiscreteField, Grid, lp_norm
from forchheimer.solver import ProblemSetup, SolverConfig, run, step

DRAG = ForchheimerLaw((0.0, 1.0), (1.0, 1.0))
DARCY = ForchheimerLaw((0.0,), (1.0,))


def bump(g):
    return DiscreteField.from_function(
        g, lambda x, y: 1.0 + np.sin(np.pi * x) ** 2 * np.sin(np.pi * y) ** 2)


def test_setup_validation():
    g = Grid((1.0,), (4,))
    with pytest.raises(ParameterError):
        ProblemSetup(DRAG, 1.0, g, DiscreteField(g, -np.ones(4)), 1.0)
    with pytest.raises(ParameterError):
        ProblemSetup(DRAG, 0.0, g, DiscreteField(g, np.ones(4)), 1.0)
    with pytest.raises(ParameterError):
        SolverConfig(dt_initial=1.0, dt_max=0.1)


def test_steady_state_is_exact():
    g = Grid((1.0, 1.0), (8, 8))
    rec = run(ProblemSetup(DRAG, 0.7, g, DiscreteField(g, np.full(g.shape, 1.5)), 0.2, ConstantFlux(0.0)))
    assert np.all(rec.trace.values == 1.5)


def test_single_step_matches_run():
    g = Grid((1.0, 1.0), (8, 8))
    setup = ProblemSetup(DRAG, 1.0, g, bump(g), 0.01, ConstantFlux(0.2))
    one = step(setup.u0, 0.0, 0.01, setup, SolverConfig())
    rec = run(setup, SolverConfig(dt_initial=0.01, dt_max=0.01, snapshot_times=(0.01,)))
    assert np.allclose(one.values, rec.trace.values[-1], rtol=0, atol=1e-12)


def test_symmetry_preserved():
    g = Grid((1.0, 1.0), (12, 12))
    rec = run(ProblemSetup(DRAG, 0.5, g, bump(g), 0.05, ConstantFlux(0.5)))
    u = rec.trace.values[-1]
    assert np.allclose(u, u.T, atol=1e-13) and np.allclose(u, u[::-1], atol=1e-13)


@pytest.mark.parametrize("phi", [ConstantFlux(0.5), ConstantFlux(-0.3),
                                 PiecewiseLinearFlux((0.0, 0.05, 0.1), (0.0, -0.4, 0.3))])
def test_mass_ledger(phi):
    g = Grid((1.0, 1.0), (12, 12))
    rec = run(ProblemSetup(DRAG, 0.75, g, bump(g), 0.1, phi), SolverConfig(picard_tol=1e-13))
    ledger = np.array([d.ledger_residual for d in rec.steps])
    assert np.max(np.abs(ledger)) <= 1e-9 * rec.initial_mass
    # total change equals net boundary transport
    m_end = rec.steps[-1].mass
    assert m_end - rec.initial_mass == pytest.approx(-sum(d.flux for d in rec.steps), abs=1e-9)


def test_inflow_raises_mass_outflow_lowers_it():
    g = Grid((1.0, 1.0), (8, 8))
    up = run(ProblemSetup(DRAG, 1.0, g, bump(g), 0.1, ConstantFlux(-0.5)))
    down = run(ProblemSetup(DRAG, 1.0, g, bump(g), 0.1, ConstantFlux(0.5)))
    m = lambda r: [lp_norm(f, 1.0) for f in r.trace.fields()]
    assert np.all(np.diff(m(up)) > 0) and np.all(np.diff(m(down)) < 0)


def test_snapshots_on_requested_times():
    g = Grid((1.0,), (16,))
    times = (0.0, 0.013, 0.05, 0.1)
    rec = run(ProblemSetup(DRAG, 1.0, g, DiscreteField.from_function(g, lambda x: 1 + x), 0.1),
              SolverConfig(snapshot_times=times))
    assert tuple(rec.trace.times) == times
    with pytest.raises(ParameterError):
        run(ProblemSetup(DRAG, 1.0, g, DiscreteField(g, np.ones(16)), 0.1),
            SolverConfig(snapshot_times=(0.5,)))


def test_failure_path():
    g = Grid((1.0,), (16,))
    setup = ProblemSetup(DRAG, 0.5, g, DiscreteField.from_function(g, lambda x: 0.1 + 5 * np.sin(np.pi * x) ** 2),
                         0.1, ConstantFlux(1.0))
    with pytest.raises(SolverFailure) as exc:
        run(setup, SolverConfig(picard_tol=1e-30, picard_max_iters=3, dt_initial=1e-2,
                                dt_min=1e-2, dt_max=1e-2))
    assert "dt" in exc.value.diagnostics


def test_degenerate_zero_region_stays_nonnegative():
    g = Grid((1.0,), (40,))
    u0 = DiscreteField.from_function(g, lambda x: np.maximum(0.0, 0.25 - (x - 0.5) ** 2))
    rec = run(ProblemSetup(DRAG, 0.5, g, u0, 0.05, ConstantFlux(0.0)), SolverConfig(keep_steps=True))
    assert all(np.all(u >= 0) for _, u in rec.states)
    assert lp_norm(rec.trace.field(-1), 0.5) == pytest.approx(lp_norm(rec.trace.field(0), 0.5), rel=1e-8)


def _robin_mms_error(cells, dt, t_end=0.5):
    exact = lambda x, t: 2.0 + np.exp(-t) * np.cos(np.pi * x) + x
    g = Grid((1.0,), (cells,))
    # K = 1, u_x = 1 at both ends: phi u = 1 at x = 0 and phi u = -1 at x = 1
    phi = FunctionFlux(lambda p, t: np.where(p[:, 0] < 0.5, 1.0, -1.0) / exact(p[:, 0], t))
    src = lambda X, t: (np.pi ** 2 - 1.0) * np.exp(-t) * np.cos(np.pi * X[0])
    u0 = DiscreteField.from_function(g, lambda x: exact(x, 0.0))
    rec = run(ProblemSetup(DARCY, 1.0, g, u0, t_end, phi, src),
              SolverConfig(dt_initial=dt, dt_min=dt, dt_max=dt, snapshot_times=(t_end,)))
    return float(np.max(np.abs(rec.trace.values[-1] - exact(g.centers()[0], t_end))))


def test_robin_mms_spatial_order():
    e = [_robin_mms_error(n, 2e-4) for n in (8, 16, 32)]
    assert math.log2(e[0] / e[1]) > 1.6 and math.log2(e[1] / e[2]) > 1.6


def test_robin_mms_temporal_order():
    e = [_robin_mms_error(400, dt) for dt in (1 / 20, 1 / 40, 1 / 80)]
    assert math.log2(e[0] / e[1]) > 0.9 and math.log2(e[1] / e[2]) > 0.9


def test_adaptive_growth_and_cap():
    g = Grid((1.0,), (16,))
    rec = run(ProblemSetup(DRAG, 1.0, g, DiscreteField.from_function(g, lambda x: 1 + x), 1.0),
              SolverConfig(dt_initial=1e-3, dt_max=0.05))
    dts = [d.dt for d in rec.steps]
    assert max(dts) <= 0.05 + 1e-15 and max(dts) > 1e-2
