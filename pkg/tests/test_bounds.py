import math

import numpy as np
import pytest

from forchheimer.boundary import ConstantFlux, PiecewiseLinearFlux, SinusoidalFlux
from forchheimer.bounds import (BoundReport, BoundsConfig, PhiTrace, admissible_T, check_gradient,
                                check_lalpha, check_linf_global, check_linf_interior, lalpha_bound)
from forchheimer.constitutive import ForchheimerLaw
from forchheimer.errors import ExponentConditionError, ParameterError
from forchheimer.exponents import build_schedule, build_table, derive_alpha, x_star
from forchheimer.mesh import DiscreteField, Grid
from forchheimer.solver import ProblemSetup, SolverConfig, run

DRAG = ForchheimerLaw((0.0, 1.0), (1.0, 1.0))
T = build_table(1.0, 0.5, 2)
D4 = derive_alpha(T, 4.0)


@pytest.fixture(scope="module")
def outflow_run():
    g = Grid((1.0, 1.0), (12, 12))
    u0 = DiscreteField.from_function(g, lambda x, y: 1 + 0.5 * np.sin(np.pi * x) ** 2 * np.sin(np.pi * y) ** 2)
    return run(ProblemSetup(DRAG, 1.0, g, u0, 0.08, ConstantFlux(0.5)),
               SolverConfig(snapshot_times=tuple(np.linspace(0, 0.08, 9))))


def test_phi_trace_integral_forms():
    assert PhiTrace(0.5).integral(2.0, 2.0) == pytest.approx(2.5)
    tr = PhiTrace((np.array([0.0, 1.0]), np.array([0.0, 1.0])))
    assert tr.integral(1.0, 1.0) == pytest.approx(1.5)
    assert PhiTrace(lambda t: t).integral(2.0, 3.0) == pytest.approx(3 + 9)


def test_envelope_initial_value_and_blow_up():
    assert lalpha_bound(D4, 2.0, 0.0, 0.0) == pytest.approx(3.0, rel=1e-14)
    T_star, T_half = admissible_T(D4, 0.0, 0.0, C3=1.0)
    assert T_star == pytest.approx(1.0, abs=1e-12)
    assert T_half == pytest.approx(1 - 2 ** -0.5, abs=1e-12)
    assert lalpha_bound(D4, 0.0, 0.0, T_star, C3=1.0) == math.inf
    assert lalpha_bound(D4, 0.0, 0.0, T_half, C3=1.0) == pytest.approx(2.0, rel=1e-9)


def test_default_C3_gives_known_horizon():
    # C3 = mu1/alpha = 1/2 so T_star = 2 (1+I0)^(-1/2); with I0 = 1 it is 2^(1/2)
    T_star, _ = admissible_T(D4, 1.0, 0.0)
    assert T_star == pytest.approx(2 ** 0.5, rel=1e-12)


def test_inflow_shortens_horizon():
    a = admissible_T(D4, 1.0, 0.0)[0]
    b = admissible_T(D4, 1.0, 0.8)[0]
    assert b < a


def test_report_verdicts():
    ok = BoundReport("x", 4.0, 1.0, math.log(2.0), {}, [("p", True)], "pass")
    bad = BoundReport("x", 4.0, 3.0, math.log(2.0), {}, [("p", True)], "pass")
    pre = BoundReport("x", 4.0, 1.0, math.log(2.0), {}, [("p", False)], "pass")
    ro = BoundReport("x", 4.0, 1.0, math.log(2.0), {}, [("p", True)])
    assert [r.verdict for r in (ok, bad, pre, ro)] == ["pass", "fail", "precondition-failed", "ratio-only"]
    assert ok.ratio == pytest.approx(0.5)
    row = ok.row()
    assert set(row) == {"bound_id", "alpha", "measured", "bound", "ratio", "verdict", "constants_json"}


def test_lalpha_pass_on_outflow(outflow_run):
    local, mixed = check_lalpha(outflow_run, 4.0)
    assert local.verdict == "pass" and local.ratio < 1
    assert mixed.verdict == "ratio-only" and mixed.measured > 0


def test_gradient_precondition(outflow_run):
    with pytest.raises(ExponentConditionError):
        check_gradient(outflow_run, 2.5)
    rep = check_gradient(outflow_run, 6.0)
    assert rep.verdict == "ratio-only" and 0 < rep.ratio < math.inf


def test_linf_checks(outflow_run):
    thr = max(2 - T.delta, (1 + x_star(T)) * T.alpha_star)
    s = build_schedule(T, 1.1 * thr, j_max=None)
    inner = check_linf_interior(outflow_run, s, 0.3, 0.5)
    assert inner.verdict == "ratio-only" and inner.ratio < 1
    with pytest.raises(ParameterError):
        check_linf_interior(outflow_run, s, 0.6, 0.5)
    reps = check_linf_global(outflow_run, s, 0.02)
    assert [r.bound_id for r in reps] == ["Li1", "GlobU", "GlobU2"]
    assert all(r.ratio < 1 for r in reps if r.preconditions_ok)
    with pytest.raises(ExponentConditionError):
        check_linf_global(outflow_run, s, 0.5)


def test_constants_recorded(outflow_run):
    cfg = BoundsConfig(C=2.0, C2=0.5, c10=3.0)
    rep = check_lalpha(outflow_run, 4.0, cfg)[1]
    assert rep.constants_used == {"C": 2.0, "C2": 0.5, "c10": 3.0}


def test_flux_presets():
    x = np.zeros((3, 2))
    pw = PiecewiseLinearFlux((0.0, 1.0), (1.0, -1.0))
    assert pw.value(x, 0.75)[0] == pytest.approx(-0.5) and pw.neg_sup(0.75) == pytest.approx(0.5)
    assert pw.rate(x, 0.5)[0] == pytest.approx(-2.0) and pw.rate(x, 2.0)[0] == 0.0
    sn = SinusoidalFlux(0.1, 0.5, 1.0)
    assert sn.neg_sup_max(0.0, 1.0) == pytest.approx(0.4, abs=1e-5)
    with pytest.raises(ParameterError):
        PiecewiseLinearFlux((0.0, 0.0), (1.0, 1.0))
