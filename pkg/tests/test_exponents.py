import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from forchheimer.constitutive import ForchheimerLaw
from forchheimer.errors import ExponentConditionError, ParameterError, ScheduleError, SubcriticalError
from forchheimer.exponents import (alpcond, build_interior_schedule, build_schedule, build_table,
                                   derive_alpha, eval_global_constants, eval_interior_constants,
                                   kappa, kappa_bar, kappa_bar_exceeds_one, mu1, theta, x_star)
from forchheimer.errors import ConfigurationError

T = build_table(1.0, 0.5, 2)


def test_table_basics():
    assert T.delta == 0 and T.alpha_star == pytest.approx(2 / 3) and T.mu0 == 1.0
    assert T.supercritical
    law_t = build_table(0.75, ForchheimerLaw((0.0, 1.0, 3.0), (1, 1, 1)), 3)
    assert law_t.a == 0.75 and law_t.delta == 0.25


def test_table_validation():
    with pytest.raises(ParameterError):
        build_table(1.5, 0.5, 2)
    with pytest.raises(ParameterError):
        build_table(1.0, ForchheimerLaw((0.0,), (1.0,)), 2)
    with pytest.warns(UserWarning):
        build_table(1.0, 0.5, 1)


def test_worked_example():
    d = derive_alpha(T, 4.0)
    assert (d.theta, d.mu1, d.mu2, d.mu3, d.mu4) == pytest.approx((0.4, 2, 4, 12, 5), abs=1e-13)
    assert d.kappa == pytest.approx(1.625, abs=1e-14)
    assert d.kappa_bar == pytest.approx(13 / 12, abs=1e-14)
    assert x_star(T) == pytest.approx((2 + math.sqrt(2.75)) / 0.5, abs=1e-13)


def test_frozen_log_space_constants():
    d = derive_alpha(T, 4.0, U_measure=1.0)
    assert d.D3 == pytest.approx(168.89701257893043, rel=1e-12)
    assert d.D4 == pytest.approx(20642.546481477602, rel=1e-12)


def test_subcritical_refused():
    t = build_table(0.4, 0.5, 2)
    assert not t.supercritical
    with pytest.raises(SubcriticalError) as exc:
        derive_alpha(t, 4.0)
    assert exc.value.condition


def test_preconditions_named():
    with pytest.raises(ExponentConditionError, match="2 - delta"):
        derive_alpha(T, 1.0)
    with pytest.raises(ExponentConditionError, match="n\\*mu0"):
        derive_alpha(T, 2.0)


def test_mu3_optional():
    # n mu0 = 2 < 2.5 <= lambda + 1 + mu0 = 3
    assert derive_alpha(T, 2.5).mu3 is None
    assert derive_alpha(T, 3.5).mu3 is not None


@given(st.floats(0.05, 0.95), st.floats(0.0, 1.0), st.integers(2, 4), st.floats(1.01, 30.0))
def test_kappa_bar_criterion_matches_quadratic(a, frac, n, scale):
    t = build_table(1.0 - frac * a * 0.99, a, n)
    al = max(2 - t.delta, t.n * t.mu0) * scale
    assume(abs(kappa_bar(t, al) - 1) > 1e-9)
    assert kappa_bar_exceeds_one(t, al) == (kappa_bar(t, al) > 1)


@given(st.floats(0.05, 0.95), st.floats(0.0, 0.99), st.integers(2, 4))
def test_monotone_in_alpha(a, frac, n):
    t = build_table(1.0 - frac * a, a, n)
    lo = max(2 - t.delta, t.n * t.mu0) * 1.01
    al = np.linspace(lo, 40 * lo, 60)
    assert np.all(np.diff(mu1(t, al)) < 0)
    assert np.all(np.diff(kappa_bar(t, al)) > 0)
    th = theta(t, al)
    assert np.all((th > 0) & (th < 1))


def test_schedule_example():
    s = build_schedule(T, 6.0, j_max=None)
    assert s.meta["j_max"] == 128
    assert s.kappa_bar_star == pytest.approx(4 / 3, rel=1e-12)
    assert s.kappa_hat_star > 1 and s.tail <= 1e-10
    assert np.all(np.diff(s.alphas) > 0)
    assert s.betas[0] == pytest.approx(6.0 + mu1(T, 6.0))
    assert s.omega1 == pytest.approx(2 * s.omega)


def test_schedule_threshold():
    thr = (1 + x_star(T)) * T.alpha_star
    assert thr == pytest.approx(5.5444165269036, abs=1e-12)
    with pytest.raises(ScheduleError):
        build_schedule(T, 5.5)


def test_interior_schedule():
    s = build_interior_schedule(T, 4.0)
    assert np.allclose(s.alphas[:5], 4.0 * s.kappa_star ** np.arange(5))
    assert 0 < s.mu <= s.nu and s.omega > 0 and s.tail <= 1e-10


def test_alpcond():
    assert alpcond(T, 2.0) and not alpcond(T, 1.5)


def test_eval_constants():
    d = derive_alpha(T, 4.0, U_measure=1.0)
    C, A = eval_interior_constants(d, 0.5, 1.0, 0.1, 0.2, 0.3, math.pi)
    assert C > 0 and A > 0
    M, At, E = eval_global_constants(d, 0.1, 0.2, 0.3, 1.0, 0.5, 1.0)
    assert min(M, At, *E) > 0 and len(E) == 5
    # terms driven by inflow vanish when phi^- = 0
    _, _, E0 = eval_global_constants(d, 0.1, 0.2, 0.3, 1.0, 0.0, 1.0)
    assert E0[2:] == [0.0, 0.0, 0.0] and E0[:2] == E[:2]
    with pytest.raises(ConfigurationError):
        eval_global_constants(d, 0.1, 0.2, 0.3, 1.0, 0.0, None)


def test_kappa_value():
    assert kappa(T, 4.0) == pytest.approx(1.625)
