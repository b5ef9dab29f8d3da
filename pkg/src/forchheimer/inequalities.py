"""Numerical checks of the trace and parabolic Sobolev inequalities.

Each check returns both sides of the inequality; the universal constants are
either derived (general trace on the unit square: c1 = c2 = 4) or fitted on a
calibration corpus and then frozen.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import ExponentConditionError, ParameterError
from .exponents import AlphaDerived, ExponentTable, alpcond, compute_D3, compute_D4, kappa, theta_tilde
from .mesh import (DiscreteField, Grid, SpaceTimeTrace, boundary_integral, grad_norm, lp_norm)

SAFETY = 1.05
UNIT_SQUARE_TRACE = (4.0, 4.0)


@dataclass
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    terms: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    @property
    def ratio(self):
        if self.rhs > 0:
            return self.lhs / self.rhs
        return 0.0 if self.lhs <= 0 else np.inf

    @property
    def passed(self):
        return self.lhs <= self.rhs * (1.0 + 1e-12) + 1e-300


def general_theta(alpha, s, p, n):
    """theta of the general trace inequality in its p, s form."""
    return 1.0 / ((p - 1.0) * (alpha * p / (n * (s - p)) - 1.0))


def general_theta_m(alpha, s, p, n, r):
    """theta written through r; equals ``general_theta`` when r = (s-p)/(p-1)."""
    return r * n / (n * (p - s) + alpha * p)


def check_trace_general(f: DiscreteField, alpha, s, p, eps, constants=UNIT_SQUARE_TRACE):
    if not (alpha >= s >= 0 and alpha >= 1):
        raise ExponentConditionError("alpha >= s >= 0 and alpha >= 1")
    if not p > 1:
        raise ExponentConditionError("p > 1")
    if not eps > 0:
        raise ParameterError("eps must be positive")
    c1, c2 = constants
    lhs = boundary_integral(f, alpha)
    t_grad = eps * grad_norm(f, p, alpha - s)
    t_vol = c1 * lp_norm(f, alpha)
    q = alpha + (s - p) / (p - 1.0)
    flags = []
    if q > 0:
        high = lp_norm(f, q)
    else:
        v = np.abs(f.values)
        if np.any(v == 0):
            high, flags = np.inf, ["singular power: right side infinite"]
        else:
            high = float(np.sum(v ** q) * f.grid.cell_volume)
    t_high = (c2 * alpha) ** (p / (p - 1.0)) * eps ** (-1.0 / (p - 1.0)) * high
    return InequalityReport("trace_general", lhs, t_grad + t_vol + t_high,
                            {"gradient": t_grad, "volume": t_vol, "high_power": t_high},
                            {"c1": c1, "c2": c2}, flags)


def _specialized_terms(f, d: AlphaDerived, eps, c_star):
    t = d.table
    a, al = t.a, d.alpha
    U = f.grid.measure
    norm = lp_norm(f, al, root=True)
    grad = grad_norm(f, 2.0 - a, al + t.delta - 2.0)
    D3 = compute_D3(t, al, d.theta, c_star, U)
    D4 = compute_D4(t, al, d.theta, c_star)
    return {
        "gradient": 2.0 * eps * grad,
        "volume": c_star * norm ** al,
        "mu0_term": D3 * eps ** (-1.0 / (1.0 - a)) * norm ** (al + t.mu0),
        "mu1_term": D4 * eps ** (-d.mu2) * norm ** (al + d.mu1),
    }


def check_trace_specialized(f: DiscreteField, d: AlphaDerived, eps, c_star=None):
    """Four-term trace inequality for p = 2 - a, s = 2 - delta."""
    if not eps > 0:
        raise ParameterError("eps must be positive")
    c = d.c_star if c_star is None else c_star
    terms = _specialized_terms(f, d, eps, c)
    return InequalityReport("trace_specialized", boundary_integral(f, d.alpha), sum(terms.values()),
                            terms, {"c_star": c})


def _sobolev_exponents(d):
    if isinstance(d, AlphaDerived):
        return d.table, d.alpha
    table, alpha = d
    return table, float(alpha)


def _sobolev_sides(tr: SpaceTimeTrace, table: ExponentTable, alpha, mask=None):
    if not alpcond(table, alpha):
        raise ExponentConditionError("alpha >= 2 - delta and alpha > alpha_star")
    a, dl = table.a, table.delta
    k = kappa(table, alpha)
    tt = theta_tilde(table, alpha)
    vol = tr.grid.cell_volume

    def lp(f, q):
        v = np.abs(f.values) ** q
        if mask is not None:
            v = v[mask]
        return float(np.sum(v) * vol)

    ka = k * alpha
    lhs_int = tr.time_integral(lambda f: lp(f, ka))
    mid = (tr.time_integral(lambda f: lp(f, alpha + dl - a))
           + tr.time_integral(lambda f: grad_norm(f, 2.0 - a, alpha + dl - 2.0, mask=mask)))
    sup = max(lp(f, alpha) for f in tr.fields())
    lhs = lhs_int ** (1.0 / ka)
    base = alpha ** ((2.0 - a) / ka) * mid ** (tt / (alpha + dl - a)) * sup ** ((1.0 - tt) / alpha)
    return lhs, base, ka


def check_parabolic_sobolev(tr: SpaceTimeTrace, d, c5: float = 1.0, radius=None,
                            center=None, c6: float = 1.0):
    """Parabolic multiplicative Sobolev inequality on the whole box or on a ball.

    ``d`` is an AlphaDerived or a (table, alpha) pair (only alpcond is needed).
    In ball mode the constant is c6 (1 + 1/R)^(2-a) instead of c5.
    """
    table, alpha = _sobolev_exponents(d)
    mask = None
    const = c5
    if radius is not None:
        mask = ball_mask(tr.grid, radius, center)
        const = c6 * (1.0 + 1.0 / radius) ** (2.0 - table.a)
    lhs, base, ka = _sobolev_sides(tr, table, alpha, mask)
    rhs = const ** (1.0 / ka) * base
    return InequalityReport("parabolic_sobolev", lhs, rhs, {"unit_constant_rhs": base},
                            {"c5": c5} if radius is None else {"c6": c6, "R": radius})


def ball_mask(grid: Grid, radius, center=None):
    c = np.array(center if center is not None else [L / 2 for L in grid.lengths])
    X = grid.centers()
    r2 = sum((x - ci) ** 2 for x, ci in zip(X, c))
    return r2 <= radius ** 2


# ---------------------------------------------------------------------------
# corpora and constant fitting
# ---------------------------------------------------------------------------

def random_polynomial_field(rng, grid: Grid, degree: int = 4, scaled: bool = False) -> DiscreteField:
    """Tensor-product polynomial with random degree <= ``degree`` per axis.

    ``scaled`` multiplies by 10**U(-3, 1); small amplitudes matter because the
    trace constants are not scale invariant.
    """
    X = grid.centers()
    vals = np.ones(grid.shape)
    for x, L in zip(X, grid.lengths):
        deg = rng.integers(0, degree + 1)
        coef = rng.uniform(-1.0, 1.0, deg + 1)
        coef[0] += rng.uniform(-1.0, 1.0)
        vals = vals * np.polynomial.polynomial.polyval(x / L, coef)
    if scaled:
        vals = vals * 10.0 ** rng.uniform(-3.0, 1.0)
    return DiscreteField(grid, vals)


def polynomial_corpus(seed, count, grid: Grid, degree: int = 4, scaled: bool = False):
    rng = np.random.default_rng(seed)
    return [random_polynomial_field(rng, grid, degree, scaled) for _ in range(count)]


def calibration_corpus(seed, count, grid: Grid, degree: int = 4):
    """Scaled random polynomials plus small constant fields."""
    consts = [DiscreteField(grid, np.full(grid.shape, c)) for c in (1e-3, 1e-2, 1e-1, 1.0)]
    return consts + polynomial_corpus(seed, count, grid, degree, scaled=True)


def space_time_corpus(seed, count, grid: Grid, times, degree: int = 4):
    """Nonnegative space-time fields: |P1(x) Q1(t) + P2(x) Q2(t)| on a time grid."""
    rng = np.random.default_rng(seed)
    times = np.asarray(times, float)
    out = []
    for _ in range(count):
        parts = []
        for _k in range(2):
            sp = random_polynomial_field(rng, grid, degree).values
            q = rng.uniform(-1.0, 1.0, rng.integers(1, 4))
            parts.append(sp[None] * np.polynomial.polynomial.polyval(times, q)[:, None, None]
                         if grid.dim == 2 else
                         sp[None] * np.polynomial.polynomial.polyval(times, q)[:, None])
        out.append(SpaceTimeTrace(grid, times, np.abs(parts[0] + parts[1])))
    return out


def minimal_c_star(f: DiscreteField, d: AlphaDerived, eps, lo=1e-12, hi=1e12) -> float:
    """Smallest c_* making the specialized trace inequality hold (right side is increasing in c_*)."""
    lhs = boundary_integral(f, d.alpha)
    if lhs <= 0:
        return 0.0
    fn = lambda lc: sum(_specialized_terms(f, d, eps, np.exp(lc)).values()) - lhs
    if fn(np.log(lo)) >= 0:
        return lo
    if fn(np.log(hi)) < 0:
        return np.inf
    return float(np.exp(brentq(fn, np.log(lo), np.log(hi), xtol=1e-12)))


def fit_c_star(corpus, d: AlphaDerived, eps_values=(0.1, 1.0, 10.0), safety=SAFETY) -> float:
    return safety * max(minimal_c_star(f, d, e) for f in corpus for e in eps_values)


def fit_c5(corpus, d, safety=SAFETY, radius=None, center=None) -> float:
    """Fit c5 (or c6 in ball mode) as max(1, safety * max(LHS/RHS_1)^(kappa alpha))."""
    table, alpha = _sobolev_exponents(d)
    worst = 0.0
    for tr in corpus:
        mask = ball_mask(tr.grid, radius, center) if radius is not None else None
        lhs, base, ka = _sobolev_sides(tr, table, alpha, mask)
        if radius is not None:
            base = base * (1.0 + 1.0 / radius) ** ((2.0 - table.a) / ka)
        if base > 0:
            worst = max(worst, (lhs / base) ** ka)
    return max(1.0, safety * worst)
