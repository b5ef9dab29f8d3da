"""A-priori bounds evaluated against measured norms of a computed run.

All bound values are assembled in log space so that huge constants such as
(2A)^omega do not overflow; ``BoundReport.ratio`` is measured/bound.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq

from .errors import ExponentConditionError, ParameterError
from .exponents import AlphaDerived, MoserSchedule, build_table, derive_alpha
from .inequalities import ball_mask
from .mesh import DiscreteField, extrapolate_side, grad_norm, lp_norm
from .solver import RunRecord


@dataclass
class BoundsConfig:
    """Generic constants of the estimates; all unknown, all default to one."""
    C: float = 1.0
    C2: float = 1.0
    c10: float = 1.0

    def as_dict(self):
        return {"C": self.C, "C2": self.C2, "c10": self.c10}


@dataclass
class BoundReport:
    bound_id: str
    alpha: float
    measured: float
    log_bound: float
    constants_used: dict = field(default_factory=dict)
    preconditions: list = field(default_factory=list)
    grade: str = "ratio-only"  # what a satisfied report is worth
    reason: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def bound_value(self):
        with np.errstate(over="ignore"):
            return float(np.exp(self.log_bound))

    @property
    def ratio(self):
        if not np.isfinite(self.log_bound):
            return 0.0 if self.log_bound == np.inf else np.inf
        if self.measured <= 0:
            return 0.0
        with np.errstate(over="ignore"):
            return float(np.exp(math.log(self.measured) - self.log_bound))

    @property
    def preconditions_ok(self):
        return all(ok for _, ok in self.preconditions)

    @property
    def verdict(self):
        if not self.preconditions_ok:
            return "precondition-failed"
        if self.grade == "pass":
            return "pass" if self.ratio <= 1.0 else "fail"
        return "ratio-only"

    def row(self):
        return {"bound_id": self.bound_id, "alpha": self.alpha, "measured": self.measured,
                "bound": self.bound_value, "ratio": self.ratio, "verdict": self.verdict,
                "constants_json": json.dumps(self.constants_used, sort_keys=True)}


# ---------------------------------------------------------------------------
# admissible horizons and the L^alpha growth envelope
# ---------------------------------------------------------------------------

class PhiTrace:
    """t -> ||phi^-(t)||_inf given as a callable, a constant or sampled arrays."""

    def __init__(self, src, knots=()):
        self.knots = tuple(knots)
        if callable(src):
            self.fn = src
        elif np.isscalar(src):
            c = float(src)
            self.fn = lambda t: c
        else:
            ts, vs = (np.asarray(v, float) for v in src)
            self.fn = lambda t: float(np.interp(t, ts, vs))
            self.knots = tuple(ts)

    def __call__(self, t):
        return self.fn(t)

    def integral(self, power, t):
        """int_0^t (1 + phi^power)."""
        if t <= 0:
            return 0.0
        pts = [k for k in self.knots if 0 < k < t] or None
        with warnings.catch_warnings():
            # roundoff-level warnings near the requested tolerance are harmless here
            warnings.simplefilter("ignore", IntegrationWarning)
            val, _ = quad(lambda s: 1.0 + self.fn(s) ** power, 0.0, t, points=pts,
                          epsabs=1e-15, epsrel=1e-13, limit=400)
        return val

    @classmethod
    def from_run(cls, run: RunRecord):
        phi = run.setup.phi
        pts = np.concatenate([s for s in _boundary_points(run.setup.grid)])
        return cls(lambda t: phi.neg_sup(t, pts), getattr(phi, "knots", ()))


def _boundary_points(grid):
    return [grid.side_points(ax, end) for ax, end in grid.sides()]


def _C3(d: AlphaDerived, C2, C3):
    return C3 if C3 is not None else C2 * d.mu1 / d.alpha


def admissible_T(d: AlphaDerived, u0_norm: float, phi_trace, C2: float = 1.0, C3=None):
    """(T_star, T_half): horizons where the L^alpha envelope is finite / at most doubled."""
    tr = phi_trace if isinstance(phi_trace, PhiTrace) else PhiTrace(phi_trace)
    c3 = _C3(d, C2, C3)
    e = d.mu1 / d.alpha
    base = (1.0 + u0_norm) ** (-e) / c3
    out = []
    for thr in (base, base * (1.0 - 2.0 ** (-e))):
        if thr <= 0:
            out.append(0.0)
            continue
        F = lambda T: tr.integral(d.mu4, T) - thr
        out.append(brentq(F, 0.0, thr, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    return tuple(out)


def lalpha_bound(d: AlphaDerived, u0_norm: float, phi_trace, t: float, C2: float = 1.0, C3=None):
    """Envelope U_alpha(t) for int u^alpha; +inf at and beyond T_star."""
    tr = phi_trace if isinstance(phi_trace, PhiTrace) else PhiTrace(phi_trace)
    e = d.mu1 / d.alpha
    gap = (1.0 + u0_norm) ** (-e) - _C3(d, C2, C3) * tr.integral(d.mu4, t)
    if gap <= 0:
        return math.inf
    return gap ** (-1.0 / e)


# ---------------------------------------------------------------------------
# checks against runs
# ---------------------------------------------------------------------------

def _table(run: RunRecord):
    return build_table(run.setup.lam, run.setup.law, run.setup.grid.dim)


def _derive(run, alpha):
    return derive_alpha(_table(run), alpha, U_measure=run.setup.grid.measure)


def _log(x):
    return math.log(x) if x > 0 else -math.inf


def check_lalpha(run: RunRecord, d, config: BoundsConfig | None = None):
    """Doubling bound for sup_t int u^alpha (pass grade) and the mixed gradient term."""
    cfg = config or BoundsConfig()
    d = d if isinstance(d, AlphaDerived) else _derive(run, d)
    al, a, dl = d.alpha, d.a, d.delta
    u0 = DiscreteField(run.setup.grid, run.trace.values[0], 0.0)
    I0 = lp_norm(u0, al)
    T = run.horizon
    T_star, T_half = admissible_T(d, I0, PhiTrace.from_run(run), C2=cfg.C2)
    pre = [("alpha >= 2 - delta", True), ("alpha > n*mu0", True), ("T <= T_half", T <= T_half)]
    consts = cfg.as_dict()
    sup = max(lp_norm(f, al) for f in run.trace.fields())
    r1 = BoundReport("Lalpha_local", al, sup, _log(2.0 * (1.0 + I0)), consts, pre, "pass",
                     extra={"T_star": T_star, "T_half": T_half, "T": T})
    mixed = run.trace.time_integral(lambda f: grad_norm(f, 2.0 - a, al + dl - 2.0))
    r2 = BoundReport("Lalpha_mixed", al, mixed, _log(cfg.C * (1.0 + I0)), consts, pre,
                     extra={"T_star": T_star, "T_half": T_half, "T": T})
    return [r1, r2]


def _boundary_sum(grid, values_by_side):
    return sum(float(np.sum(v)) * grid.side_area(ax)
               for (ax, _), v in zip(grid.sides(), values_by_side))


def check_gradient(run: RunRecord, d, config: BoundsConfig | None = None):
    cfg = config or BoundsConfig()
    d = d if isinstance(d, AlphaDerived) else _derive(run, d)
    t = d.table
    al, a, lam = d.alpha, d.a, t.lam
    if not (al > t.n * t.mu0 and al > lam + 1.0 + t.mu0):
        raise ExponentConditionError("alpha > max(n*mu0, lambda + 1 + mu0)")
    g, phi = run.setup.grid, run.setup.phi
    pts = _boundary_points(g)
    u0 = DiscreteField(g, run.trace.values[0], 0.0)
    b0 = [np.maximum(extrapolate_side(u0.values, ax, end), 0.0) ** (lam + 1.0)
          * np.maximum(phi.value(p, 0.0), 0.0) for (ax, end), p in zip(g.sides(), pts)]
    E0 = lp_norm(u0, al) + grad_norm(u0, 2.0 - a) + _boundary_sum(g, b0)
    q = al / (al - lam - 1.0)
    rate = lambda s: _boundary_sum(g, [np.abs(phi.rate(p, s)) ** q for p in pts])
    knots = [k for k in getattr(phi, "knots", ())]
    allpts = np.concatenate(pts)

    def Kfun(tt):
        pts_in = [k for k in knots if 0 < k < tt] or None
        integ = quad(rate, 0.0, tt, points=pts_in, limit=400)[0] if tt > 0 else 0.0
        return 1.0 + phi.neg_sup(tt, allpts) ** d.mu3 + integ

    times = run.trace.times
    w = run.trace.values ** lam
    edge = 2 if len(times) >= 3 else 1
    wt = np.gradient(w, times, axis=0, edge_order=edge)
    space = np.array([np.sum(run.trace.values[k] ** (1.0 - lam) * wt[k] ** 2) * g.cell_volume
                      for k in range(len(times))])
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (space[1:] + space[:-1]) * np.diff(times))))
    best = None
    for k in range(1, len(times)):
        meas = cum[k] + grad_norm(run.trace.field(k), 2.0 - a)
        lb = _log(cfg.C * (E0 + Kfun(times[k])))
        r = math.exp(_log(meas) - lb) if meas > 0 else 0.0
        if best is None or r > best[0]:
            best = (r, meas, lb, times[k])
    _, meas, lb, tk = best
    return BoundReport("grad", al, meas, lb, cfg.as_dict(),
                       [("alpha > max(n*mu0, lambda+1+mu0)", True)],
                       extra={"E0": E0, "t": tk})


def _ball_measure(dim, R):
    return 2.0 * R if dim == 1 else math.pi * R * R


def check_linf_interior(run: RunRecord, schedule, R: float, sigma: float,
                        config: BoundsConfig | None = None, center=None):
    cfg = config or BoundsConfig()
    inner = schedule.interior if isinstance(schedule, MoserSchedule) else schedule
    g = run.setup.grid
    a = run.setup.law.degeneracy_a
    c = np.array(center if center is not None else [L / 2 for L in g.lengths])
    gap = min(min(ci, L - ci) for ci, L in zip(c, g.lengths))
    if not (0 < R < gap):
        raise ParameterError("the ball B_R must lie strictly inside the domain")
    if not 0 < sigma < 1:
        raise ParameterError("sigma must lie in (0, 1)")
    inside = ball_mask(g, R, c)
    half = ball_mask(g, R / 2, c)
    if not half.any():
        raise ParameterError("B_{R/2} contains no cell centre; refine the grid")
    T = run.horizon
    times = run.trace.times
    late = times >= sigma * T
    meas = float(max(v[half].max() for v in run.trace.values[late]))
    a0 = inner.alpha0
    dens = [float(np.sum(v[inside] ** a0) * g.cell_volume) for v in run.trace.values]
    Nrm = float(np.trapezoid(dens, times)) ** (1.0 / a0)
    BT = _ball_measure(g.dim, R) * T
    logA = (5 * math.log(4.0) + math.log(cfg.c10) + (6.0 - a) * math.log(a0)
            + 2 * math.log1p(1.0 / R) + 3 * math.log1p(BT)
            + 2 * math.log(1.0 + 1.0 / (sigma * T) + R ** (a - 2.0)))
    logC = inner.omega * (math.log(2.0) + logA)
    lN = _log(Nrm)
    lb = logC + max(inner.mu * lN, inner.nu * lN)
    return BoundReport("Linf_interior", a0, meas, lb, cfg.as_dict(),
                       [("alpha0 satisfies alpcond", True), ("B_R inside domain", True)],
                       extra={"omega": inner.omega, "mu": inner.mu, "nu": inner.nu, "norm": Nrm})


def check_linf_global(run: RunRecord, schedule: MoserSchedule, eps: float,
                      config: BoundsConfig | None = None):
    """Three global L-infinity variants: Li1, GlobU and GlobU2."""
    cfg = config or BoundsConfig()
    T = run.horizon
    if not 0 < eps < min(1.0, T):
        raise ExponentConditionError("0 < eps < min(1, T)")
    g = run.setup.grid
    s = schedule
    b0 = s.beta0
    times = run.trace.times
    meas = float(max(v.max() for v in run.trace.values[times >= eps]))
    pts = np.concatenate(_boundary_points(g))
    Phi = run.setup.phi.neg_sup_max(0.0, T, pts)
    dens = [lp_norm(f, b0) for f in run.trace.fields()]
    Nrm = float(np.trapezoid(dens, times)) ** (1.0 / b0)
    common = (math.log(cfg.C) + s.omega2 * math.log1p(T) + s.omega3 * math.log1p(Phi))
    consts = cfg.as_dict()
    note = {"omega1": s.omega1, "omega2": s.omega2, "omega3": s.omega3,
            "mu_tilde": s.mu_tilde, "nu_tilde": s.nu_tilde, "beta0": b0,
            "note": "omega from truncated series with certified tail"}
    lN = _log(Nrm)
    r1 = BoundReport("Li1", s.alpha0, meas,
                     common + s.omega1 * math.log1p(1.0 / eps) + max(s.mu_tilde * lN, s.nu_tilde * lN),
                     consts, [("alpha0 above schedule threshold", True)], extra=dict(note))
    d = derive_alpha(s.table, b0, U_measure=g.measure)
    u0 = DiscreteField(g, run.trace.values[0], 0.0)
    I0 = lp_norm(u0, b0)
    tr = PhiTrace.from_run(run)
    T_star, T_half = admissible_T(d, I0, tr, C2=cfg.C2)
    ok = T < T_star
    if ok:
        W = quad(lambda t: lalpha_bound(d, I0, tr, t, C2=cfg.C2), 0.0, T, limit=200)[0]
        lW = _log(W)
        lb2 = common - s.omega1 * math.log(eps) + max(s.mu_tilde * lW, s.nu_tilde * lW) / b0
    else:
        lb2 = math.inf
    r2 = BoundReport("GlobU", s.alpha0, meas, lb2, consts,
                     [("alpha0 above schedule threshold", True), ("T < T_star(beta0)", ok)],
                     reason="" if ok else "horizon beyond T_star at beta0",
                     extra=dict(note, T_star=T_star))
    lb3 = (common - s.omega1 * math.log(eps) + (s.nu_tilde / b0) * math.log1p(T)
           + s.nu_tilde * math.log1p(I0 ** (1.0 / b0)))
    r3 = BoundReport("GlobU2", s.alpha0, meas, lb3, consts,
                     [("alpha0 above schedule threshold", True), ("T <= T_half(beta0)", T <= T_half)],
                     extra=dict(note, T_half=T_half))
    return [r1, r2, r3]
