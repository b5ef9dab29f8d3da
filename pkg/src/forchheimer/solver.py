"""Backward-Euler finite volumes for (u^lam)_t = div(K(|grad u|) grad u) + f.

Robin condition K du/dnu + phi u^lam = 0 on every side.  Each time step is a
Picard loop: K is frozen per face at the previous iterate, u^lam is linearised
about it, and the resulting SPD system is solved with a banded Cholesky.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, solveh_banded

from .boundary import BoundaryFlux, ConstantFlux
from .constitutive import K as K_of, ForchheimerLaw
from .errors import ParameterError, SolverFailure
from .mesh import DiscreteField, Grid, SpaceTimeTrace, take_side


@dataclass
class ProblemSetup:
    law: ForchheimerLaw
    lam: float
    grid: Grid
    u0: DiscreteField
    t_end: float
    phi: BoundaryFlux = field(default_factory=ConstantFlux)
    source: object = None  # callable(centers_tuple, t) -> array of grid shape

    def __post_init__(self):
        if not 0.0 < self.lam <= 1.0:
            raise ParameterError("lambda must lie in (0, 1]")
        if not self.t_end > 0:
            raise ParameterError("t_end must be positive")
        if self.u0.grid != self.grid:
            raise ParameterError("initial field lives on a different grid")
        if not self.u0.nonnegative:
            raise ParameterError("initial data must be nonnegative")


@dataclass
class SolverConfig:
    dt_initial: float = 1e-3
    dt_min: float = 1e-9
    dt_max: float = 0.05
    picard_tol: float = 1e-11
    picard_max_iters: int = 60
    eps_floor: float = 1e-12
    snapshot_times: tuple = ()
    easy_iters: int = 15
    keep_steps: bool = False

    def __post_init__(self):
        if not 0 < self.dt_min <= self.dt_initial <= self.dt_max:
            raise ParameterError("need 0 < dt_min <= dt_initial <= dt_max")
        if not self.picard_tol > 0 or self.picard_max_iters < 1:
            raise ParameterError("picard_tol must be positive and picard_max_iters >= 1")


@dataclass
class StepDiagnostics:
    step: int
    t: float
    dt: float
    picard_iters: int
    residual: float
    mass: float
    flux: float
    source: float
    ledger_residual: float
    max_u: float


@dataclass
class RunRecord:
    setup: ProblemSetup
    config: SolverConfig
    trace: SpaceTimeTrace
    steps: list
    floor_hits: int = 0
    initial_mass: float = 0.0
    states: list = field(default_factory=list)

    @property
    def horizon(self):
        return float(self.trace.times[-1])


class StepRejected(SolverFailure):
    pass


# ---------------------------------------------------------------------------

class _Discretization:
    """Precomputed geometry for one grid."""

    def __init__(self, setup: ProblemSetup):
        g = setup.grid
        self.g, self.law, self.lam = g, setup.law, setup.lam
        self.V = g.cell_volume
        self.N = int(np.prod(g.cells))
        self.idx = np.arange(self.N).reshape(g.shape)
        self.bw = 1 if g.dim == 1 else g.cells[1]
        self.centers = g.centers()
        self.sides = []
        for ax, end in g.sides():
            self.sides.append(dict(ax=ax, end=end, cells=take_side(self.idx, ax, end).ravel(),
                                   area=g.side_area(ax), d=g.h[ax] / 2,
                                   pts=g.side_points(ax, end)))
        self.linear = setup.law.N == 0

    def K(self, xi):
        if self.linear:
            return np.full(np.shape(xi), 1.0 / self.law.coefficients[0])
        return K_of(self.law, xi)

    def all_K(self, u, ub):
        """Lagged K on interior faces (per axis) and boundary faces (per side), one root solve."""
        parts = self.face_xi(u) + self.boundary_xi(u, ub)
        flat = self.K(np.concatenate([p.ravel() for p in parts]))
        out, k = [], 0
        for p in parts:
            out.append(flat[k:k + p.size].reshape(p.shape))
            k += p.size
        nax = self.g.dim
        return out[:nax], out[nax:]

    def face_xi(self, u):
        """Gradient magnitudes on interior faces, one array per axis."""
        g = self.g
        out = []
        for ax in range(g.dim):
            h = g.h[ax]
            n = g.cells[ax]
            uL = np.take(u, np.arange(n - 1), axis=ax)
            uR = np.take(u, np.arange(1, n), axis=ax)
            sq = ((uR - uL) / h) ** 2
            if g.dim == 2:
                tg = np.gradient(u, g.h[1 - ax], axis=1 - ax)
                sq = sq + (0.5 * (np.take(tg, np.arange(n - 1), axis=ax)
                                  + np.take(tg, np.arange(1, n), axis=ax))) ** 2
            out.append(np.sqrt(sq))
        return out

    def boundary_xi(self, u, ub):
        g = self.g
        out = []
        for s, b in zip(self.sides, ub):
            uc = take_side(u, s["ax"], s["end"]).ravel()
            sq = ((b - uc) / s["d"]) ** 2
            if g.dim == 2:
                t = 1 - s["ax"]
                tg = np.gradient(u, g.h[t], axis=t)
                sq = sq + take_side(tg, s["ax"], s["end"]).ravel() ** 2
            out.append(np.sqrt(sq))
        return out


def _b(u, lam):
    return u if lam == 1.0 else u ** lam


def _db(u, lam):
    return np.ones_like(u) if lam == 1.0 else lam * u ** (lam - 1.0)


def _assemble(D: _Discretization, u, ub, u_n, dt, phis, f_new, floor):
    """Linear system for the next Picard iterate, lagged at (u, ub)."""
    g, lam = D.g, D.lam
    N, bw = D.N, D.bw
    ab = np.zeros((bw + 1, N))
    diag = np.zeros(g.shape)
    bk, dbk = _b(u, lam), _db(u, lam)
    rhs = D.V * (dbk * u - (bk - _b(u_n, lam))) / dt
    if f_new is not None:
        rhs = rhs + D.V * f_new
    diag += D.V * dbk / dt
    # residual of the linearized system at u, built from differences so a
    # steady state gives an exactly zero update
    res = D.V * (_b(u_n, lam) - bk) / dt
    if f_new is not None:
        res = res + D.V * f_new
    K_faces, K_bnd = D.all_K(u, ub)
    for ax, Kf in enumerate(K_faces):
        h = g.h[ax]
        area = g.cell_volume / h
        T = Kf * area / h
        n = g.cells[ax]
        lo = [slice(None)] * g.dim
        hi = [slice(None)] * g.dim
        lo[ax], hi[ax] = slice(0, n - 1), slice(1, n)
        diag[tuple(lo)] += T
        diag[tuple(hi)] += T
        F = T * (u[tuple(hi)] - u[tuple(lo)])
        res[tuple(lo)] += F
        res[tuple(hi)] -= F
        left = D.idx[tuple(lo)].ravel()
        offset = 1 if (g.dim == 1 or ax == 1) else bw
        ab[bw - offset, left + offset] = -T.ravel()
    diag = diag.ravel()
    rhs = rhs.ravel().copy()
    res = res.ravel().copy()
    u_flat = u.ravel()
    applied = 0.0  # boundary outflow applied in this system, per unit time
    coeffs = []
    for s, Kb, b, phi in zip(D.sides, K_bnd, ub, phis):
        kap = Kb / s["d"]
        A = s["area"]
        beta, dbeta = _b(b, lam), _db(b, lam)
        pos = phi > 0
        c0 = beta - dbeta * b
        den = kap + np.where(pos, phi * dbeta, 0.0)
        Bc = np.where(pos, A * kap * phi * dbeta / den, 0.0)
        Rc = np.where(pos, -A * kap * phi * c0 / den, -A * phi * beta)
        np.add.at(diag, s["cells"], Bc)
        np.add.at(rhs, s["cells"], Rc)
        np.add.at(res, s["cells"], Rc - Bc * u_flat[s["cells"]])
        coeffs.append((kap, beta, dbeta, c0, pos, Bc, Rc, A))
    ab[bw] = diag
    return ab, rhs, res, coeffs


def _boundary_update(D, u_flat, phis, coeffs, floor):
    new, outflow = [], 0.0
    for s, phi, (kap, beta, dbeta, c0, pos, Bc, Rc, A) in zip(D.sides, phis, coeffs):
        uc = u_flat[s["cells"]]
        b = np.where(pos, (kap * uc - phi * c0) / (kap + phi * dbeta), uc - phi * beta / kap)
        new.append(np.maximum(b, floor))
        outflow += float(np.sum(Bc * uc - Rc))
    return new, outflow


def _step(D: _Discretization, u_n, ub0, t, dt, setup: ProblemSetup, cfg: SolverConfig):
    t_new = t + dt
    phis = [setup.phi.value(s["pts"], t_new) for s in D.sides]
    f_new = None if setup.source is None else np.asarray(setup.source(D.centers, t_new), float)
    u = u_n.copy()
    ub = [b.copy() for b in ub0]
    floor = cfg.eps_floor
    floored = 0
    for it in range(1, cfg.picard_max_iters + 1):
        ab, rhs, res, coeffs = _assemble(D, u, ub, u_n, dt, phis, f_new, floor)
        try:
            sol = u.ravel() + solveh_banded(ab, res, lower=False, check_finite=True)
        except (LinAlgError, ValueError) as exc:
            raise StepRejected(f"linear solve failed: {exc}")
        if not np.all(np.isfinite(sol)):
            raise StepRejected("non-finite iterate")
        low = sol < floor
        floored = int(np.count_nonzero(low))
        sol = np.where(low, floor, sol)
        ub, outflow = _boundary_update(D, sol, phis, coeffs, floor)
        new = sol.reshape(D.g.shape)
        change = np.max(np.abs(new - u)) / max(np.max(np.abs(new)), floor)
        u = new
        if change < cfg.picard_tol:
            break
    else:
        raise StepRejected(f"Picard did not converge in {cfg.picard_max_iters} iterations")
    # nonlinear residual with K re-evaluated at the accepted iterate
    _, rhs, res, _ = _assemble(D, u, ub, u_n, dt, phis, f_new, floor)
    scale = max(np.max(np.abs(rhs)), 1e-300)
    residual = float(np.max(np.abs(res)) / scale)
    src = 0.0 if f_new is None else float(np.sum(f_new) * D.V)
    return u, ub, it, residual, outflow, src, floored


def initial_boundary_values(D, u):
    return [take_side(u, s["ax"], s["end"]).ravel().copy() for s in D.sides]


def step(u_n: DiscreteField, t: float, dt: float, setup: ProblemSetup, config: SolverConfig) -> DiscreteField:
    """One backward-Euler step; raises ``StepRejected`` if Picard fails."""
    if np.any(u_n.values < 0):
        raise ParameterError("u_n must be nonnegative")
    D = _Discretization(setup)
    u = np.maximum(u_n.values, config.eps_floor)
    out = _step(D, u, initial_boundary_values(D, u), t, dt, setup, config)
    return DiscreteField(setup.grid, out[0], t + dt)


def run(setup: ProblemSetup, config: SolverConfig | None = None) -> RunRecord:
    cfg = config or SolverConfig()
    D = _Discretization(setup)
    lam = setup.lam
    floor = cfg.eps_floor
    u = np.maximum(setup.u0.values, floor)
    floor_hits = int(np.count_nonzero(setup.u0.values < floor))
    ub = initial_boundary_values(D, u)
    snaps = sorted(set(float(s) for s in cfg.snapshot_times)) or list(np.linspace(0, setup.t_end, 11))
    if snaps[0] < 0 or snaps[-1] > setup.t_end * (1 + 1e-12):
        raise ParameterError("snapshot times must lie in [0, t_end]")
    snap_vals = {}
    if snaps[0] == 0.0:
        snap_vals[0.0] = u.copy()
    pending = [s for s in snaps if s > 0.0]
    mass = float(np.sum(_b(u, lam)) * D.V)
    m0 = mass
    t, dt, easy, k = 0.0, cfg.dt_initial, 0, 0
    diags = []
    states = [(0.0, u.copy())] if cfg.keep_steps else []
    t_end = setup.t_end
    while t < t_end * (1 - 1e-14):
        h = min(dt, t_end - t)
        if t + h > t_end * (1 - 1e-14):
            h = t_end - t
        try:
            new, ub_new, iters, res, outflow, src, fl = _step(D, u, ub, t, h, setup, cfg)
        except StepRejected as exc:
            dt = h / 2
            easy = 0
            if dt < cfg.dt_min:
                raise SolverFailure(f"dt fell below dt_min at t={t!r}: {exc}",
                                    {"t": t, "dt": dt, "accepted_steps": k}) from exc
            continue
        k += 1
        t_next = t_end if h == t_end - t else t + h
        while pending and pending[0] <= t_next * (1 + 1e-14):
            s = pending.pop(0)
            w = min(max((s - t) / h, 0.0), 1.0)
            snap_vals[s] = u + w * (new - u)
        new_mass = float(np.sum(_b(new, lam)) * D.V)
        diags.append(StepDiagnostics(k, t_next, h, iters, res, new_mass, outflow * h, src * h,
                                     new_mass - mass + (outflow - src) * h, float(np.max(new))))
        floor_hits += fl
        mass, u, ub, t = new_mass, new, ub_new, t_next
        if cfg.keep_steps:
            states.append((t, u.copy()))
        easy = easy + 1 if iters <= cfg.easy_iters else 0
        if easy >= 3:
            dt = min(dt * 1.2, cfg.dt_max)
            easy = 0
    times = sorted(snap_vals)
    trace = SpaceTimeTrace(setup.grid, times, np.array([snap_vals[s] for s in times]))
    return RunRecord(setup, cfg, trace, diags, floor_hits, m0, states)
