"""Twelve canonical runs used to audit the bounds.

All are 2D and short enough to sit inside the doubling horizon T_half at
alpha = 6, so the constant-free L^alpha bound must hold on each.
"""
from __future__ import annotations

import numpy as np

from .boundary import ConstantFlux, PiecewiseLinearFlux, SinusoidalFlux
from .bounds import PhiTrace, admissible_T
from .config import initial_field
from .constitutive import ForchheimerLaw
from .exponents import build_table, derive_alpha
from .mesh import Grid, lp_norm
from .solver import ProblemSetup, SolverConfig

SUITE_ALPHA = 6.0

_LAWS = {
    "linear-drag": ForchheimerLaw((0.0, 1.0), (1.0, 1.0)),
    "two-term": ForchheimerLaw((0.0, 1.0, 2.0), (1.0, 0.5, 0.3)),
}
_PHIS = {
    "sealed": ConstantFlux(0.0),
    "outflow": ConstantFlux(0.5),
    "inflow": ConstantFlux(-0.3),
    "seasonal": SinusoidalFlux(0.2, 0.5, 2.0),
    "ramp": PiecewiseLinearFlux((0.0, 0.05, 0.1), (0.0, -0.4, 0.3)),
    "strong-outflow": ConstantFlux(2.0),
}
_CASES = [
    ("linear-drag", 1.0, "sealed", {"kind": "sin2", "base": 1.0, "amplitude": 0.5}),
    ("linear-drag", 1.0, "outflow", {"kind": "sin2", "base": 1.0, "amplitude": 0.5}),
    ("linear-drag", 1.0, "inflow", {"kind": "gaussian", "base": 0.5, "amplitude": 1.0, "width": 0.15}),
    ("linear-drag", 0.75, "seasonal", {"kind": "cosine", "base": 1.5, "amplitude": 0.5}),
    ("linear-drag", 0.75, "ramp", {"kind": "sin2", "base": 0.8, "amplitude": 0.7}),
    ("linear-drag", 0.75, "strong-outflow", {"kind": "constant", "value": 1.2}),
    ("two-term", 1.0, "sealed", {"kind": "gaussian", "base": 0.3, "amplitude": 1.2, "width": 0.2}),
    ("two-term", 1.0, "inflow", {"kind": "sin2", "base": 1.0, "amplitude": 0.5}),
    ("two-term", 0.5, "outflow", {"kind": "cosine", "base": 1.5, "amplitude": 0.5}),
    ("two-term", 0.5, "seasonal", {"kind": "sin2", "base": 0.6, "amplitude": 0.8}),
    ("two-term", 0.75, "ramp", {"kind": "gaussian", "base": 0.5, "amplitude": 1.0, "width": 0.1}),
    ("two-term", 0.75, "strong-outflow", {"kind": "sin2", "base": 1.0, "amplitude": 1.0}),
]


def regression_suite(cells: int = 12, t_cap: float = 0.12, snapshots: int = 13, C2: float = 1.0):
    """List of (name, setup, solver_config); horizons are 0.8 T_half capped at ``t_cap``."""
    out = []
    for law_name, lam, phi_name, init in _CASES:
        law, phi = _LAWS[law_name], _PHIS[phi_name]
        grid = Grid((1.0, 1.0), (cells, cells))
        u0 = initial_field(grid, init)
        d = derive_alpha(build_table(lam, law, 2), SUITE_ALPHA)
        pts = np.concatenate([grid.side_points(ax, e) for ax, e in grid.sides()])
        tr = PhiTrace(lambda t, phi=phi: phi.neg_sup(t, pts), getattr(phi, "knots", ()))
        _, T_half = admissible_T(d, lp_norm(u0, SUITE_ALPHA), tr, C2=C2)
        t_end = min(t_cap, 0.8 * T_half)
        setup = ProblemSetup(law, lam, grid, u0, t_end, phi)
        cfg = SolverConfig(dt_initial=t_end / 200, dt_min=1e-10, dt_max=t_end / 20,
                           snapshot_times=tuple(np.linspace(0.0, t_end, snapshots)))
        out.append((f"{law_name}/lam={lam}/{phi_name}", setup, cfg))
    return out
