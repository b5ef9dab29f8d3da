"""A 2D run with steady outflow, then the bound audit on its snapshots."""
import numpy as np

from forchheimer.boundary import ConstantFlux
from forchheimer.bounds import check_lalpha, check_linf_global
from forchheimer.constitutive import ForchheimerLaw
from forchheimer.exponents import build_schedule, build_table, x_star
from forchheimer.mesh import DiscreteField, Grid, lp_norm
from forchheimer.solver import ProblemSetup, SolverConfig, run

law = ForchheimerLaw((0.0, 1.0), (1.0, 1.0))
grid = Grid((1.0, 1.0), (24, 24))
u0 = DiscreteField.from_function(grid, lambda x, y: 1 + np.sin(np.pi * x) ** 2 * np.sin(np.pi * y) ** 2)
setup = ProblemSetup(law, 0.75, grid, u0, 0.1, ConstantFlux(0.5))
rec = run(setup, SolverConfig(snapshot_times=tuple(np.linspace(0, 0.1, 6))))

print(f"{len(rec.steps)} steps, Picard iterations per step: "
      f"{min(d.picard_iters for d in rec.steps)}..{max(d.picard_iters for d in rec.steps)}")
print("worst mass-ledger residual:", max(abs(d.ledger_residual) for d in rec.steps))
for f in rec.trace.fields():
    print(f"t={f.time:.3f}  max u={f.values.max():.5f}  int u^4={lp_norm(f, 4.0):.5f}")

for rep in check_lalpha(rec, 4.0):
    print(f"{rep.bound_id:13s} measured={rep.measured:.4g} bound={rep.bound_value:.4g} -> {rep.verdict}")
t = build_table(setup.lam, law, 2)
s = build_schedule(t, 1.1 * max(2 - t.delta, (1 + x_star(t)) * t.alpha_star), j_max=None)
for rep in check_linf_global(rec, s, 0.025):
    print(f"{rep.bound_id:13s} ratio={rep.ratio:.3g} ({rep.verdict}; constants are unknown so only ratios are shown)")
