"""The twelve audit runs: L^alpha doubling verdicts and the other ratios."""
from forchheimer.bounds import BoundsConfig
from forchheimer.cli import ALL_CHECKS, bound_reports
from forchheimer.solver import run
from forchheimer.suite import regression_suite

for name, setup, cfg in regression_suite(16):
    rec = run(setup, cfg)
    reps, _ = bound_reports(rec, BoundsConfig(), [6.0], ALL_CHECKS)
    cells = " ".join(f"{r.bound_id}={r.ratio:.2g}" for r in reps)
    verdict = next(r.verdict for r in reps if r.bound_id == "Lalpha_local")
    print(f"{name:34s} T={setup.t_end:.3f} Lalpha_local:{verdict:4s} {cells}")
