"""The two-exponent iteration against its closed-form bound in the three regimes."""
import numpy as np

from forchheimer.moser import classify, closed_form_bound, random_spec, recursion_trajectory, \
    telescoping_spec, verify_dominance

rng = np.random.default_rng(1)
for family in ("above", "below", "crossing"):
    spec = random_spec(rng, family, length=12)
    z = recursion_trajectory(spec)
    rep = verify_dominance(spec)
    tightest = np.exp(np.max(rep.log_ratios[1:]))
    print(f"{family:9s} case={classify(spec):9s} z_12={z[-1]:.4g} "
          f"bound={closed_form_bound(spec, 12):.4g} dominated={rep.passed} tightest z_j/bound={tightest:.3g}")

tele = telescoping_spec()
print("telescoping z_j:", " ".join(f"{v:.6f}" for v in recursion_trajectory(tele)[:6]), "... ->",
      recursion_trajectory(tele)[-1], "bound", closed_form_bound(tele, tele.length - 1))
