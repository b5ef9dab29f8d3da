"""From (lambda, a, n) to the Moser exponent ladder.

The worked case n = 2, a = 1/2, lambda = 1 has simple rational exponents;
the schedule then climbs geometrically and its products converge.
"""
from forchheimer.exponents import build_schedule, build_table, derive_alpha, x_star

t = build_table(1.0, 0.5, 2)
print(f"delta={t.delta}  alpha_*={t.alpha_star:.6f}  mu0={t.mu0}")
for alpha in (3.0, 4.0, 8.0, 16.0):
    d = derive_alpha(t, alpha, U_measure=1.0)
    print(f"alpha={alpha:5.1f} theta={d.theta:.4f} mu1={d.mu1:.4f} mu2={d.mu2:.4f} "
          f"mu4={d.mu4:.4f} kappa={d.kappa:.4f} kappa_bar={d.kappa_bar:.4f}")

thr = (1 + x_star(t)) * t.alpha_star
print(f"x_* = {x_star(t):.6f}; the global ladder needs alpha0 > {thr:.6f}")
s = build_schedule(t, 6.0, j_max=None)
print(f"alpha0=6: kappa_bar_*={s.kappa_bar_star:.6f} kappa_hat_*={s.kappa_hat_star:.6f} "
      f"truncated at j={s.meta['j_max']} with tail {s.tail:.1e}")
print("first rungs alpha_j:", " ".join(f"{a:.3f}" for a in s.alphas[:6]))
print(f"mu_tilde={s.mu_tilde:.6f} nu_tilde={s.nu_tilde:.6f} omega={s.omega:.6f}")

try:
    derive_alpha(build_table(0.3, 0.5, 2), 4.0)
except Exception as exc:  # sub-critical data is refused with a named condition
    print("refused:", exc)
