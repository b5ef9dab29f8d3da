"""How the permeability K shrinks as the gradient grows.

For g(s) = 1 + s + 0.5 s^2 we invert s g(s) = xi, compare K against the
fitted power-law sandwich, and check H against quadrature.
"""
import numpy as np

from forchheimer.constitutive import ForchheimerLaw, H, H_quadrature, K, fit_k_bounds

law = ForchheimerLaw((0.0, 1.0, 2.0), (1.0, 1.0, 0.5))
print(f"law: {law.to_text().strip()}  (a = {law.degeneracy_a:.4f})")

b = fit_k_bounds(law)
print(f"fitted: d1 (1+xi)^-a <= K <= d2 (1+xi)^-a with d1={b.d1:.4f}, d2={b.d2:.4f}, d3={b.d3:.4f}")

print(f"{'xi':>10} {'K(xi)':>12} {'lower':>12} {'upper':>12} {'H':>14} {'H quad':>14}")
for xi in (0.0, 0.1, 1.0, 10.0, 100.0, 1e4):
    k = float(K(law, xi))
    lo, hi = b.d1 * (1 + xi) ** -b.a, b.d2 * (1 + xi) ** -b.a
    h = float(H(law, xi))
    hq = H_quadrature(law, xi) if xi > 0 else 0.0
    print(f"{xi:10.4g} {k:12.6g} {lo:12.6g} {hi:12.6g} {h:14.8g} {hq:14.8g}")

xi = np.geomspace(1e-6, 1e6, 7)
print("xi^a K(xi) levels off:", " ".join(f"{v:.5f}" for v in xi ** b.a * K(law, xi)))
