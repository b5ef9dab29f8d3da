"""Generalized polynomial Forchheimer laws and the derived permeability K.

A law is g(s) = sum_i a_i s**alpha_i with alpha_0 = 0 < alpha_1 < ... and
a_i > 0.  Velocity magnitude s and pressure-gradient magnitude xi are tied by
s * g(s) = xi, and K(xi) = 1 / g(s(xi)).
"""
from __future__ import annotations

import ast
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError, RootFindingError

ROOT_RTOL = 1e-12


@dataclass(frozen=True)
class ForchheimerLaw:
    exponents: tuple
    coefficients: tuple

    def __post_init__(self):
        e = tuple(float(x) for x in self.exponents)
        c = tuple(float(x) for x in self.coefficients)
        if len(e) == 0 or len(e) != len(c):
            raise ParameterError("exponents and coefficients must be non-empty and of equal length")
        if e[0] != 0.0:
            raise ParameterError("the first exponent must be exactly 0")
        if any(b <= a for a, b in zip(e, e[1:])):
            raise ParameterError("exponents must be strictly increasing")
        if not all(np.isfinite(e)) or not all(np.isfinite(c)):
            raise ParameterError("exponents and coefficients must be finite")
        if any(x <= 0 for x in c):
            raise ParameterError("coefficients must be positive")
        object.__setattr__(self, "exponents", e)
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def from_terms(cls, terms):
        """Build from ordered ``(exponent, coefficient)`` pairs."""
        terms = list(terms)
        return cls(tuple(t[0] for t in terms), tuple(t[1] for t in terms))

    @property
    def N(self) -> int:
        return len(self.exponents) - 1

    @property
    def is_linear_test_mode(self) -> bool:
        return self.N == 0

    @property
    def degeneracy_a(self):
        """a = alpha_N / (alpha_N + 1); ``None`` in linear test mode."""
        if self.N == 0:
            return None
        top = self.exponents[-1]
        return top / (top + 1.0)

    @property
    def terms(self):
        return list(zip(self.exponents, self.coefficients))

    def to_text(self) -> str:
        body = ", ".join(f"[{e!r}, {c!r}]" for e, c in self.terms)
        return f"terms = [{body}]\n"

    @classmethod
    def from_text(cls, text: str):
        key, _, value = text.strip().partition("=")
        if key.strip() != "terms":
            raise ParameterError("expected a 'terms = [...]' line")
        return cls.from_terms(ast.literal_eval(value.strip()))

    # --- evaluation -------------------------------------------------------
    def g(self, s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for e, c in self.terms:
            out = out + c * (s ** e if e else 1.0)
        return out

    def _dsg(self, s):
        # d/ds [s g(s)]
        out = np.zeros_like(s)
        for e, c in self.terms:
            out = out + c * (e + 1.0) * (s ** e if e else 1.0)
        return out


def _check_nonneg(xi):
    xi = np.asarray(xi, dtype=float)
    if np.any(~np.isfinite(xi)) or np.any(xi < 0):
        raise DomainError("argument must be finite and non-negative")
    return xi


def solve_s(law: ForchheimerLaw, xi, max_iter: int = 200):
    """Invert s g(s) = xi elementwise (safeguarded Newton inside a bracket)."""
    xi = _check_nonneg(xi)
    scalar = xi.ndim == 0
    shape = xi.shape
    x = xi.astype(float).ravel()
    a0 = law.coefficients[0]
    if law.N == 0:
        s = x / a0
        return float(s[0]) if scalar else s.reshape(shape)
    lo = np.zeros_like(x)
    hi = np.maximum(1.0, x / a0)
    s = np.minimum(x / a0, hi)
    tol = ROOT_RTOL * np.maximum(1.0, x)
    active = np.ones(x.shape, dtype=bool)
    for _ in range(max_iter):
        sa = s[active]
        F = sa * law.g(sa) - x[active]
        done = np.abs(F) <= tol[active]
        lo_a, hi_a = lo[active], hi[active]
        lo_a = np.where(F < 0, sa, lo_a)
        hi_a = np.where(F > 0, sa, hi_a)
        step = sa - F / law._dsg(sa)
        bad = (step <= lo_a) | (step >= hi_a) | ~np.isfinite(step)
        new = np.where(bad, 0.5 * (lo_a + hi_a), step)
        width_ok = (hi_a - lo_a) <= 4 * np.finfo(float).eps * np.maximum(hi_a, 1e-300)
        done = done | width_ok
        new = np.where(done, sa, new)
        lo[active], hi[active], s[active] = lo_a, hi_a, new
        idx = np.flatnonzero(active)
        active[idx[done]] = False
        if not active.any():
            s = _polish(law, s, x)
            return float(s[0]) if scalar else s.reshape(shape)
    k = np.flatnonzero(active)[0]
    raise RootFindingError(f"s*g(s)=xi did not converge for xi={x[k]!r}", bracket=(lo[k], hi[k]))


def _polish(law, s, x):
    """One extra Newton step, kept only where it lowers the residual."""
    F = s * law.g(s) - x
    d = law._dsg(s)
    t = np.where(d > 0, s - F / d, s)
    t = np.where(np.isfinite(t) & (t >= 0), t, s)
    better = np.abs(t * law.g(t) - x) < np.abs(F)
    return np.where(better, t, s)


def K(law: ForchheimerLaw, xi):
    """Permeability-like coefficient K(xi) = 1/g(s(xi))."""
    s = solve_s(law, xi)
    out = 1.0 / law.g(s)
    return float(out) if np.ndim(out) == 0 else out


def H(law: ForchheimerLaw, xi):
    """H(xi) = int_0^{xi^2} K(sqrt(sigma)) d sigma, in closed form."""
    s = np.asarray(solve_s(law, xi), dtype=float)
    out = s * s * law.g(s)
    for e, c in law.terms:
        out = out + c * e * s ** (e + 2.0) / (e + 2.0)
    return float(out) if out.ndim == 0 else out


def H_quadrature(law: ForchheimerLaw, xi: float) -> float:
    """Reference value of H by adaptive quadrature in the s variable."""
    from scipy.integrate import quad

    s_top = solve_s(law, xi)
    # sigma = xi^2, xi = s g(s): d sigma = 2 xi xi'(s) ds, K = 1/g
    f = lambda s: 2.0 * s * float(law._dsg(np.asarray(s)))
    val, _ = quad(f, 0.0, s_top, epsabs=0.0, epsrel=1e-13, limit=200)
    return val


@dataclass(frozen=True)
class KBounds:
    d1: float
    d2: float
    d3: float
    a: float
    xi_max: float


def fit_grid(xi_max: float, n: int) -> np.ndarray:
    return np.concatenate(([0.0], np.geomspace(xi_max * 1e-9, xi_max, n - 1)))


def fit_k_bounds(law: ForchheimerLaw, xi_max: float = 1e6, n_points: int = 1000) -> KBounds:
    """Fit d1, d2, d3 with
    d1 (1+xi)^-a <= K(xi) <= d2 (1+xi)^-a and d3 (xi^(2-a) - 1) <= K(xi) xi^2.

    Extremes over a log grid are widened by 1 percent in the safe direction.
    """
    if law.N == 0:
        raise ParameterError("bounds on K need N >= 1 (degeneracy exponent undefined)")
    a = law.degeneracy_a
    xi = fit_grid(xi_max, n_points)
    k = K(law, xi)
    h = k * (1.0 + xi) ** a
    d1 = 0.99 * h.min()
    d2 = 1.01 * h.max()
    m = xi ** (2.0 - a) > 1.0
    ratio = k[m] * xi[m] ** 2 / (xi[m] ** (2.0 - a) - 1.0)
    d3 = max(0.99 * ratio.min(), np.finfo(float).tiny)
    return KBounds(float(d1), float(d2), float(d3), a, float(xi_max))


def k_bound_violations(law: ForchheimerLaw, b: KBounds, xi) -> int:
    xi = _check_nonneg(xi)
    k = K(law, xi)
    w = (1.0 + xi) ** (-b.a)
    bad = (k < b.d1 * w) | (k > b.d2 * w) | (b.d3 * (xi ** (2.0 - b.a) - 1.0) > k * xi ** 2)
    return int(np.count_nonzero(bad))
