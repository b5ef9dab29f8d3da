"""Executable form of the two-exponent Moser recursion and its closed-form bound.

The recursion is

    z_{j+1} <= A**(omega_j/kappa_j) * (z_j**r_j + z_j**s_j)**(1/kappa_j)

with beta_j = r_j/kappa_j <= gamma_j = s_j/kappa_j.  The closed form bounds
z_j by (2A)**(G_j abar_j) * max(y0**(gamma_0...gamma_{j-1}), y0**(beta_0...beta_{j-1})).
Everything is evaluated in log space.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ForchheimerError, ParameterError


@dataclass
class IterationSpec:
    A: float
    omega: np.ndarray
    kappa: np.ndarray
    r: np.ndarray
    s: np.ndarray
    y0: float

    def __post_init__(self):
        self.omega, self.kappa, self.r, self.s = (
            np.atleast_1d(np.asarray(v, dtype=float)) for v in (self.omega, self.kappa, self.r, self.s))
        n = len(self.omega)
        if n == 0 or any(len(v) != n for v in (self.kappa, self.r, self.s)):
            raise ParameterError("omega, kappa, r, s must be non-empty and of equal length")
        if not self.A >= 1.0:
            raise ParameterError("A must be >= 1")
        # the closed form genuinely needs omega_j >= 1 (a counterexample exists otherwise)
        if np.any(self.omega < 1.0):
            raise ParameterError("omega_j must be >= 1")
        if np.any(self.kappa <= 0) or np.any(self.r <= 0) or np.any(self.s < self.r):
            raise ParameterError("need kappa_j > 0 and 0 < r_j <= s_j")
        if not self.y0 >= 0:
            raise ParameterError("y0 must be >= 0")

    @property
    def length(self):
        return len(self.omega)

    @property
    def beta(self):
        return self.r / self.kappa

    @property
    def gamma(self):
        return self.s / self.kappa


def _log(x):
    with np.errstate(divide="ignore"):
        return np.log(x)


def recursion_log_trajectory(spec: IterationSpec) -> np.ndarray:
    """log z_j for j = 0..J, iterating the recursion with equality."""
    out = np.empty(spec.length + 1)
    lz = _log(spec.y0)
    out[0] = lz
    logA = np.log(spec.A)
    for j in range(spec.length):
        if np.isneginf(lz):
            inner = -np.inf
        else:
            inner = np.logaddexp(spec.r[j] * lz, spec.s[j] * lz)
        lz = (spec.omega[j] * logA + inner) / spec.kappa[j]
        out[j + 1] = lz
    return out


def recursion_trajectory(spec: IterationSpec) -> np.ndarray:
    with np.errstate(over="ignore"):
        return np.exp(recursion_log_trajectory(spec))


def _max_contiguous_log_products(log_factors):
    """G_j for j = 0..len: max(1, products over 1 <= m <= n < j)."""
    n = len(log_factors)
    G = np.zeros(n + 1)
    best = 0.0
    ending = -np.inf
    for j in range(2, n + 1):
        v = log_factors[j - 1]
        ending = v if ending < 0 else ending + v
        best = max(best, ending)
        G[j] = best
    return G  # logs


def closed_form_log_bounds(spec: IterationSpec) -> np.ndarray:
    """log of the closed-form bound for j = 0..J (j = 0 gives log y0)."""
    J = spec.length
    lg, lb = np.log(spec.gamma), np.log(spec.beta)
    logG = _max_contiguous_log_products(lg)
    abar = np.concatenate(([0.0], np.cumsum(spec.omega / spec.kappa)))
    Gam = np.exp(np.concatenate(([0.0], np.cumsum(lg))))
    Bet = np.exp(np.concatenate(([0.0], np.cumsum(lb))))
    ly = _log(spec.y0)
    with np.errstate(invalid="ignore"):
        tail = np.maximum(Gam * ly, Bet * ly)
    out = np.log(2.0 * spec.A) * np.exp(logG) * abar + tail
    out[0] = ly
    return out[: J + 1]


def closed_form_bound(spec: IterationSpec, j: int) -> float:
    with np.errstate(over="ignore"):
        return float(np.exp(closed_form_log_bounds(spec)[j]))


def single_exponent_bound(A, alphas, betas, y0, j):
    """Single-exponent variant: A**(B_j sum_{i<j} alpha_i) * y0**(beta_0...beta_{j-1})."""
    alphas = np.asarray(alphas, float)[:j]
    betas = np.asarray(betas, float)[:j]
    B = np.exp(_max_contiguous_log_products(np.log(betas))[j])
    with np.errstate(over="ignore"):
        return float(A ** (B * alphas.sum()) * y0 ** np.prod(betas))


@dataclass
class DominanceReport:
    passed: bool
    max_ratio: float
    argmax_j: int
    log_ratios: np.ndarray
    spec: IterationSpec


class DominanceViolation(ForchheimerError, AssertionError):
    pass


def verify_dominance(spec: IterationSpec, slack: float = 1e-12,
                     raise_on_violation: bool = False) -> DominanceReport:
    """Check z_j <= bound_j for every j (relative slack, compared in log space).

    A rounding allowance of a few ulps of |log bound| is added on top of ``slack``.
    """
    lz = recursion_log_trajectory(spec)
    lb = closed_form_log_bounds(spec)
    with np.errstate(invalid="ignore"):
        d = np.where(np.isneginf(lz), -np.inf, lz - lb)
    allow = np.log1p(slack) + 64 * np.finfo(float).eps * np.abs(np.nan_to_num(lb, neginf=0.0))
    ok = bool(np.all(d <= allow))
    k = int(np.argmax(d))
    with np.errstate(over="ignore"):
        ratio = float(np.exp(d[k])) if np.isfinite(d[k]) else 0.0
    rep = DominanceReport(ok, ratio, k, d, spec)
    if not ok and raise_on_violation:
        raise DominanceViolation(f"bound violated at j={k}: {spec!r}")
    return rep


FAMILIES = ("standard", "above", "below", "crossing")


def random_spec(rng: np.random.Generator, family: str = "standard", length: int = 24) -> IterationSpec:
    """Draw a random admissible spec.

    'standard' draws A in [1,10], kappa_j = kappa0 q^j with q in (1,2], omega_j in
    [1,2] and 0 < r_j <= s_j <= 1.5 kappa_j.  The other families force the
    trajectory to stay above one, below one, or cross from below to above.
    """
    j = np.arange(length)
    if family == "standard":
        A = rng.uniform(1.0, 10.0)
        k = rng.uniform(1.0, 3.0) * rng.uniform(1.0 + 1e-6, 2.0) ** j
        s = rng.uniform(0.0, 1.5, length) * k
        r = rng.uniform(0.0, 1.0, length) * s
        r = np.maximum(r, 1e-3 * k)
        s = np.maximum(s, r)
        y0 = float(np.exp(rng.uniform(-3, 3)))
        return IterationSpec(A, rng.uniform(1.0, 2.0, length), k, r, s, y0)
    if family == "above":
        k = 2.0 * rng.uniform(1.1, 2.0) ** j
        r = rng.uniform(0.5, 1.0, length) * k
        return IterationSpec(rng.uniform(1, 5), rng.uniform(1, 2, length), k, r,
                             r * rng.uniform(1.0, 1.2, length), float(rng.uniform(1.0, 5.0)))
    if family == "below":
        k = 2.0 * 2.0 ** j
        return IterationSpec(1.0, np.ones(length), k, k, k * rng.uniform(1.0, 1.3, length),
                             float(rng.uniform(1e-4, 1e-2)))
    if family == "crossing":
        k = rng.uniform(1.0, 2.0) * rng.uniform(1.1, 2.0) ** j
        s = rng.uniform(1.0, 1.5, length) * k
        return IterationSpec(rng.uniform(20.0, 100.0), rng.uniform(1, 2, length), k,
                             s * rng.uniform(0.5, 1.0, length), s, float(rng.uniform(0.05, 0.5)))
    raise ParameterError(f"unknown family {family!r}")


def classify(spec: IterationSpec) -> str:
    lz = recursion_log_trajectory(spec)
    if lz[0] >= 0:
        return "above"
    if np.all(lz < 0):
        return "below"
    return "crossing"


def telescoping_spec(length: int = 60) -> IterationSpec:
    """A = 1, kappa_j = 2^(j+1), r = s = kappa, omega = 1, y0 = 1: z_j = 2^(1 - 2^-j)."""
    k = 2.0 ** (np.arange(length) + 1)
    return IterationSpec(1.0, np.ones(length), k, k, k, 1.0)
