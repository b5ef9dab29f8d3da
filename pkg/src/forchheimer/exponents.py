"""Exponent algebra for the a-priori estimates and the Moser schedules.

Everything here is closed-form arithmetic on (lambda, a, n, alpha) except the
global schedule, where each alpha_j solves alpha + mu1(alpha) = beta_j.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .constitutive import ForchheimerLaw
from .errors import (ConfigurationError, ExponentConditionError, ParameterError,
                     ScheduleError, SubcriticalError, TruncationError)


@dataclass(frozen=True)
class ExponentTable:
    lam: float
    a: float
    n: int

    @property
    def delta(self):
        return 1.0 - self.lam

    @property
    def alpha_star(self):
        return self.n * (self.a - self.delta) / (2.0 - self.a)

    @property
    def mu0(self):
        return (self.a - self.delta) / (1.0 - self.a)

    @property
    def supercritical(self):
        return self.a > self.delta


def build_table(lam: float, law_or_a, n: int) -> ExponentTable:
    """Collect the base exponents; ``law_or_a`` is a law or the value of a."""
    if not 0.0 < lam <= 1.0:
        raise ParameterError("lambda must lie in (0, 1]")
    if int(n) != n or n < 1:
        raise ParameterError("dimension n must be a positive integer")
    if isinstance(law_or_a, ForchheimerLaw):
        a = law_or_a.degeneracy_a
        if a is None:
            raise ParameterError("linear test mode (N = 0) has no degeneracy exponent")
    else:
        a = float(law_or_a)
        if not 0.0 < a < 1.0:
            raise ParameterError("a must lie in (0, 1)")
    if n == 1:
        warnings.warn("n = 1: the embedding exponent 2-a is not below n; estimates are formal",
                      stacklevel=2)
    return ExponentTable(float(lam), float(a), int(n))


def _require_super(t: ExponentTable):
    if not t.supercritical:
        raise SubcriticalError(
            "a > delta",
            f"degeneracy a={t.a!r} does not exceed delta={t.delta!r}; "
            "the estimates in this package only cover the super-critical case")


def theta(t: ExponentTable, alpha):
    return 1.0 / ((1.0 - t.a) * (alpha / t.alpha_star - 1.0))


def mu1(t: ExponentTable, alpha):
    th = theta(t, alpha)
    return t.mu0 * (1.0 + th * (1.0 - t.a)) / (1.0 - th)


def kappa(t: ExponentTable, alpha):
    return 1.0 + (2.0 - t.a) / t.n - (t.a - t.delta) / alpha


def theta_tilde(t: ExponentTable, alpha):
    return 1.0 / (1.0 + alpha * (2.0 - t.a) / (t.n * (alpha + t.delta - t.a)))


def kappa_bar(t: ExponentTable, alpha):
    return kappa(t, alpha) * alpha / (alpha + mu1(t, alpha))


@dataclass(frozen=True)
class AlphaDerived:
    table: ExponentTable
    alpha: float
    theta: float
    mu1: float
    mu2: float
    mu3: float | None
    mu4: float
    kappa: float
    theta_tilde: float
    kappa_bar: float
    c_star: float = 1.0
    D3: float | None = None
    D4: float | None = None

    @property
    def a(self):
        return self.table.a

    @property
    def delta(self):
        return self.table.delta


def _exp(x):
    return math.exp(x) if x < 709.0 else math.inf


def compute_D3(t: ExponentTable, alpha, th, c_star, U_measure):
    a, d = t.a, t.delta
    return _exp(th * (alpha + d - a) * math.log(2.0)
                + (2.0 - a) * (1.0 + th * (1.0 - a)) / (1.0 - a) * math.log(c_star)
                + (2.0 - a) / (1.0 - a) * math.log(alpha)
                + (1.0 - a) * (alpha + t.mu0) * th / alpha * math.log(U_measure))


def compute_D4(t: ExponentTable, alpha, th, c_star):
    a, d = t.a, t.delta
    return _exp(th * (alpha + d - a) / (1.0 - th) * math.log(2.0)
                + (2.0 - a) * (1.0 + th * (1.0 - a)) / ((1.0 - a) * (1.0 - th)) * math.log(c_star * alpha))


def derive_alpha(t: ExponentTable, alpha: float, c_star: float = 1.0,
                 U_measure: float | None = None) -> AlphaDerived:
    """All alpha-dependent exponents and the trace constants D3, D4."""
    _require_super(t)
    alpha = float(alpha)
    if alpha < 2.0 - t.delta:
        raise ExponentConditionError("alpha >= 2 - delta")
    if alpha <= t.n * t.mu0 or not 0.0 < theta(t, alpha) < 1.0:
        raise ExponentConditionError("alpha > n*mu0")
    a = t.a
    th = theta(t, alpha)
    m1 = mu1(t, alpha)
    m2 = 1.0 / (1.0 - a) + th * (2.0 - a) / ((1.0 - th) * (1.0 - a))
    thr = t.lam + 1.0 + t.mu0
    m3 = (2.0 - a) * alpha / ((1.0 - a) * (alpha - thr)) if alpha > thr else None
    k = kappa(t, alpha)
    D3 = None if U_measure is None else compute_D3(t, alpha, th, c_star, U_measure)
    return AlphaDerived(t, alpha, th, m1, m2, m3, m2 + 1.0, k, theta_tilde(t, alpha),
                        k * alpha / (alpha + m1), c_star, D3, compute_D4(t, alpha, th, c_star))


def alpcond(t: ExponentTable, alpha: float) -> bool:
    return alpha >= 2.0 - t.delta and alpha > t.alpha_star


def x_star(t: ExponentTable) -> float:
    a = t.a
    return (2.0 + math.sqrt((2.0 - a) * (2.0 + 1.0 / t.n) - 1.0)) / (1.0 - a)


def kappa_bar_exceeds_one(t: ExponentTable, alpha0: float) -> bool:
    """Quadratic criterion equivalent to kappa_bar(alpha0) > 1."""
    a, s = t.a, t.alpha_star
    return (1.0 - a) * alpha0 ** 2 - 2.0 * (2.0 - a) * s * alpha0 + (2.0 - a) * s ** 2 > 0.0


# ---------------------------------------------------------------------------
# Moser schedules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InteriorSchedule:
    alpha0: float
    kappa_star: float
    alphas: np.ndarray
    mu: float
    nu: float
    G: float
    omega: float
    tail: float


@dataclass(frozen=True)
class MoserSchedule:
    table: ExponentTable
    alpha0: float
    theta_star: float
    mu_star: float
    kappa_star: float
    kappa_bar_star: float
    kappa_hat_star: float
    betas: np.ndarray
    alphas: np.ndarray
    mu_tilde: float
    nu_tilde: float
    G: float
    omega: float
    mu5: float
    mu6: float
    mu7: float
    omega1: float
    omega2: float
    omega3: float
    tail: float
    interior: InteriorSchedule | None = None
    meta: dict = field(default_factory=dict)

    @property
    def beta0(self):
        return float(self.betas[0])


def _series_tail(first_j, alpha_J, q):
    # bound on sum_{j>J} (j+1)/alpha_j when alpha_j >= alpha_J q^{-(j-J)}
    J = first_j
    return ((J + 1) * q / (1.0 - q) + q / (1.0 - q) ** 2) / alpha_J


def build_interior_schedule(t: ExponentTable, alpha0: float, j_max: int = 64,
                            tail_tol: float = 1e-10) -> InteriorSchedule:
    """Geometric schedule alpha_j = alpha0 kappa^j for the interior iteration."""
    _require_super(t)
    if not alpha0 > 2.0 - t.delta:
        raise ScheduleError("alpha0 > 2 - delta")
    if not alpcond(t, alpha0):
        raise ScheduleError("alpha0 > alpha_star")
    ks = kappa(t, alpha0)
    j = np.arange(j_max + 1)
    alphas = alpha0 * ks ** j
    a, d = t.a, t.delta
    log_mu = np.sum(np.log((alphas - 2.0 + d) / alphas))
    log_nu = np.sum(np.log(alphas / (alphas + d - a)))
    q = 1.0 / ks
    aJ = alphas[-1] * ks
    # |log(1 - c/x)| <= c/(x-c) for 0 < c < x; terms shrink by >= 1/kappa
    c_mu, c_nu = 2.0 - d, a - d
    if aJ <= 2 * c_mu:
        raise TruncationError("interior schedule: j_max too small for a tail bound")
    tail_mu = c_mu / (aJ - c_mu) / (1.0 - q)
    tail_nu = c_nu / aJ / (1.0 - q)
    tail_sum = _series_tail(j_max, alphas[-1], q)
    tail = max(tail_mu, tail_nu)
    if tail > tail_tol:
        raise TruncationError(f"interior tail bound {tail:.3e} exceeds {tail_tol:.1e}; raise j_max")
    mu = math.exp(log_mu - tail_mu)  # lower estimate of a product < 1
    nu = math.exp(log_nu + tail_nu)  # upper estimate of a product > 1
    G = nu * (alpha0 + d - a) / alpha0
    omega = G * (float(np.sum((j + 1) / alphas)) + tail_sum)
    return InteriorSchedule(alpha0, ks, alphas, mu, nu, G, omega, tail)


def build_schedule(t: ExponentTable, alpha0: float, j_max: int | None = 64,
                   tail_tol: float = 1e-10, interior: bool = True) -> MoserSchedule:
    """Global schedule: beta_j = kbar^j beta0 and alpha_j + mu1(alpha_j) = beta_j.

    ``j_max=None`` doubles the truncation index from 64 up to 1024 until the
    tail is certified.
    """
    if j_max is None:
        for jm in (64, 128, 256, 512, 1024):
            try:
                return build_schedule(t, alpha0, jm, tail_tol, interior)
            except TruncationError:
                if jm == 1024:
                    raise
    _require_super(t)
    a, d = t.a, t.delta
    xs = x_star(t)
    threshold = max(2.0 - d, (1.0 + xs) * t.alpha_star)
    if not alpha0 > threshold:
        raise ScheduleError("alpha0 > max(2 - delta, (1 + x_star) alpha_star)",
                            f"alpha0={alpha0!r} must exceed {threshold!r}")
    th_s = theta(t, alpha0)
    mu_s = mu1(t, alpha0)
    k_s = kappa(t, alpha0)
    kb_s = kappa_bar(t, alpha0)
    x_hat = alpha0 / t.alpha_star - 1.0
    eps_hat = kb_s - 1.0 - (2.0 - a) / (t.n * ((1.0 - a) * x_hat - 1.0))
    kh_s = 1.0 + eps_hat
    if not (kb_s > 1.0 and kh_s > 1.0):
        raise ScheduleError("kappa_hat_star > 1")

    beta0 = alpha0 + mu_s
    betas = beta0 * kb_s ** np.arange(j_max + 1)
    alphas = np.empty_like(betas)
    alphas[0] = alpha0
    f = lambda x, b: x + mu1(t, x) - b
    for j in range(1, j_max + 1):
        lo = alphas[j - 1]
        alphas[j] = brentq(f, lo, betas[j], args=(betas[j],), xtol=1e-15 * betas[j],
                           rtol=4 * np.finfo(float).eps, maxiter=500)

    log_mu = float(np.sum(np.log((alphas + d - 2.0) / betas)))
    log_nu = float(np.sum(np.log(betas / (alphas + d - a))))
    q = 1.0 / kh_s
    aJ = kh_s * alphas[-1]
    c_mu = mu_s + 2.0 - d
    c_nu = mu_s + a - d
    if aJ <= 2 * c_mu:
        raise TruncationError("global schedule: j_max too small for a tail bound")
    tail_mu = c_mu / (aJ - c_mu) / (1.0 - q)
    tail_nu = c_nu / (aJ + d - a) / (1.0 - q)
    tail = max(tail_mu, tail_nu)
    if tail > tail_tol:
        raise TruncationError(f"global tail bound {tail:.3e} exceeds {tail_tol:.1e}; raise j_max")
    mu_t = math.exp(log_mu - tail_mu)
    nu_t = math.exp(log_nu + tail_nu)
    G = nu_t * (alpha0 + d - a) / beta0
    j = np.arange(j_max + 1)
    omega = G * (float(np.sum((j + 1) / alphas)) + _series_tail(j_max, alphas[-1], q))

    z1 = (2.0 - a) ** 2 / ((1.0 - a) * (1.0 - th_s))
    mu5 = 6.0 - a + 2.0 * z1
    mu6 = max(2.0, t.mu0 / (1.0 - th_s))
    mu4_0 = (2.0 - a) / ((1.0 - a) * (1.0 - th_s))
    mu7 = 2.0 * mu4_0
    inner = None
    if interior:
        inner = build_interior_schedule(t, alpha0, j_max=j_max, tail_tol=tail_tol)
    return MoserSchedule(t, float(alpha0), th_s, mu_s, k_s, kb_s, kh_s, betas, alphas,
                         mu_t, nu_t, G, omega, mu5, mu6, mu7, 2.0 * omega,
                         (1.0 + mu6) * omega, mu7 * omega, tail, inner,
                         {"j_max": j_max, "tail_tol": tail_tol, "x_star": xs})


# ---------------------------------------------------------------------------
# Constants of the L-infinity estimates (unknown generic constants default to 1)
# ---------------------------------------------------------------------------

def eval_interior_constants(d: AlphaDerived, rho, R, T1, T2, T, ball_measure,
                            c9: float = 1.0, c10: float = 1.0):
    """Return (C_alpha, A_alpha) of the interior energy recursion."""
    if not (0 < rho < R and 0 <= T1 < T2 <= T):
        raise ParameterError("need 0 < rho < R and 0 <= T1 < T2 <= T")
    a, al = d.a, d.alpha
    bracket = 1.0 + 1.0 / (T2 - T1) + 1.0 / (R - rho) ** (2.0 - a)
    vol = 1.0 + ball_measure * T
    C = c9 * al ** 2 * vol * bracket
    A = c10 * (1.0 + 1.0 / rho) ** (2.0 - a) * al ** (6.0 - a) * vol ** 2 * bracket ** 2
    return C, A


def eval_global_constants(d: AlphaDerived, T1, T2, T, U_measure, phi_minus_sup,
                          d3, c11: float = 1.0, c12: float = 1.0):
    """Return (M, A_tilde, E) with E = [E1, ..., E5]."""
    if d3 is None:
        raise ConfigurationError("the fitted constant d3 is required")
    if not 0 <= T1 < T2 <= T:
        raise ParameterError("need 0 <= T1 < T2 <= T")
    t = d.table
    a, dl, al, m1, m0 = t.a, t.delta, d.alpha, d.mu1, t.mu0
    D3 = d.D3 if d.D3 is not None else compute_D3(t, al, d.theta, d.c_star, U_measure)
    D4 = d.D4
    UT = U_measure * T
    phi = phi_minus_sup
    E = [
        UT ** (m1 / (al + m1)) / (T2 - T1),
        UT ** ((m1 - dl + 2.0) / (al + m1)),
        UT ** (m1 / (al + m1)) * phi,
        D3 * U_measure ** (m1 * (al + m0) / (al * (al + m1))) * T ** ((m1 - m0) / (al + m1))
        * phi ** ((2.0 - a) / (1.0 - a)),
        D4 * (d3 / 4.0) ** (-d.mu2) * U_measure ** (m1 / al) * phi ** d.mu4,
    ]
    M = c11 * al ** 2 * sum(E)
    A = c12 * al ** (2.0 - a) * (UT ** ((m1 + a - dl) * al / ((al + m1) * (al + dl - a)))
                                 + M ** (al / (al + m1)) + M ** (al / (al + dl - a)))
    return M, A, E
