"""Bound functions g and h, the threshold nu*, and Monte Carlo checks of the bounds."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .bayes import DEFAULT_QUAD, log_j_integral
from .model import ModelConfig
from .prior import PriorSpec, Variant
from .sampling import RngState, sample_noncentral_beta_u, sample_triplets
from .specfun import DomainError, digamma, log_beta, log_reg_inc_beta_vec


class NoRootError(ArithmeticError):
    pass


def g_fn(n, d, nu):
    if not 0 < nu < 1:
        raise DomainError(f"g needs 0 < nu < 1, got {nu}")
    if d <= n:
        b = n * d / 2 - (d - nu) / n
        if not b > 0:
            raise DomainError(f"Beta argument {b} is not positive for (n, d, nu) = ({n}, {d}, {nu})")
        return (log_beta(nu, b) - log_beta(nu, n * d / 2)) / nu
    return (d - nu) / (n * nu * (n * d / 2 - 1)) * math.log1p(nu)


def h_fn(n, d):
    if n < 2 or d < 1:
        raise DomainError(f"h needs n >= 2 and d >= 1, got ({n}, {d})")
    big = 1 + (n + 1) * d / 2
    return big / (n * d / 2) * (digamma(big) - digamma(1 + n * d / 2))


@dataclass(frozen=True)
class NuStarResult:
    d: int
    n: int
    nu_star: float
    bracket: tuple
    tol: float


def nu_star(d, n=2, tol=1e-6, step=1e-3, start=1e-6):
    """Largest nu with g(n, d, nu') >= h(n, d) for every nu' in (0, nu].

    Scans nu upward from ``start`` in steps of ``step`` until g - h first
    turns negative, then refines that bracket with Brent's method.
    """
    if n != 2 or not 1 <= d <= 4:
        raise DomainError(f"nu* is established for n = 2 and 1 <= d <= 4, got n={n}, d={d}")
    h = h_fn(n, d)

    def gap(nu):
        return g_fn(n, d, nu) - h

    lo = start
    if gap(lo) < 0:
        raise NoRootError(f"g - h < 0 already at nu={start} for d={d}")
    while lo + step < 1:
        hi = lo + step
        if gap(hi) < 0:
            root = brentq(gap, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps)
            return NuStarResult(d, n, root, (lo, hi), tol)
        lo = hi
    raise NoRootError(f"no positive root of g - h in (0, 1) for d={d}")


# ---------------------------------------------------------------------------
# Monte Carlo checks of the two lemma inequalities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundCheck:
    name: str
    lhs_estimate: float
    rhs_bound: float
    se: float
    passed: bool


@dataclass(frozen=True)
class LemmaReport:
    d: int
    n: int
    nu: float
    xi: float
    reps: int
    trials: int
    seed: int
    checks: tuple

    @property
    def passed(self):
        return all(c.passed for c in self.checks)


def _stats_from_draws(y, xbar, s, n):
    diff = y - xbar
    xbar1 = (n * xbar + y) / (n + 1)
    s1 = s + n * (diff**2).sum(axis=-1) / (n + 1)
    w_n = n * (xbar**2).sum(axis=-1) / s
    w_n1 = (n + 1) * (xbar1**2).sum(axis=-1) / s1
    return s1, w_n, w_n1


def lemma_terms(y, xbar, s, spec, quad=DEFAULT_QUAD):
    """Per-replicate pieces of both lemma inequalities.

    Returns (a2_lhs, a3_lhs, one_minus_u_next): the log terms whose
    expectations appear on the left-hand sides, and 1 - u_{n+1}.
    Their weighted sum a2 + nu * a3 is the log density ratio p_GM / p_R.
    """
    n, d, nu = spec.n, spec.d, spec.nu
    s1, w_n, w_n1 = _stats_from_draws(y, xbar, s, n)
    log1m_u_n = -np.log1p(w_n)
    log1m_u_n1 = -np.log1p(w_n1)
    a2 = (
        log_beta(nu, (n - 1) * d / 2)
        - log_beta(nu, n * d / 2)
        + log_j_integral(n + 1, w_n1, spec, quad)
        - log_j_integral(n, w_n, spec, quad)
        + nu * (log1m_u_n - log1m_u_n1)
    )
    a3 = math.log1p(1 / n) - np.log(s1 / s) + log1m_u_n1 - log1m_u_n
    return a2, a3, np.exp(log1m_u_n1)


def verify_lemma_bounds(d, n, nu, xi, spec=None, reps=5000, trials=10, seed=0, quad=DEFAULT_QUAD):
    """Check E[a2] >= nu g E(1-u_{n+1}) and E[a3] >= -h E(1-u_{n+1}) by simulation.

    Each inequality is tested as E[lhs - rhs] >= -3 se, using the same draws on
    both sides; the standard error is taken across trial means.
    """
    if spec is None:
        spec = PriorSpec(nu, Variant.LOWDIM, n, d)
    if spec.variant is not Variant.LOWDIM:
        raise ValueError("the lemma bounds are stated for the low-dimensional prior")
    if (spec.n, spec.d) != (n, d) or not math.isclose(spec.nu, nu):
        raise ValueError("spec does not match (n, d, nu)")
    g = g_fn(n, d, nu)
    h = h_fn(n, d)
    model = ModelConfig.from_xi(n, d, xi)
    rows = {"A2": [], "A3": []}
    for t in range(trials):
        y, xbar, s = sample_triplets(RngState(seed, t), model, reps)
        a2, a3, omu = lemma_terms(y, xbar, s, spec, quad)
        rows["A2"].append((a2.mean(), (nu * g * omu).mean(), (a2 - nu * g * omu).mean()))
        rows["A3"].append((a3.mean(), (-h * omu).mean(), (a3 + h * omu).mean()))
    checks = []
    for name, vals in rows.items():
        arr = np.array(vals)
        se = float(arr[:, 2].std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
        gap = float(arr[:, 2].mean())
        checks.append(BoundCheck(name, float(arr[:, 0].mean()), float(arr[:, 1].mean()), se, gap >= -3 * se))
    return LemmaReport(d, n, nu, xi, reps, trials, seed, tuple(checks))


# ---------------------------------------------------------------------------
# High-dimensional bound quantities
# ---------------------------------------------------------------------------


def log_f_cdf(u, l, nu, d):
    """log F_l(u): the Beta(nu, (l-1)d/2) distribution function, in logs."""
    return log_reg_inc_beta_vec(u, nu, (l - 1) * d / 2)


def log_i_integral(l, w, nu, d):
    """log I_l(w) = log[w^(-nu) B(nu, (l-1)d/2) F_l(w / (1 + w))], for w > 0."""
    w = np.asarray(w, dtype=float)
    u = w / (1.0 + w)
    return -nu * np.log(w) + log_beta(nu, (l - 1) * d / 2) + log_f_cdf(u, l, nu, d)


@dataclass(frozen=True)
class HighDimBound:
    value: float
    se: float
    reps: int
    trials: int


def highdim_lower_bound(d, n, nu, xi, reps=5000, trials=10, seed=0):
    """E log F_{n+1}(U') - E log F_n(U) with U' ~ chi2_d(n xi)/(chi2_d(n xi) + chi2_{nd})
    and U ~ chi2_d(n xi)/(chi2_d(n xi) + chi2_{(n-1)d}), independent draws.
    """
    means = []
    for t in range(trials):
        gen = RngState(seed, t).generator()
        u_next = sample_noncentral_beta_u(gen, d, n + 1, xi, n, reps)
        u_now = sample_noncentral_beta_u(gen, d, n, xi, n, reps)
        means.append(log_f_cdf(u_next, n + 1, nu, d).mean() - log_f_cdf(u_now, n, nu, d).mean())
    means = np.array(means)
    se = float(means.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return HighDimBound(float(means.mean()), se, reps, trials)
