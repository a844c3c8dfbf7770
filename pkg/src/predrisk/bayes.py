"""Bayes predictive density under the Gaussian-mixture prior.

Two independent routes to the same density:

* the closed form, which multiplies the Student-t density by a constant,
  a power of s_{n+1}/s_n, and a ratio of one-dimensional lam-integrals J_l;
* the marginal route, which integrates the prior against the likelihood of
  (z, v) numerically over (eta, lam) and takes the (n+1)/n ratio of v * m(z, v).

The marginal route never touches ``log_j_integral`` so it can serve as an oracle.
"""

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import logsumexp, roots_jacobi, roots_legendre

from .model import SingularStatisticError, best_equivariant_logpdf, update_stats
from .specfun import log_beta, log_gamma

W_MAX = 1e300


class QuadratureError(ArithmeticError):
    pass


@dataclass(frozen=True)
class QuadratureConfig:
    node_count: int = 128
    scheme: str = "gauss_jacobi"  # gauss_jacobi | tanh_sinh | adaptive
    abs_tol: float = 1e-13
    rel_tol: float = 1e-10

    def __post_init__(self):
        if self.node_count < 8:
            raise ValueError(f"node_count must be >= 8, got {self.node_count}")
        if self.scheme not in ("gauss_jacobi", "tanh_sinh", "adaptive"):
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")


DEFAULT_QUAD = QuadratureConfig()


# ---------------------------------------------------------------------------
# J_l integrand pieces
#
# With t the integration variable of J_l, substitute z = w t / (1 + w t) and
# z = u s (u = w / (1 + w)).  Then
#
#   J_l(w) = (1 + w)^(-nu) int_0^1 s^(nu-1) (1-s)^beta (1 - u s)^gamma h(t) ds,
#   t = s / (1 + w (1 - s)),   1 - u s = (1 - s) + eps s,   eps = 1 / (1 + w),
#
# where rho(lam) = (1-lam)^beta * smooth, gamma = (l-1)d/2 - 1 - beta and
# h(t) = (1 + (l-1) t)^(d/2 - nu - 1 - beta) * rho_smooth(lam(t)).
# All w-dependence that is not smooth sits in a layer of width ~eps at s = 1,
# so s is split into [0, 1/2], a Jacobi panel [1 - eps/2, 1] and a log-spaced
# Gauss-Legendre panel in between.
# ---------------------------------------------------------------------------


def _log_h(spec, l, t, omt):
    beta = spec.right_exponent
    lam_den = 1.0 + (l - 1) * t
    lam = l * t / lam_den
    oml = omt / lam_den
    return (spec.d / 2 - spec.nu - 1 - beta) * np.log1p((l - 1) * t) + spec.log_rho_regular(lam, oml)


def _gamma_exp(spec, l):
    return (l - 1) * spec.d / 2 - 1 - spec.right_exponent


@functools.lru_cache(maxsize=256)
def _jacobi01(count, left_exp, right_exp):
    """Nodes/log-weights on [0, 1] for the weight x^left_exp (1-x)^right_exp."""
    x, w = roots_jacobi(count, right_exp, left_exp)
    nodes = 0.5 * (1.0 + x)
    log_w = np.log(w) - (left_exp + right_exp + 1.0) * math.log(2.0)
    return nodes, log_w


@functools.lru_cache(maxsize=16)
def _legendre(count):
    return roots_legendre(count)


def _prep_w(w):
    w = np.asarray(w, dtype=float)
    if np.any(w < 0) or np.any(np.isnan(w)):
        raise ValueError("w must be >= 0")
    w = np.minimum(w, W_MAX)
    log1pw = np.log1p(w)
    eps = np.exp(-log1pw)
    return w, log1pw, eps


def _log_j_gauss(l, w, spec, quad):
    w, log1pw, eps = _prep_w(w)
    nu, beta, gam = spec.nu, spec.right_exponent, _gamma_exp(spec, l)
    n_left = quad.node_count // 4
    n_layer = quad.node_count // 4
    n_mid = quad.node_count - n_left - n_layer
    wb, eb = w[..., None], eps[..., None]

    # s in [0, 1/2], weight s^(nu-1)
    x, lw = _jacobi01(n_left, nu - 1.0, 0.0)
    s = 0.5 * x
    lw = lw + nu * math.log(0.5)
    oms = 1.0 - s
    den = oms + eb * s
    t = s / (1.0 + wb * oms)
    log_f = beta * np.log(oms) + gam * np.log(den) + _log_h(spec, l, t, oms / den)
    parts = [logsumexp(lw + log_f, axis=-1)]

    # v = 1 - s in [0, v_a], v_a = min(eps, 1) / 2, weight v^beta
    v_a = 0.5 * eb
    x, lw = _jacobi01(n_layer, beta, 0.0)
    v = v_a * x
    lw = lw + (beta + 1.0) * np.log(v_a)
    den = v + eb * (1.0 - v)
    t = (1.0 - v) / (1.0 + wb * v)
    log_f = (nu - 1.0) * np.log1p(-v) + gam * np.log(den) + _log_h(spec, l, t, v / den)
    parts.append(logsumexp(lw + log_f, axis=-1))

    # v in [v_a, 1/2], y = log v, Gauss-Legendre
    x, gw = _legendre(n_mid)
    lo, hi = np.log(v_a), math.log(0.5)
    half = 0.5 * (hi - lo)
    y = 0.5 * (hi + lo) + half * x
    v = np.exp(y)
    den = v + eb * (1.0 - v)
    t = (1.0 - v) / (1.0 + wb * v)
    with np.errstate(divide="ignore"):
        lw = np.log(gw) + np.log(half)
    log_f = (beta + 1.0) * y + (nu - 1.0) * np.log1p(-v) + gam * np.log(den) + _log_h(spec, l, t, v / den)
    parts.append(logsumexp(lw + log_f, axis=-1))

    return -nu * log1pw + logsumexp(np.stack(parts, axis=-1), axis=-1)


def _de_nodes(count):
    """tanh-sinh nodes x, 1 - x and log dx/dtau on (0, 1), tau in [-6.5, 6.5]."""
    k = max(count // 2, 4)
    tau = np.linspace(-6.5, 6.5, 2 * k + 1)
    h = tau[1] - tau[0]
    q = math.pi * np.sinh(tau)
    log_x = -np.logaddexp(0.0, -q)
    log_omx = -np.logaddexp(0.0, q)
    log_dx = math.log(h) + np.log(math.pi * np.cosh(tau)) + log_x + log_omx
    x, omx = np.exp(log_x), np.exp(log_omx)
    keep = (x > 0) & (omx > 0)
    return x[keep], omx[keep], log_dx[keep]


def _log_j_tanh_sinh(l, w, spec, quad):
    # Same three panels as the Gauss rule, each integrated with the DE rule.
    # The endpoint powers are absorbed by r = s^nu and r = v^(beta+1), so the
    # DE rule only sees smooth integrands even for nu near 0.
    w, log1pw, eps = _prep_w(w)
    nu, beta, gam = spec.nu, spec.right_exponent, _gamma_exp(spec, l)
    x, omx, log_dx = _de_nodes(quad.node_count)
    log_x = np.log(x)
    wb, eb = w[..., None], eps[..., None]

    # s = (1/2) r^(1/nu): s^(nu-1) ds = (1/2)^nu / nu dr
    s = 0.5 * np.exp(log_x / nu)
    oms = 1.0 - s
    den = oms + eb * s
    t = s / (1.0 + wb * oms)
    log_f = beta * np.log(oms) + gam * np.log(den) + _log_h(spec, l, t, oms / den)
    parts = [logsumexp(log_dx + nu * math.log(0.5) - math.log(nu) + log_f, axis=-1)]

    # v = v_a r^(1/(beta+1)): v^beta dv = v_a^(beta+1) / (beta+1) dr
    v_a = 0.5 * eb
    v = v_a * np.exp(log_x / (beta + 1.0))
    den = v + eb * (1.0 - v)
    t = (1.0 - v) / (1.0 + wb * v)
    log_f = (nu - 1.0) * np.log1p(-v) + gam * np.log(den) + _log_h(spec, l, t, v / den)
    log_scale = (beta + 1.0) * np.log(v_a) - math.log(beta + 1.0)
    parts.append(logsumexp(log_dx + log_scale + log_f, axis=-1))

    lo, hi = np.log(v_a), math.log(0.5)
    y = lo + (hi - lo) * x
    v = np.exp(y)
    den = v + eb * (1.0 - v)
    t = (1.0 - v) / (1.0 + wb * v)
    log_f = (beta + 1.0) * y + (nu - 1.0) * np.log1p(-v) + gam * np.log(den) + _log_h(spec, l, t, v / den)
    with np.errstate(divide="ignore"):
        log_len = np.log(hi - lo)
    parts.append(logsumexp(log_dx + log_len + log_f, axis=-1))

    return -nu * log1pw + logsumexp(np.stack(parts, axis=-1), axis=-1)


def _quad_checked(func, a, b, quad, **kwargs):
    val, err, *rest = integrate.quad(
        func, a, b, epsabs=0.0, epsrel=quad.rel_tol, limit=500, full_output=1, **kwargs
    )
    # QUADPACK appends a warning message only when it did not converge cleanly
    if len(rest) > 1 and err > quad.rel_tol * abs(val) + quad.abs_tol:
        msg = str(rest[1]).splitlines()[0]
        raise QuadratureError(f"adaptive quadrature failed on [{a}, {b}]: {msg} (est. error {err:.3g})")
    return val


def _log_j_adaptive_scalar(l, w, spec, quad):
    # Direct adaptive integration in the original variable t, split at
    # t_a ~ 1/w and t = 1/2; endpoint singularities go into QUADPACK's
    # algebraic weight.
    nu, beta = spec.nu, spec.right_exponent
    alpha = (l - 1) * spec.d / 2 + nu
    w = min(float(w), W_MAX)
    # Factor (1 + w)^(-alpha) out of the right panel and w-scaling out of the left.
    t_a = 0.5 if w <= 2.0 else 1.0 / w

    def body(t):
        return math.exp(float(_log_h(spec, l, t, 1.0 - t)))

    def left(t):  # weight t^(nu-1)
        return (1.0 - t) ** beta * body(t) * (1.0 + w * t) ** -alpha

    def middle(t):
        return t ** (nu - 1.0) * (1.0 - t) ** beta * body(t) * ((1.0 + w * t) / (1.0 + w)) ** -alpha

    def right(t):  # weight (1-t)^beta
        return t ** (nu - 1.0) * body(t) * ((1.0 + w * t) / (1.0 + w)) ** -alpha

    log_scale = -alpha * math.log1p(w)
    total = _quad_checked(left, 0.0, t_a, quad, weight="alg", wvar=(nu - 1.0, 0.0)) * math.exp(-log_scale)
    if t_a < 0.5:
        pts = [p for p in t_a * np.logspace(1, 20, 20) if p < 0.5]
        total += _quad_checked(middle, t_a, 0.5, quad, points=pts or None)
    total += _quad_checked(right, 0.5, 1.0, quad, weight="alg", wvar=(0.0, beta))
    return math.log(total) + log_scale


def log_j_integral(l, w, spec, quad=DEFAULT_QUAD):
    """log J_l(w), vectorized over w.

    J_l(w) = int_0^1 t^(nu-1) (1+(l-1)t)^(d/2-nu-1) (1+w t)^(-(l-1)d/2-nu)
             rho(l t / (1 + (l-1) t)) dt.
    """
    if l < 2:
        raise ValueError(f"l must be >= 2, got {l}")
    if quad.scheme == "gauss_jacobi":
        out = _log_j_gauss(l, w, spec, quad)
    elif quad.scheme == "tanh_sinh":
        out = _log_j_tanh_sinh(l, w, spec, quad)
    else:
        w_arr = np.asarray(w, dtype=float)
        if np.any(w_arr < 0):
            raise ValueError("w must be >= 0")
        out = np.vectorize(lambda x: _log_j_adaptive_scalar(l, x, spec, quad), otypes=[float])(w_arr)
    return float(out) if np.ndim(out) == 0 else out


def j_integral(l, w, spec, quad=DEFAULT_QUAD):
    return np.exp(log_j_integral(l, w, spec, quad))


def log_c_b(spec):
    """log of (1 + 1/n)^nu B(nu, (n-1)d/2) / B(nu, nd/2)."""
    n, d, nu = spec.n, spec.d, spec.nu
    return nu * math.log1p(1.0 / n) + log_beta(nu, (n - 1) * d / 2) - log_beta(nu, n * d / 2)


def gm_log_ratio(y, xbar, s, spec, quad=DEFAULT_QUAD):
    """log p_GM(y | xbar, s) - log p_R(y | xbar, s), batched over leading axes.

    ``y`` and ``xbar`` have shape (..., d), ``s`` shape (...); n comes from ``spec``.
    """
    y = np.asarray(y, dtype=float)
    xbar = np.asarray(xbar, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise SingularStatisticError("the predictive density is undefined for s = 0")
    n = spec.n
    diff = y - xbar
    xbar1 = (n * xbar + y) / (n + 1)
    s1 = s + n * (diff**2).sum(axis=-1) / (n + 1)
    w_n = n * (xbar**2).sum(axis=-1) / s
    w_n1 = (n + 1) * (xbar1**2).sum(axis=-1) / s1
    out = (
        log_c_b(spec)
        - spec.nu * np.log(s1 / s)
        + log_j_integral(n + 1, w_n1, spec, quad)
        - log_j_integral(n, w_n, spec, quad)
    )
    return float(out) if np.ndim(out) == 0 else out


def _check_stats(stats, spec):
    if stats.count != spec.n:
        raise ValueError(f"stats.count={stats.count} does not match the prior's n={spec.n}")
    if stats.d != spec.d:
        raise ValueError(f"stats dimension {stats.d} does not match the prior's d={spec.d}")


def gm_predictive_logpdf(y, stats, spec, quad=DEFAULT_QUAD):
    """log p_GM(y | xbar, s) via the closed form in J_{n+1}/J_n; batched over y."""
    _check_stats(stats, spec)
    if stats.s <= 0:
        raise SingularStatisticError("the predictive density is undefined for s = 0")
    return gm_log_ratio(y, stats.xbar, stats.s, spec, quad) + best_equivariant_logpdf(y, stats)


# ---------------------------------------------------------------------------
# Marginal route (oracle)
# ---------------------------------------------------------------------------

_LOG_ETA_GRID = np.arange(-150.0, 150.0 + 1e-9, 0.05)


def _log_eta_integral(z2, v, l, d, c, a):
    """log int_0^inf phi(z; 0, c/eta) eta chi2pdf(eta v; (l-1)d) eta^a d eta.

    Trapezoid rule in x = log eta over a fixed wide grid; the integrand is
    analytic and decays at both ends, so the rule converges geometrically.
    """
    k = (l - 1) * d
    x = _LOG_ETA_GRID
    eta = np.exp(x)
    log_phi = 0.5 * d * (x - math.log(2 * math.pi * c)) - 0.5 * eta * z2 / c
    ev = eta * v
    log_chi2 = (0.5 * k - 1.0) * np.log(ev) - 0.5 * ev - 0.5 * k * math.log(2.0) - log_gamma(0.5 * k)
    log_f = log_phi + x + log_chi2 + a * x + x  # last x: d eta = eta dx
    return float(logsumexp(log_f) + math.log(x[1] - x[0]))


def log_marginal_rho(z, v, l, spec, quad=DEFAULT_QUAD):
    """log of v * m(z, v; l) by numerical integration over (eta, lam).

    The mu-integral is the Gaussian convolution N(z; 0, (1/l + (1-lam)/lam)/eta);
    eta is integrated on a log grid and lam adaptively with QUADPACK's
    algebraic endpoint weight lam^(nu-1) (1-lam)^beta.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if z.shape != (spec.d,):
        raise ValueError(f"z must have length d={spec.d}")
    if not v > 0:
        raise SingularStatisticError(f"v must be > 0, got {v}")
    z2 = float(z @ z)
    nu, beta, a = spec.nu, spec.right_exponent, spec.a

    def log_outer(lam):
        # QUADPACK's algebraic-weight rule may sample the endpoints themselves.
        lam = min(max(lam, 1e-300), 1.0 - 1e-16)
        c = 1.0 / l + (1.0 - lam) / lam
        log_prior = a * math.log(lam) + float(spec.log_rho(lam, 1.0 - lam))
        log_weight = (nu - 1.0) * math.log(lam) + beta * math.log1p(-lam)
        return _log_eta_integral(z2, v, l, spec.d, c, a) + log_prior - log_weight

    # Rescale so the outer integrand is O(1) where it matters.
    shift = max(log_outer(x) for x in (1e-6, 1e-3, 0.1, 0.5, 0.9))
    val = _quad_checked(
        lambda lam: math.exp(log_outer(lam) - shift), 0.0, 1.0, quad, weight="alg", wvar=(nu - 1.0, beta)
    )
    if not val > 0:
        raise QuadratureError("marginal integral is not positive")
    return math.log(v) + shift + math.log(val)


def marginal_rho(z, v, l, spec, quad=DEFAULT_QUAD):
    return math.exp(log_marginal_rho(z, v, l, spec, quad))


def brute_force_predictive_logpdf(y, stats, spec, quad=DEFAULT_QUAD):
    """log p_GM(y | xbar, s) = log[rho(xbar_{n+1}, s_{n+1}; n+1) / rho(xbar, s; n)] + log p_R."""
    if spec.d > 2:
        raise ValueError("brute-force oracle is limited to d <= 2")
    _check_stats(stats, spec)
    nxt = update_stats(stats, y)
    return (
        log_marginal_rho(nxt.xbar, nxt.s, spec.n + 1, spec, quad)
        - log_marginal_rho(stats.xbar, stats.s, spec.n, spec, quad)
        + best_equivariant_logpdf(y, stats)
    )
