"""Scalar special functions: log-gamma, digamma, log-beta, regularized incomplete beta."""

import math

import numpy as np


class DomainError(ValueError):
    pass


def log_gamma(x):
    """log Gamma(x) for x > 0 (CPython's Lanczos-based lgamma)."""
    x = float(x)
    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


# Bernoulli-number coefficients B_2k / (2k) of the asymptotic digamma series.
_DIGAMMA_ASYMP = (
    1.0 / 12,
    -1.0 / 120,
    1.0 / 252,
    -1.0 / 240,
    1.0 / 132,
    -691.0 / 32760,
    1.0 / 12,
)


def digamma(x):
    """psi(x) = d/dx log Gamma(x) for x > 0.

    Shifts x up to >= 6 with psi(x) = psi(x + 1) - 1/x, then sums the
    asymptotic expansion log x - 1/(2x) - sum B_2k / (2k x^2k).
    """
    x = float(x)
    if not x > 0:
        raise DomainError(f"digamma requires x > 0, got {x}")
    shift = 0.0
    while x < 6.0:
        shift -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    p = inv2
    for c in _DIGAMMA_ASYMP:
        series += c * p
        p *= inv2
    return shift + math.log(x) - 0.5 / x - series


def log_beta(a, b):
    a, b = float(a), float(b)
    if not (a > 0 and b > 0):
        raise DomainError(f"log_beta requires a, b > 0, got ({a}, {b})")
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _betacf(u, a, b, max_iter=10_000, eps=1e-16):
    # Modified Lentz evaluation of the incomplete-beta continued fraction.
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * u / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * u / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * u / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (u={u}, a={a}, b={b})")


def reg_inc_beta(u, a, b):
    """Regularized incomplete beta I_u(a, b) = (1/B(a,b)) int_0^u t^(a-1) (1-t)^(b-1) dt."""
    u, a, b = float(u), float(a), float(b)
    if not (a > 0 and b > 0):
        raise DomainError(f"reg_inc_beta requires a, b > 0, got ({a}, {b})")
    if not 0.0 <= u <= 1.0:
        raise DomainError(f"reg_inc_beta requires 0 <= u <= 1, got {u}")
    if u == 0.0:
        return 0.0
    if u == 1.0:
        return 1.0
    log_front = a * math.log(u) + b * math.log1p(-u) - log_beta(a, b)
    if u < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(u, a, b) / a
    return 1.0 - math.exp(log_front) * _betacf(1.0 - u, b, a) / b


def log_reg_inc_beta(u, a, b):
    """log I_u(a, b), kept accurate when I_u is tiny (u -> 0)."""
    u, a, b = float(u), float(a), float(b)
    if not (a > 0 and b > 0):
        raise DomainError(f"reg_inc_beta requires a, b > 0, got ({a}, {b})")
    if not 0.0 < u <= 1.0:
        raise DomainError(f"log_reg_inc_beta requires 0 < u <= 1, got {u}")
    if u == 1.0:
        return 0.0
    if u < (a + 1.0) / (a + b + 2.0):
        log_front = a * math.log(u) + b * math.log1p(-u) - log_beta(a, b)
        return log_front + math.log(_betacf(u, a, b) / a)
    return math.log(reg_inc_beta(u, a, b))


reg_inc_beta_vec = np.vectorize(reg_inc_beta, otypes=[float])
log_reg_inc_beta_vec = np.vectorize(log_reg_inc_beta, otypes=[float])
