"""Sufficient statistics and the reference predictive densities (log scale)."""

import math
from dataclasses import dataclass

import numpy as np

from .specfun import log_gamma


class SingularStatisticError(ValueError):
    """Raised when s = 0, where the Student-t predictive density is undefined."""


@dataclass(frozen=True, eq=False)
class ModelConfig:
    n: int
    d: int
    mu: np.ndarray
    eta: float = 1.0

    def __post_init__(self):
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        object.__setattr__(self, "mu", mu)
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.d < 1 or mu.shape != (self.d,):
            raise ValueError(f"mu must have length d={self.d}, got shape {mu.shape}")
        if not self.eta > 0:
            raise ValueError(f"eta must be > 0, got {self.eta}")

    @classmethod
    def from_xi(cls, n, d, xi, eta=1.0, direction=None):
        """Mean of norm sqrt(xi/eta) along ``direction`` (default e_1)."""
        if xi < 0:
            raise ValueError(f"xi must be >= 0, got {xi}")
        if direction is None:
            direction = np.zeros(d)
            direction[0] = 1.0
        direction = np.asarray(direction, dtype=float)
        direction = direction / np.linalg.norm(direction)
        return cls(n, d, math.sqrt(xi / eta) * direction, eta)

    @property
    def sigma2(self):
        return 1.0 / self.eta

    def xi(self):
        return float(self.eta * self.mu @ self.mu)


@dataclass(frozen=True, eq=False)
class SufficientStats:
    xbar: np.ndarray
    s: float
    count: int

    def __post_init__(self):
        object.__setattr__(self, "xbar", np.atleast_1d(np.asarray(self.xbar, dtype=float)))
        if self.s < 0:
            raise ValueError(f"s must be >= 0, got {self.s}")
        if self.count < 2:
            raise ValueError(f"count must be >= 2, got {self.count}")

    @classmethod
    def from_sample(cls, x):
        """Statistics of an (l, d) array of observations."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        xbar = x.mean(axis=0)
        return cls(xbar, float(((x - xbar) ** 2).sum()), x.shape[0])

    @property
    def d(self):
        return self.xbar.shape[0]

    def w(self):
        if self.s == 0:
            raise SingularStatisticError("w is undefined for s = 0")
        return self.count * float(self.xbar @ self.xbar) / self.s

    def u(self):
        w = self.w()
        return w / (1.0 + w)


def update_stats(stats, y):
    """Absorb one more observation y: (xbar_n, s_n) -> (xbar_{n+1}, s_{n+1})."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape != stats.xbar.shape:
        raise ValueError(f"dimension mismatch: y has shape {y.shape}, xbar has {stats.xbar.shape}")
    n = stats.count
    diff = y - stats.xbar
    xbar = (n * stats.xbar + y) / (n + 1)
    s = stats.s + n * float(diff @ diff) / (n + 1)
    return SufficientStats(xbar, s, n + 1)


def log_c_r(n, d):
    return log_gamma(n * d / 2) - log_gamma((n - 1) * d / 2)


def best_equivariant_logpdf(y, stats, n=None, d=None):
    """Log of the Student-t predictive density under the right-invariant prior.

    ``y`` may carry leading batch axes; the last axis has length d.
    """
    y = np.asarray(y, dtype=float)
    n = stats.count if n is None else n
    d = stats.d if d is None else d
    if stats.s <= 0:
        raise SingularStatisticError("best equivariant density undefined for s = 0")
    if y.shape[-1:] != (d,):
        raise ValueError(f"y must end in an axis of length d={d}, got shape {y.shape}")
    scale = n / ((n + 1) * stats.s)
    r2 = ((y - stats.xbar) ** 2).sum(axis=-1)
    out = log_c_r(n, d) + 0.5 * d * math.log(scale / math.pi) - 0.5 * n * d * np.log1p(scale * r2)
    return float(out) if np.ndim(out) == 0 else out


def plug_in_logpdf(y, mu_hat, sigma2_hat):
    """log phi(y; mu_hat, sigma2_hat * I_d)."""
    if not sigma2_hat > 0:
        raise ValueError(f"sigma2_hat must be > 0, got {sigma2_hat}")
    y = np.asarray(y, dtype=float)
    mu_hat = np.atleast_1d(np.asarray(mu_hat, dtype=float))
    d = mu_hat.shape[0]
    r2 = ((y - mu_hat) ** 2).sum(axis=-1)
    out = -0.5 * d * math.log(2 * math.pi * sigma2_hat) - 0.5 * r2 / sigma2_hat
    return float(out) if np.ndim(out) == 0 else out
