"""Gaussian-mixture prior family and its mixing-weight variants.

The prior on (mu, eta) mixes N(0, (1 - lam) / (eta * lam)) over lam in (0, 1)
with hyper-density eta^a lam^a rho(lam). The shape nu = d/2 + a + 1 is the
public parameter; ``rho`` picks one of the variants below.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np


class Variant(str, enum.Enum):
    LOWDIM = "lowdim"
    HIGHDIM_LOWER = "highdim-lower"
    HIGHDIM_UPPER = "highdim-upper"
    KATO = "kato"
    MS = "ms"


@dataclass(frozen=True)
class PriorSpec:
    nu: float
    variant: Variant
    n: int
    d: int
    b: float | None = None  # only for the ms variant

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.n < 2 or self.d < 1:
            raise ValueError(f"need n >= 2 and d >= 1, got n={self.n}, d={self.d}")
        if self.variant is Variant.KATO and self.d < 3:
            raise ValueError("the kato variant (rho = 1) needs d >= 3 (nu = d/2 - 1 > 0)")
        if not self.nu > 0:
            raise ValueError(f"nu must be > 0, got {self.nu}")
        if self.variant is Variant.KATO:
            if not math.isclose(self.nu, self.d / 2 - 1, rel_tol=0, abs_tol=1e-12):
                raise ValueError(f"the kato variant fixes nu = d/2 - 1 = {self.d / 2 - 1}, got {self.nu}")
        if self.variant is Variant.MS:
            if self.b is None or not self.b > -1:
                raise ValueError(f"the ms variant needs b > -1, got {self.b}")
        elif self.b is not None:
            raise ValueError("b is only meaningful for the ms variant")

    @classmethod
    def kato(cls, n, d):
        return cls(d / 2 - 1, Variant.KATO, n, d)

    @property
    def a(self):
        return self.nu - self.d / 2 - 1

    @property
    def right_exponent(self):
        """Exponent beta with rho(lam) = (1 - lam)^beta * (smooth, positive on [0, 1])."""
        if self.variant is Variant.LOWDIM:
            return (self.n - 1) * self.d / 2 - 1
        if self.variant is Variant.MS:
            return float(self.b)
        return 0.0

    def in_sandwich_range(self):
        """True when 0 < nu <= d/2 - 1, the range of the high-dimensional bounds."""
        return self.d >= 3 and self.nu <= self.d / 2 - 1 + 1e-12

    def log_rho_regular(self, lam, one_minus_lam=None):
        """log rho(lam) - right_exponent * log(1 - lam): the smooth factor of rho."""
        lam = np.asarray(lam, dtype=float)
        n, d, nu = self.n, self.d, self.nu
        v = self.variant
        if v is Variant.LOWDIM:
            return (-(n - 2) * d / 2 - nu) * np.log1p(-(n - 1) * lam / n)
        if v is Variant.HIGHDIM_LOWER:
            return (d / 2 - nu - 1) * np.log1p(-n * lam / (n + 1))
        if v is Variant.HIGHDIM_UPPER:
            return (d / 2 - nu - 1) * np.log1p(-(n - 1) * lam / n)
        return np.zeros_like(lam)

    def log_rho(self, lam, one_minus_lam=None):
        lam = np.asarray(lam, dtype=float)
        oml = 1.0 - lam if one_minus_lam is None else np.asarray(one_minus_lam, dtype=float)
        beta = self.right_exponent
        out = self.log_rho_regular(lam, oml)
        if beta != 0:
            out = out + beta * np.log(oml)
        return out

    def label(self):
        return f"ms:{self.b:g}" if self.variant is Variant.MS else self.variant.value


def parse_prior(text, nu, n, d):
    """Build a PriorSpec from a CLI tag: lowdim|highdim-lower|highdim-upper|kato|ms:<b>."""
    text = text.strip().lower()
    if text == "kato":
        if nu is not None and not math.isclose(nu, d / 2 - 1):
            raise ValueError(f"the kato variant fixes nu = d/2 - 1 = {d / 2 - 1}")
        return PriorSpec.kato(n, d)
    if nu is None:
        raise ValueError(f"prior {text!r} needs a value for nu")
    if text.startswith("ms:"):
        return PriorSpec(nu, Variant.MS, n, d, b=float(text[3:]))
    try:
        variant = Variant(text)
    except ValueError:
        raise ValueError(f"unknown prior {text!r}") from None
    if variant is Variant.MS:
        raise ValueError("the ms prior is written ms:<b>")
    return PriorSpec(nu, variant, n, d)


def rho_eval(spec, lam):
    lam_arr = np.asarray(lam, dtype=float)
    if np.any((lam_arr <= 0) | (lam_arr >= 1)):
        raise ValueError("lam must lie in the open interval (0, 1)")
    out = np.exp(spec.log_rho(lam_arr))
    return float(out) if out.ndim == 0 else out


def sandwich_bounds(spec, lam):
    """Lower and upper envelopes {1 - n lam/(n+1)}^e and {1 - (n-1) lam/n}^e, e = d/2 - nu - 1."""
    lam = np.asarray(lam, dtype=float)
    n, e = spec.n, spec.d / 2 - spec.nu - 1
    lower = np.exp(e * np.log1p(-n * lam / (n + 1)))
    upper = np.exp(e * np.log1p(-(n - 1) * lam / n))
    return lower, upper


@dataclass(frozen=True)
class SandwichReport:
    passed: bool
    max_violation: float  # worst signed violation, > 0 means a bound is broken
    lower_violation: float
    upper_violation: float
    upper_gap: float  # max |rho - upper|, zero when rho sits on the upper envelope


def validate_sandwich(spec, grid_size=10_000, tol=1e-12, check_range=True):
    """Check lower <= rho <= upper on a midpoint grid of (0, 1)."""
    if check_range and not spec.in_sandwich_range():
        raise ValueError(f"the envelopes need d >= 3 and 0 < nu <= d/2 - 1; got d={spec.d}, nu={spec.nu}")
    lam = (np.arange(grid_size) + 0.5) / grid_size
    rho = np.exp(spec.log_rho(lam))
    lower, upper = sandwich_bounds(spec, lam)
    scale = np.maximum(1.0, np.abs(upper))
    low_v = float(np.max((lower - rho) / scale))
    up_v = float(np.max((rho - upper) / scale))
    worst = max(low_v, up_v)
    return SandwichReport(
        passed=worst <= tol,
        max_violation=worst,
        lower_violation=low_v,
        upper_violation=up_v,
        upper_gap=float(np.max(np.abs(rho - upper))),
    )
