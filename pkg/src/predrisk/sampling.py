"""Seeded random draws for the risk experiments.

Every draw comes from an ``RngState``: a (seed, stream_id) pair that maps to an
independent Philox stream. The same pair always yields the same sequence, so
results do not depend on how work is spread over threads.
"""

from dataclasses import dataclass

import numpy as np

U_MIN = 1e-300
U_MAX = 1.0 - 1e-16


@dataclass(frozen=True)
class RngState:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not 0 <= v < 2**64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {v}")

    def generator(self):
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(ss))


def as_generator(rng):
    """Accept an RngState (fresh stream) or an already-advancing Generator."""
    if isinstance(rng, RngState):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngState or numpy Generator, got {type(rng).__name__}")


def sample_iso_normal(rng, mean, variance, size=None):
    """Draw(s) from N_d(mean, variance * I_d); ``size`` prepends a batch axis."""
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    if variance < 0:
        raise ValueError(f"variance must be >= 0, got {variance}")
    shape = mean.shape if size is None else (size,) + mean.shape
    if variance == 0:
        return np.broadcast_to(mean, shape).copy()
    gen = as_generator(rng)
    return mean + np.sqrt(variance) * gen.standard_normal(shape)


def sample_chi2(rng, dof, size=None):
    if not dof > 0:
        raise ValueError(f"dof must be > 0, got {dof}")
    return as_generator(rng).chisquare(dof, size)


def sample_noncentral_chi2(rng, dof, noncentrality, size=None):
    """Poisson mixture: K ~ Poisson(lambda/2), then a central chi2 with dof + 2K."""
    if not dof > 0:
        raise ValueError(f"dof must be > 0, got {dof}")
    if noncentrality < 0:
        raise ValueError(f"noncentrality must be >= 0, got {noncentrality}")
    gen = as_generator(rng)
    k = gen.poisson(noncentrality / 2.0, size)
    return gen.chisquare(dof + 2.0 * k)


def sample_triplets(rng, model, size):
    """``size`` independent draws of (y, xbar, s) under ``model``.

    xbar ~ N_d(mu, sigma^2/n), s ~ sigma^2 chi2_{(n-1)d}, y ~ N_d(mu, sigma^2),
    all independent. Arrays have shapes (size, d), (size, d), (size,).
    The standard-normal/chi-square draws are taken in a fixed order, so
    models that differ only in (mu, eta) see common random numbers.
    """
    gen = as_generator(rng)
    n, d = model.n, model.d
    z_xbar = gen.standard_normal((size, d))
    chi = gen.chisquare((n - 1) * d, size)
    z_y = gen.standard_normal((size, d))
    sigma2 = model.sigma2
    sigma = np.sqrt(sigma2)
    xbar = model.mu + sigma * z_xbar / np.sqrt(n)
    y = model.mu + sigma * z_y
    s = sigma2 * chi
    return y, xbar, s


def sample_triplet(rng, model):
    y, xbar, s = sample_triplets(rng, model, 1)
    return y[0], xbar[0], float(s[0])


def sample_noncentral_beta_u(rng, d, l, xi, n, size=None):
    """u = A / (A + B) with A ~ chi2_d(n*xi) and B ~ chi2_{(l-1)d}.

    This is the noncentral-beta variable appearing in the high-dimensional
    lower bound; for l = n it is exactly the law of u_n. Values are clamped
    into [1e-300, 1 - 1e-16] so that log u and log(1 - u) stay finite.
    """
    if l < 2:
        raise ValueError(f"l must be >= 2, got {l}")
    gen = as_generator(rng)
    a = sample_noncentral_chi2(gen, d, n * xi, size)
    b = gen.chisquare((l - 1) * d, size)
    return np.clip(a / (a + b), U_MIN, U_MAX)
