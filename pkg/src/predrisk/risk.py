"""Monte Carlo Kullback-Leibler risk differences between p_GM and p_R.

The risk difference R_KL(p_R) - R_KL(p_GM) equals E[log p_GM(y|xbar,s) - log p_R(y|xbar,s)]
and depends on (mu, eta) only through xi = eta ||mu||^2. Trial t draws its
replicates from stream (seed, t); cells of a grid share those draws, so the
surface is smooth in (xi, nu) and independent of the worker count.
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bayes import DEFAULT_QUAD, gm_log_ratio
from .model import ModelConfig
from .prior import PriorSpec
from .sampling import RngState, sample_triplets

log = logging.getLogger(__name__)

DEFAULT_NU_VALUES = (0.05, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0)


def default_xi_values():
    return (0.0,) + tuple(float(x) for x in np.geomspace(1.0, 1000.0, 20))


@dataclass(frozen=True)
class RiskEstimate:
    mean: float
    std_error: float
    replicates: int
    trials: int
    seed: int
    dropped: int = 0  # replicates discarded for non-finite log ratios


@dataclass(frozen=True)
class ExperimentGrid:
    d: int
    n: int
    prior: str = "lowdim"  # CLI tag, see prior.parse_prior
    xi_values: tuple = field(default_factory=default_xi_values)
    nu_values: tuple = DEFAULT_NU_VALUES
    replicates: int = 5000
    trials: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.replicates < 1 or self.trials < 1:
            raise ValueError("replicates and trials must be >= 1")
        if any(x < 0 for x in self.xi_values):
            raise ValueError("xi values must be >= 0")
        if any(not v > 0 for v in self.nu_values):
            raise ValueError("nu values must be > 0")


@dataclass(frozen=True)
class GridCell:
    xi: float
    nu: float
    estimate: RiskEstimate | None
    error: str | None = None


def resolve_threads(threads=None):
    if threads is None:
        threads = int(os.environ.get("PREDRISK_THREADS", "1"))
    return max(1, int(threads))


def _trial_draws(seed, trial, model, replicates):
    return sample_triplets(RngState(seed, trial), model, replicates)


def _log_ratios(draws, spec, quad):
    y, xbar, s = draws
    if spec is None:
        return np.zeros(s.shape[0])
    return gm_log_ratio(y, xbar, s, spec, quad)


def _finite_mean(values, where):
    ok = np.isfinite(values)
    bad = int((~ok).sum())
    if bad:
        log.warning("%s: dropping %d replicate(s) with non-finite log ratio", where, bad)
    if bad == values.size:
        raise FloatingPointError(f"{where}: every replicate produced a non-finite log ratio")
    return float(values[ok].mean()), bad


def _summarize(trial_means, dropped, replicates, seed):
    trial_means = np.asarray(trial_means)
    k = trial_means.size
    se = float(trial_means.std(ddof=1) / math.sqrt(k)) if k > 1 else 0.0
    return RiskEstimate(float(trial_means.mean()), se, replicates, k, seed, int(sum(dropped)))


def _map_trials(func, trials, threads):
    threads = resolve_threads(threads)
    if threads == 1 or trials == 1:
        return [func(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=min(threads, trials)) as pool:
        return list(pool.map(func, range(trials)))


def kl_risk_diff_mc(
    xi, spec, n, d, replicates=5000, trials=10, seed=0, quad=DEFAULT_QUAD, model=None, threads=None
):
    """Estimate R_KL(p_R) - R_KL(p_GM) at noncentrality xi.

    ``spec=None`` compares p_R with itself (the estimate is exactly zero).
    ``model`` overrides the default parameter point mu = sqrt(xi) e_1, eta = 1;
    its xi must then agree with ``xi``.
    """
    if replicates < 1 or trials < 1:
        raise ValueError("replicates and trials must be >= 1")
    if spec is not None and (spec.n, spec.d) != (n, d):
        raise ValueError(f"prior is for (n, d) = ({spec.n}, {spec.d}), not ({n}, {d})")
    if model is None:
        model = ModelConfig.from_xi(n, d, xi)
    elif not math.isclose(model.xi(), xi, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError(f"model has xi={model.xi()}, expected {xi}")

    def one(t):
        vals = _log_ratios(_trial_draws(seed, t, model, replicates), spec, quad)
        return _finite_mean(vals, f"xi={xi:g} trial={t}")

    out = _map_trials(one, trials, threads)
    return _summarize([m for m, _ in out], [b for _, b in out], replicates, seed)


def run_grid(grid, quad=DEFAULT_QUAD, threads=None):
    """Risk-difference surface over (xi, nu), rows sorted by (xi, nu).

    A cell that fails (bad prior parameters, numerical trouble) is reported
    with ``estimate=None`` and an error message; the rest of the grid still runs.
    """
    from .prior import parse_prior

    xis = sorted(set(float(x) for x in grid.xi_values))
    nus = sorted(set(float(v) for v in grid.nu_values))
    specs, errors = {}, {}
    for nu in nus:
        try:
            specs[nu] = parse_prior(grid.prior, None if grid.prior == "kato" else nu, grid.n, grid.d)
        except ValueError as exc:
            errors[nu] = str(exc)

    def one(t):
        res = {}
        for xi in xis:
            draws = _trial_draws(grid.seed, t, ModelConfig.from_xi(grid.n, grid.d, xi), grid.replicates)
            for nu, spec in specs.items():
                try:
                    res[xi, nu] = _finite_mean(_log_ratios(draws, spec, quad), f"xi={xi:g} nu={nu:g} trial={t}")
                except (ArithmeticError, ValueError) as exc:
                    res[xi, nu] = exc
        return res

    per_trial = _map_trials(one, grid.trials, threads)
    cells = []
    for xi in xis:
        for nu in nus:
            if nu in errors:
                cells.append(GridCell(xi, nu, None, errors[nu]))
                continue
            outs = [r[xi, nu] for r in per_trial]
            failed = [o for o in outs if isinstance(o, Exception)]
            if failed:
                log.error("cell xi=%g nu=%g failed: %s", xi, nu, failed[0])
                cells.append(GridCell(xi, nu, None, str(failed[0])))
                continue
            est = _summarize([m for m, _ in outs], [b for _, b in outs], grid.replicates, grid.seed)
            cells.append(GridCell(xi, specs[nu].nu, est))
    return cells


def kato_nu(d):
    return PriorSpec.kato(2, d).nu
