"""Oracle and property suites behind ``predrisk check``."""

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate

from .bayes import DEFAULT_QUAD, brute_force_predictive_logpdf, gm_predictive_logpdf, log_marginal_rho
from .bounds import nu_star, verify_lemma_bounds
from .model import SufficientStats, best_equivariant_logpdf, update_stats
from .prior import PriorSpec, Variant, sandwich_bounds, validate_sandwich


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        extras = ", ".join(f"{k}={_fmt(v)}" for k, v in self.detail.items())
        return f"[{status}] {self.suite}: {self.name}" + (f" ({extras})" if extras else "")

    def as_dict(self):
        return asdict(self)


def _fmt(v):
    return f"{v:.3g}" if isinstance(v, float) else str(v)


def random_configs(rng, count, dims=(1, 2), nus=(0.05, 0.25, 0.33), n_values=(2, 3), variants=("lowdim", "ms"), ms_b=(0.0, 0.5)):
    """Random (y, stats, spec) triples for oracle comparisons."""
    out = []
    for _ in range(count):
        d = int(rng.choice(dims))
        n = int(rng.choice(n_values))
        nu = float(rng.choice(nus))
        variant = str(rng.choice(variants))
        b = float(rng.choice(ms_b)) if variant == "ms" else None
        spec = PriorSpec(nu, variant, n, d, b=b)
        xbar = rng.normal(0.0, 2.0, d)
        s = float(rng.exponential(1.5) + 0.05)
        y = xbar + rng.normal(0.0, math.sqrt(s + 1.0), d)
        out.append((y, SufficientStats(xbar, s, n), spec))
    return out


def suite_lemma1(seed=0, count=20, rel_tol=1e-5, quad=DEFAULT_QUAD):
    rng = np.random.default_rng([seed, 1])
    worst = 0.0
    for y, stats, spec in random_configs(rng, count):
        closed = gm_predictive_logpdf(y, stats, spec, quad)
        brute = brute_force_predictive_logpdf(y, stats, spec, quad)
        worst = max(worst, abs(closed - brute) / max(abs(brute), 1e-300))
    return [CheckResult("lemma1", f"closed form vs (eta, lam) quadrature, {count} configs", worst <= rel_tol,
                        {"max_rel_err": worst, "tol": rel_tol})]


def suite_theorem1(seed=0, count=20, rel_tol=1e-4, quad=DEFAULT_QUAD):
    rng = np.random.default_rng([seed, 2])
    worst = 0.0
    for y, stats, spec in random_configs(rng, count, dims=(1,)):
        nxt = update_stats(stats, y)
        ratio = math.exp(
            log_marginal_rho(nxt.xbar, nxt.s, spec.n + 1, spec, quad)
            - log_marginal_rho(stats.xbar, stats.s, spec.n, spec, quad)
        )
        dens_ratio = math.exp(gm_predictive_logpdf(y, stats, spec, quad) - best_equivariant_logpdf(y, stats))
        worst = max(worst, abs(ratio - dens_ratio) / dens_ratio)
    return [CheckResult("theorem1", f"rho ratio equals p_GM / p_R, {count} points (d=1)", worst <= rel_tol,
                        {"max_rel_err": worst, "tol": rel_tol})]


NORMALIZATION_CONFIGS = (
    # (xbar, s, nu, variant, n)
    (0.7, 1.3, 0.25, "lowdim", 2),
    (-2.5, 0.4, 0.05, "lowdim", 2),
    (4.0, 2.0, 1.5, "lowdim", 3),
)


def integrate_density_1d(logpdf, center):
    def f(y):
        return math.exp(logpdf(np.array([y])))

    left = integrate.quad(f, -np.inf, center, epsabs=1e-12, epsrel=1e-10, limit=500)[0]
    right = integrate.quad(f, center, np.inf, epsabs=1e-12, epsrel=1e-10, limit=500)[0]
    return left + right


def suite_normalization(seed=0, tol=1e-4, quad=DEFAULT_QUAD):
    results = []
    for xbar, s, nu, variant, n in NORMALIZATION_CONFIGS:
        spec = PriorSpec(nu, variant, n, 1)
        stats = SufficientStats(np.array([xbar]), s, n)
        mass_gm = integrate_density_1d(lambda y: gm_predictive_logpdf(y, stats, spec, quad), xbar)
        mass_r = integrate_density_1d(lambda y: best_equivariant_logpdf(y, stats), xbar)
        err = max(abs(mass_gm - 1), abs(mass_r - 1))
        results.append(CheckResult("normalization", f"xbar={xbar}, s={s}, nu={nu}, n={n}", err <= tol,
                                   {"mass_gm": mass_gm, "mass_r": mass_r, "tol": tol}))
    return results


def lowdim_coincidence_gap(nu, grid_size=10_000):
    """max |rho_lowdim - (1 - lam/2)^(-nu)| and max |upper - (1 - lam/2)^(-nu)| at d = n = 2."""
    spec = PriorSpec(nu, Variant.LOWDIM, 2, 2)
    lam = (np.arange(grid_size) + 0.5) / grid_size
    target = (1 - lam / 2) ** (-nu)
    rho = np.exp(spec.log_rho(lam))
    _, upper = sandwich_bounds(spec, lam)
    return float(np.max(np.abs(rho - target) / target)), float(np.max(np.abs(upper - target) / target))


def suite_sandwich(seed=0):
    results = []
    for n in (2, 3):
        for d in (3, 4, 5, 6):
            kato = validate_sandwich(PriorSpec.kato(n, d))
            results.append(CheckResult("sandwich", f"kato n={n} d={d}", kato.passed and kato.max_violation == 0,
                                       {"max_violation": kato.max_violation}))
            for nu in sorted({0.25, d / 2 - 1}):
                up = validate_sandwich(PriorSpec(nu, Variant.HIGHDIM_UPPER, n, d))
                results.append(CheckResult("sandwich", f"highdim-upper n={n} d={d} nu={nu:g}",
                                           up.passed and up.upper_gap == 0, {"max_violation": up.max_violation}))
                lo = validate_sandwich(PriorSpec(nu, Variant.HIGHDIM_LOWER, n, d))
                results.append(CheckResult("sandwich", f"highdim-lower n={n} d={d} nu={nu:g}", lo.passed,
                                           {"max_violation": lo.max_violation}))
    for nu in (0.05, 0.25, 0.33, 1.0):
        gap_rho, gap_up = lowdim_coincidence_gap(nu)
        ok = gap_rho <= 1e-14 and gap_up <= 1e-14
        results.append(CheckResult("sandwich", f"d=n=2 lowdim equals (1 - lam/2)^-nu, nu={nu:g}", ok,
                                   {"rel_gap_lowdim": gap_rho, "rel_gap_upper": gap_up}))
    return results


def suite_lemma_bounds(seed=0, reps=2000, trials=5, quad=DEFAULT_QUAD):
    results = []
    for d in range(1, 5):
        nu = nu_star(d).nu_star / 2
        for xi in (0.0, 10.0, 100.0):
            rep = verify_lemma_bounds(d, 2, nu, xi, reps=reps, trials=trials, seed=seed, quad=quad)
            for c in rep.checks:
                results.append(CheckResult("lemma-bounds", f"{c.name} d={d} xi={xi:g} nu={nu:.4f}", c.passed,
                                           {"lhs": c.lhs_estimate, "rhs": c.rhs_bound, "se": c.se}))
    return results


SUITES = {
    "lemma1": suite_lemma1,
    "theorem1": suite_theorem1,
    "normalization": suite_normalization,
    "sandwich": suite_sandwich,
    "lemma-bounds": suite_lemma_bounds,
}


def run_suite(name, seed=0):
    if name == "all":
        return [r for fn in SUITES.values() for r in fn(seed=seed)]
    return SUITES[name](seed=seed)
