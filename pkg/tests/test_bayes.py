import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from predrisk.bayes import (
    QuadratureConfig,
    brute_force_predictive_logpdf,
    gm_log_ratio,
    gm_predictive_logpdf,
    j_integral,
    log_c_b,
    log_j_integral,
    log_marginal_rho,
    marginal_rho,
)
from predrisk.bounds import log_i_integral
from predrisk.checks import integrate_density_1d
from predrisk.model import SufficientStats, best_equivariant_logpdf, update_stats
from predrisk.prior import PriorSpec
from predrisk.specfun import log_beta

SCHEMES = [QuadratureConfig(scheme=s) for s in ("gauss_jacobi", "tanh_sinh", "adaptive")]


def rho_mp(spec, lam):
    """rho written out in mpmath, independent of the package's log-space code."""
    n, d, nu = spec.n, mpmath.mpf(spec.d), mpmath.mpf(spec.nu)
    v = spec.variant.value
    if v == "lowdim":
        return (1 - lam) ** ((n - 1) * d / 2 - 1) * (1 - (n - 1) * lam / mpmath.mpf(n)) ** (-(n - 2) * d / 2 - nu)
    if v == "highdim-lower":
        return (1 - n * lam / mpmath.mpf(n + 1)) ** (d / 2 - nu - 1)
    if v == "highdim-upper":
        return (1 - (n - 1) * lam / mpmath.mpf(n)) ** (d / 2 - nu - 1)
    if v == "ms":
        return (1 - lam) ** mpmath.mpf(spec.b)
    return mpmath.mpf(1)


def j_reference(l, w, spec, dps=30):
    """J_l by mpmath after substituting lam = t^(1/nu), which removes the lam^(nu-1) singularity."""
    with mpmath.workdps(dps):
        nu, d = mpmath.mpf(spec.nu), mpmath.mpf(spec.d)

        def f(t):
            lam = t ** (1 / nu)
            arg = l * lam / (1 + (l - 1) * lam)
            return (
                (1 + (l - 1) * lam) ** (d / 2 - nu - 1)
                / (1 + w * lam) ** ((l - 1) * d / 2 + nu)
                * rho_mp(spec, arg)
            )

        return float(mpmath.quad(f, [0, 0.25, 0.5, 0.75, 1]) / nu)


def test_j_kato_closed_form():
    spec = PriorSpec.kato(2, 4)
    assert j_integral(2, 1.0, spec) == pytest.approx(0.375, rel=1e-12)


def test_j_zero_w():
    spec = PriorSpec.kato(2, 4)
    assert j_integral(2, 0.0, spec) == pytest.approx(1 / spec.nu, rel=1e-12)


@pytest.mark.parametrize("n,d", [(2, 1), (2, 2), (3, 1), (2, 3)])
@pytest.mark.parametrize("w", [0.0, 0.3, 7.0, 1e4, 1e9])
def test_j_lowdim_at_l_equals_n(n, d, w):
    # for the lowdim prior the l = n integrand collapses to a beta kernel
    spec = PriorSpec(0.25, "lowdim", n, d)
    expected = log_beta(0.25, (n - 1) * d / 2) - 0.25 * math.log1p(w)
    assert log_j_integral(n, w, spec) == pytest.approx(expected, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("d", [3, 4, 5, 6])
@pytest.mark.parametrize("l", [2, 3])
@pytest.mark.parametrize("w", [0.5, 20.0, 3e5])
def test_j_kato_matches_incomplete_beta(d, l, w):
    spec = PriorSpec.kato(2, d)
    assert log_j_integral(l, w, spec) == pytest.approx(log_i_integral(l, w, spec.nu, d), rel=1e-11, abs=1e-12)


@pytest.mark.parametrize(
    "variant,n,d,b", [("lowdim", 2, 1, None), ("lowdim", 2, 2, None), ("ms", 2, 1, 0.0), ("ms", 3, 2, 0.5), ("highdim-upper", 2, 3, None)]
)
@pytest.mark.parametrize("w", [0.0, 0.8, 25.0])
def test_j_small_nu_against_mpmath(variant, n, d, b, w):
    spec = PriorSpec(0.05, variant, n, d, b=b)
    ref = j_reference(n + 1, w, spec)
    assert j_integral(n + 1, w, spec) == pytest.approx(ref, rel=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([(2, 1), (2, 2), (3, 1), (2, 3)]), st.floats(0.02, 1.5), st.floats(0.0, 1e6))
def test_j_schemes_agree(nd, nu, w):
    n, d = nd
    spec = PriorSpec(nu, "lowdim", n, d)
    vals = [log_j_integral(n + 1, w, spec, q) for q in SCHEMES]
    assert max(vals) - min(vals) <= 1e-9 * max(1.0, abs(vals[0]))


@pytest.mark.parametrize("spec", [PriorSpec(0.25, "lowdim", 2, 1), PriorSpec(0.05, "lowdim", 2, 3), PriorSpec.kato(2, 5), PriorSpec(0.4, "ms", 3, 2, b=0.0)])
def test_j_decreasing_in_w(spec):
    w = np.concatenate([[0.0], np.geomspace(1e-3, 1e8, 60)])
    vals = log_j_integral(spec.n + 1, w, spec)
    assert np.all(np.diff(vals) < 0)


def test_j_rejects_negative_w():
    with pytest.raises(ValueError):
        j_integral(3, -1.0, PriorSpec(0.25, "lowdim", 2, 1))


def test_c_b_formula():
    spec = PriorSpec(0.33, "lowdim", 2, 2)
    expected = 0.33 * math.log(1.5) + log_beta(0.33, 1.0) - log_beta(0.33, 2.0)
    assert log_c_b(spec) == pytest.approx(expected, rel=1e-14)


def test_oracle_example_point():
    stats = SufficientStats([1.1], 0.9, 2)
    spec = PriorSpec(0.25, "lowdim", 2, 1)
    a = gm_predictive_logpdf([0.3], stats, spec)
    b = brute_force_predictive_logpdf([0.3], stats, spec)
    assert a == pytest.approx(b, rel=1e-5)


def test_brute_force_sign_flip_symmetry():
    spec = PriorSpec(0.25, "ms", 2, 2, b=0.0)
    a = brute_force_predictive_logpdf([0.3, -1.0], SufficientStats([1.1, 0.2], 0.9, 2), spec)
    b = brute_force_predictive_logpdf([-0.3, 1.0], SufficientStats([-1.1, -0.2], 0.9, 2), spec)
    assert a == pytest.approx(b, rel=1e-9)


def test_brute_force_cost_guard():
    with pytest.raises(ValueError):
        brute_force_predictive_logpdf([0.0, 0.0, 0.0], SufficientStats([0.1, 0.0, 0.0], 1.0, 2), PriorSpec(0.1, "lowdim", 2, 3))


def test_brute_force_normalizes():
    stats = SufficientStats([0.4], 1.1, 2)
    spec = PriorSpec(0.33, "lowdim", 2, 1)
    mass = integrate_density_1d(lambda y: brute_force_predictive_logpdf(y, stats, spec), 0.4)
    assert mass == pytest.approx(1.0, abs=1e-3)


def test_gm_normalizes_d1():
    stats = SufficientStats([0.7], 1.3, 2)
    spec = PriorSpec(0.25, "lowdim", 2, 1)
    mass = integrate_density_1d(lambda y: gm_predictive_logpdf(y, stats, spec), 0.7)
    assert mass == pytest.approx(1.0, abs=1e-4)


def test_gm_normalizes_d2_importance_sampling():
    # proposal p_R; weights p_GM / p_R average to one
    from scipy import stats as sps

    n, d, s = 2, 2, 1.4
    xbar = np.array([0.6, -0.3])
    spec = PriorSpec(0.33, "lowdim", n, d)
    dof = (n - 1) * d
    scale2 = (n + 1) * s / (n * dof)
    rng = np.random.default_rng(12)
    m = 200_000
    y = xbar + math.sqrt(scale2) * rng.standard_normal((m, d)) / np.sqrt(rng.chisquare(dof, m) / dof)[:, None]
    wts = np.exp(gm_log_ratio(y, np.broadcast_to(xbar, y.shape), np.full(m, s), spec))
    mean, se = wts.mean(), wts.std() / math.sqrt(m)
    assert abs(mean - 1) < 3 * se
    # the proposal is the density it claims to be
    assert sps.multivariate_t(loc=xbar, shape=scale2 * np.eye(d), df=dof).logpdf(y[:3]) == pytest.approx(
        best_equivariant_logpdf(y[:3], SufficientStats(xbar, s, n)), rel=1e-12
    )


def test_gm_far_field_decay():
    spec = PriorSpec(0.25, "lowdim", 2, 1)
    radii = np.geomspace(10, 1e3, 25)
    gaps = []
    for r in radii:
        stats = SufficientStats([r], 1.0, 2)
        y = [r + 0.5]
        gaps.append(abs(gm_predictive_logpdf(y, stats, spec) - best_equivariant_logpdf(y, stats)))
    assert np.all(np.diff(gaps) < 0)
    assert gaps[-1] < 1e-3


def test_gm_batched_matches_scalar():
    spec = PriorSpec(0.25, "lowdim", 3, 2)
    stats = SufficientStats([0.5, 1.0], 2.0, 3)
    ys = np.array([[0.0, 0.0], [1.0, 3.0], [-2.0, 0.5]])
    batch = gm_predictive_logpdf(ys, stats, spec)
    assert batch == pytest.approx([gm_predictive_logpdf(y, stats, spec) for y in ys], rel=1e-13)


def test_gm_rejects_mismatched_stats():
    with pytest.raises(ValueError):
        gm_predictive_logpdf([0.0], SufficientStats([0.0], 1.0, 3), PriorSpec(0.25, "lowdim", 2, 1))


def test_kato_log_ratio_identity():
    # with rho = 1 the log ratio reduces to norms and incomplete-beta terms only
    d, n = 5, 2
    spec = PriorSpec.kato(n, d)
    rng = np.random.default_rng(3)
    for _ in range(10):
        stats = SufficientStats(rng.normal(size=d), float(rng.exponential() + 0.1), n)
        y = rng.normal(size=d) * 2
        nxt = update_stats(stats, y)
        lhs = gm_predictive_logpdf(y, stats, spec) - best_equivariant_logpdf(y, stats)
        rhs = (
            log_c_b(spec)
            - spec.nu * math.log(nxt.s / stats.s)
            + log_i_integral(n + 1, nxt.w(), spec.nu, d)
            - log_i_integral(n, stats.w(), spec.nu, d)
        )
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)


def test_marginal_positive():
    val = marginal_rho([0.0], 1.0, 2, PriorSpec(0.25, "lowdim", 2, 1))
    assert math.isfinite(val) and val > 0


@pytest.mark.parametrize("spec", [PriorSpec(0.25, "lowdim", 2, 1), PriorSpec(0.33, "ms", 2, 2, b=0.5)])
@pytest.mark.parametrize("c", [math.sqrt(2), 3.0])
def test_marginal_homogeneity(spec, c):
    # rho(c z, c^2 v) = c^(-2 nu) rho(z, v)
    z = np.full(spec.d, 0.7)
    base = log_marginal_rho(z, 1.3, 2, spec)
    scaled = log_marginal_rho(c * z, c * c * 1.3, 2, spec)
    assert scaled - base == pytest.approx(-2 * spec.nu * math.log(c), rel=1e-6, abs=1e-9)


def test_quadrature_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(node_count=4)
    with pytest.raises(ValueError):
        QuadratureConfig(scheme="simpson")
    with pytest.raises(ValueError):
        QuadratureConfig(abs_tol=0.0)


def test_adaptive_failure_raises():
    from predrisk.bayes import QuadratureError, _quad_checked

    with pytest.raises(QuadratureError):
        _quad_checked(lambda x: math.sin(1 / x) / x, 1e-12, 1.0, QuadratureConfig(scheme="adaptive"))
