import math

import numpy as np
import pytest

import predrisk.risk as risk
from predrisk.model import ModelConfig
from predrisk.prior import PriorSpec
from predrisk.risk import ExperimentGrid, default_xi_values, kl_risk_diff_mc, resolve_threads, run_grid


def test_identity_comparator_is_zero():
    est = kl_risk_diff_mc(3.0, None, 2, 2, replicates=200, trials=4, seed=1)
    assert est.mean == 0.0 and est.std_error == 0.0


def test_single_trial_has_zero_se():
    est = kl_risk_diff_mc(1.0, PriorSpec(0.25, "lowdim", 2, 1), 2, 1, replicates=1, trials=1)
    assert est.std_error == 0.0 and math.isfinite(est.mean)


def test_default_grids():
    xis = default_xi_values()
    assert xis[0] == 0.0 and len(xis) == 21 and xis[-1] == pytest.approx(1000.0)
    assert risk.DEFAULT_NU_VALUES == (0.05, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0)


def test_cell_matches_grid():
    grid = ExperimentGrid(d=2, n=2, xi_values=(0.0, 10.0), nu_values=(0.25, 1.0), replicates=300, trials=3, seed=5)
    cells = run_grid(grid)
    for c in cells:
        single = kl_risk_diff_mc(c.xi, PriorSpec(c.nu, "lowdim", 2, 2), 2, 2, replicates=300, trials=3, seed=5)
        assert single == c.estimate


def test_grid_order_and_permutation_invariance():
    kw = dict(d=1, n=2, replicates=200, trials=3, seed=2)
    a = run_grid(ExperimentGrid(xi_values=(10.0, 0.0), nu_values=(1.0, 0.05, 0.25), **kw))
    b = run_grid(ExperimentGrid(xi_values=(0.0, 10.0), nu_values=(0.25, 1.0, 0.05), **kw))
    assert [(c.xi, c.nu) for c in a] == sorted((c.xi, c.nu) for c in a)
    assert a == b


def test_thread_count_independence(monkeypatch):
    grid = ExperimentGrid(d=2, n=2, xi_values=(0.0, 5.0), nu_values=(0.33,), replicates=400, trials=6, seed=11)
    one = run_grid(grid, threads=1)
    many = run_grid(grid, threads=4)
    monkeypatch.setenv("PREDRISK_THREADS", "3")
    env = run_grid(grid)
    assert one == many == env
    spec = PriorSpec(0.33, "lowdim", 2, 2)
    assert kl_risk_diff_mc(5.0, spec, 2, 2, 400, 6, 11, threads=1) == kl_risk_diff_mc(5.0, spec, 2, 2, 400, 6, 11, threads=5)


def test_resolve_threads(monkeypatch):
    monkeypatch.delenv("PREDRISK_THREADS", raising=False)
    assert resolve_threads() == 1
    monkeypatch.setenv("PREDRISK_THREADS", "6")
    assert resolve_threads() == 6
    assert resolve_threads(2) == 2


def test_scale_invariance():
    # common random numbers make the sigma^2 = 4 estimate agree to rounding
    spec = PriorSpec(0.25, "lowdim", 2, 2)
    base = kl_risk_diff_mc(7.0, spec, 2, 2, replicates=500, trials=3, seed=3)
    scaled = kl_risk_diff_mc(7.0, spec, 2, 2, replicates=500, trials=3, seed=3, model=ModelConfig.from_xi(2, 2, 7.0, eta=0.25))
    assert scaled.mean == pytest.approx(base.mean, rel=1e-9, abs=1e-12)


def test_rotation_invariance():
    spec = PriorSpec(0.33, "lowdim", 2, 2)
    base = kl_risk_diff_mc(4.0, spec, 2, 2, replicates=4000, trials=10, seed=3)
    rot = kl_risk_diff_mc(4.0, spec, 2, 2, replicates=4000, trials=10, seed=4,
                          model=ModelConfig.from_xi(2, 2, 4.0, direction=[1.0, -2.0]))
    assert abs(base.mean - rot.mean) < 3 * math.hypot(base.std_error, rot.std_error)


def test_model_xi_mismatch():
    with pytest.raises(ValueError):
        kl_risk_diff_mc(1.0, None, 2, 1, 10, 2, model=ModelConfig.from_xi(2, 1, 2.0))
    with pytest.raises(ValueError):
        kl_risk_diff_mc(1.0, PriorSpec(0.25, "lowdim", 2, 1), 2, 2, 10, 2)
    with pytest.raises(ValueError):
        kl_risk_diff_mc(1.0, None, 2, 1, replicates=0)


def test_grid_reports_failed_cells(monkeypatch):
    real = risk.gm_log_ratio

    def flaky(y, xbar, s, spec, quad):
        if spec.nu == 0.5:
            raise FloatingPointError("boom")
        return real(y, xbar, s, spec, quad)

    monkeypatch.setattr(risk, "gm_log_ratio", flaky)
    cells = run_grid(ExperimentGrid(d=1, n=2, xi_values=(0.0,), nu_values=(0.25, 0.5), replicates=50, trials=2))
    ok, bad = cells
    assert ok.estimate is not None and bad.estimate is None and "boom" in bad.error


def test_grid_invalid_prior_cells():
    cells = run_grid(ExperimentGrid(d=2, n=2, prior="kato", xi_values=(0.0,), nu_values=(1.0,), replicates=10, trials=2))
    assert cells[0].estimate is None and "kato" in cells[0].error


def test_nonfinite_replicates_dropped(monkeypatch, caplog):
    real = risk.gm_log_ratio

    def poisoned(y, xbar, s, spec, quad):
        out = real(y, xbar, s, spec, quad)
        out[0] = np.nan
        return out

    monkeypatch.setattr(risk, "gm_log_ratio", poisoned)
    est = kl_risk_diff_mc(0.0, PriorSpec(0.25, "lowdim", 2, 1), 2, 1, replicates=100, trials=2)
    assert est.dropped == 2 and math.isfinite(est.mean)
    assert "dropping" in caplog.text


def test_positive_at_origin_small_nu():
    est = kl_risk_diff_mc(0.0, PriorSpec(0.18, "lowdim", 2, 3), 2, 3, replicates=2000, trials=5, seed=1)
    assert est.mean > 2 * est.std_error


def test_beyond_proven_range_observation():
    # larger shape parameters still improve on p_R for d = 3
    est = kl_risk_diff_mc(10.0, PriorSpec(1.5, "lowdim", 2, 3), 2, 3, replicates=2000, trials=5, seed=1)
    assert est.mean > 2 * est.std_error
