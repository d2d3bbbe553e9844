import math

import numpy as np
import pytest

from chansmooth import (
    ChannelParams,
    InsufficientGrid,
    LikelihoodDegenerate,
    Metric,
    NpmleConfig,
    Prior,
    RateStudyRecord,
    fit_rate_slope,
    npmle_fit,
    npmle_solve,
    polylog_sigma_schedule,
    rate_study,
    sample_poisson_mixture,
    summarize,
)
from chansmooth.estimation import _Problem


def synthetic(ns, f, trials=3):
    return [
        RateStudyRecord(n, t, 0, f(n), f(n), f(n), f(n), 0.0)
        for n in ns
        for t in range(trials)
    ]


class TestNpmle:
    """Grid NPMLE of a Poisson mixing distribution."""

    def test_all_zero_samples(self, unit_params):
        prior = npmle_fit(np.zeros(200, dtype=int), unit_params)
        assert prior == Prior.dirac(0.0, 1.0)

    def test_consistency_for_dirac(self, unit_params):
        y = sample_poisson_mixture(Prior.dirac(1.0, 1.0), unit_params, 10_000, 3)
        prior = npmle_fit(y, unit_params)
        assert prior.mean() == pytest.approx(1.0, abs=0.05)

    def test_loglik_nondecreasing(self):
        params = ChannelParams(gamma=5.0)
        for seed in range(5):
            y = sample_poisson_mixture(Prior.uniform_grid(3, 1.0), params, 800, seed)
            fit = npmle_solve(y, params, NpmleConfig(grid_size=80))
            assert np.all(np.diff(fit.loglik_history) >= -1e-15)

    def test_first_order_conditions(self):
        params = ChannelParams(gamma=3.0)
        cfg = NpmleConfig()
        y = sample_poisson_mixture(Prior.two_point(0.2, 0.8, 0.5, 1.0), params, 3000, 9)
        fit = npmle_solve(y, params, cfg)
        assert fit.converged
        assert fit.gradient.max() <= 1 + 10 * cfg.loglik_tol
        np.testing.assert_allclose(fit.gradient[fit.weights > 0], 1.0, atol=10 * cfg.loglik_tol)

    def test_em_only_is_monotone(self, unit_params):
        y = sample_poisson_mixture(Prior.two_point(0.2, 0.8, 0.5, 1.0), unit_params, 500, 1)
        fit = npmle_solve(y, unit_params, NpmleConfig(grid_size=50, max_iters=300, polish=False))
        assert fit.polish_iters == 0
        assert fit.em_iters <= 300
        assert np.all(np.diff(fit.loglik_history) >= -1e-15)

    def test_weight_floor_prunes(self, unit_params):
        y = sample_poisson_mixture(Prior.dirac(0.5, 1.0), unit_params, 400, 2)
        fit = npmle_solve(y, unit_params, NpmleConfig(grid_size=40, weight_floor=1e-3))
        assert np.all((fit.weights == 0) | (fit.weights >= 1e-3 * 0.99))
        assert fit.prior.weights.sum() == pytest.approx(1.0)

    def test_degenerate_likelihood(self):
        # a grid holding only the atom 0 cannot produce a positive count
        with pytest.raises(LikelihoodDegenerate, match="likelihood degenerate"):
            _Problem([0, 3], np.array([0.0]), 1.0)

    def test_rejects_bad_samples(self, unit_params):
        with pytest.raises(ValueError):
            npmle_fit([], unit_params)
        with pytest.raises(ValueError):
            npmle_fit([1, -2], unit_params)
        with pytest.raises(ValueError):
            npmle_fit([1.5], unit_params)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            NpmleConfig(grid_size=1)
        with pytest.raises(ValueError):
            NpmleConfig(loglik_tol=0.0)


class TestRateSlope:
    """Log-log slope fitting."""

    def test_exact_power_law(self):
        slope, se = fit_rate_slope(synthetic([100, 1000, 10_000, 100_000], lambda n: n**-0.5), Metric.HELLINGER_SQ)
        assert slope == pytest.approx(-0.5, abs=1e-12)
        assert se == pytest.approx(0.0, abs=1e-12)

    def test_constant(self):
        slope, _ = fit_rate_slope(synthetic([10, 20, 40], lambda n: 0.3), "w1_smoothed")
        assert slope == pytest.approx(0.0, abs=1e-12)

    def test_insufficient_grid(self):
        with pytest.raises(InsufficientGrid, match="insufficient grid"):
            fit_rate_slope(synthetic([10, 20], lambda n: 1.0 / n), Metric.TV_POISSON)

    def test_summarize(self):
        recs = [RateStudyRecord(10, t, 0, v, v, v, v, 0.0) for t, v in enumerate([1.0, 2.0, 3.0])]
        ((n, mean, se),) = summarize(recs, Metric.TV_GAUSSIAN)
        assert (n, mean) == (10, 2.0)
        assert se == pytest.approx(1.0 / math.sqrt(3))


class TestRateStudy:
    """Monte-Carlo NPMLE rate harness."""

    def test_smoke(self, unit_params):
        (rec,) = rate_study(Prior.dirac(0.5, 1.0), unit_params, [100], 1, seed=0)
        for name in ("hellinger_sq", "tv_poisson", "tv_gaussian", "w1_smoothed"):
            v = getattr(rec, name)
            assert np.isfinite(v) and v >= 0
        assert rec.hellinger_sq <= 2
        assert rec.runtime_ms > 0

    def test_w1_bounded_by_diameter(self, unit_params):
        records = rate_study(Prior.dirac(0.5, 1.0), unit_params, [50, 100], 3, seed=1, timing=False)
        assert all(r.w1_smoothed <= 1.0 for r in records)

    def test_deterministic_and_thread_independent(self, unit_params):
        args = (Prior.two_point(0.3, 0.9, 0.5, 1.0), unit_params, [100, 200, 400], 3)
        a = rate_study(*args, seed=5, timing=False)
        b = rate_study(*args, seed=5, timing=False, threads=4)
        assert a == b
        assert [(r.n, r.trial) for r in a] == [(n, t) for n in (100, 200, 400) for t in range(3)]
        c = rate_study(*args, seed=6, timing=False)
        assert a != c

    def test_metric_chain(self, unit_params):
        for r in rate_study(Prior.two_point(0.3, 0.9, 0.5, 1.0), unit_params, [300], 4, seed=2):
            assert r.tv_poisson <= math.sqrt(r.hellinger_sq) + 1e-9

    def test_sigma_schedule(self, unit_params):
        sched = polylog_sigma_schedule(0.5)
        recs = rate_study(Prior.dirac(0.5, 1.0), unit_params, [100, 1000], 1, seed=3, sigma_schedule=sched, timing=False)
        assert recs[0].sigma == pytest.approx(sched(100))
        assert recs[1].sigma < recs[0].sigma
        mapped = rate_study(Prior.dirac(0.5, 1.0), unit_params, [100], 1, seed=3, sigma_schedule={100: 0.25})
        assert mapped[0].sigma == 0.25

    def test_validation(self, unit_params):
        with pytest.raises(ValueError):
            rate_study(Prior.dirac(0.5, 1.0), unit_params, [200, 100], 1, seed=0)
        with pytest.raises(ValueError):
            rate_study(Prior.dirac(0.5, 1.0), unit_params, [100], 0, seed=0)
        with pytest.raises(ValueError):
            polylog_sigma_schedule(1.5)
