import math

import numpy as np
import pytest
from scipy import stats

from chansmooth import ChannelParams, Prior, TruncationCapExceeded, format_prior, parse_prior, poisson_pmf
from chansmooth.measures import (
    GaussianMixture,
    derive_seed,
    discretize,
    gaussian_cdf,
    gaussian_density,
    gaussian_tail_bound,
    gaussian_tail_radius,
    log_chernoff_tail,
    prior_tv,
    sample_poisson_mixture,
    truncation_index,
)


class TestPrior:
    """Validation and constructors for atomic priors."""

    def test_rejects_atoms_outside_support(self):
        with pytest.raises(ValueError):
            Prior([0.5, 1.5], [0.5, 0.5], 1.0)

    def test_rejects_bad_weights(self):
        with pytest.raises(ValueError):
            Prior([0.1, 0.2], [0.7, 0.7], 1.0)
        with pytest.raises(ValueError):
            Prior([0.1, 0.2], [1.5, -0.5], 1.0)

    def test_rejects_unsorted_or_repeated_atoms(self):
        with pytest.raises(ValueError):
            Prior([0.2, 0.1], [0.5, 0.5], 1.0)
        with pytest.raises(ValueError):
            Prior([0.2, 0.2], [0.5, 0.5], 1.0)

    def test_from_unsorted_merges_duplicates(self):
        p = Prior.from_unsorted([0.7, 0.2, 0.7], [0.25, 0.5, 0.25], 1.0)
        np.testing.assert_array_equal(p.atoms, [0.2, 0.7])
        np.testing.assert_allclose(p.weights, [0.5, 0.5])

    def test_presets(self):
        assert Prior.dirac(0.4, 1.0).mean() == pytest.approx(0.4)
        tp = Prior.two_point(0.9, 0.3, 0.25, 1.0)
        np.testing.assert_array_equal(tp.atoms, [0.3, 0.9])
        np.testing.assert_allclose(tp.weights, [0.75, 0.25])
        grid = Prior.uniform_grid(5, 2.0)
        np.testing.assert_allclose(grid.atoms, [0, 0.5, 1, 1.5, 2])
        np.testing.assert_allclose(grid.weights, 0.2)

    def test_arrays_are_read_only(self):
        p = Prior.dirac(0.5, 1.0)
        with pytest.raises(ValueError):
            p.atoms[0] = 0.1

    def test_cdf_is_right_continuous(self):
        p = Prior.two_point(0.25, 0.75, 0.4, 1.0)
        np.testing.assert_allclose(p.cdf([0.0, 0.25, 0.5, 0.75, 1.0]), [0.0, 0.4, 0.4, 1.0, 1.0])

    def test_discretize_uniform_density(self):
        p = discretize(lambda x: np.ones_like(x), 1.0, 10)
        np.testing.assert_allclose(p.weights, 0.1)
        assert p.mean() == pytest.approx(0.5)


class TestRecords:
    """Text serialization of priors."""

    def test_round_trip_is_exact(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            k = rng.integers(1, 6)
            p = Prior.from_unsorted(rng.uniform(0, 2.5, k), rng.dirichlet(np.ones(k)), 2.5)
            assert parse_prior(format_prior(p)) == p

    def test_missing_bound_is_filled(self):
        p = parse_prior("atoms=[0.1, 0.5] weights=[0.5, 0.5]", a=1.0)
        assert p.a == 1.0

    def test_conflicting_bound_rejected(self):
        with pytest.raises(ValueError):
            parse_prior("atoms=[0.1] weights=[1] a=2", a=1.0)

    def test_garbage_rejected(self):
        with pytest.raises(ValueError):
            parse_prior("dirac 0.3", a=1.0)


class TestPoissonTable:
    """Truncated Poisson mixture PMF with certified tails."""

    def test_chernoff_dominates_exact_tail(self):
        for lam in (0.5, 3.0, 20.0):
            for n in range(int(lam) + 1, int(lam) + 40):
                exact = stats.poisson.sf(n - 1, lam)
                assert exact <= math.exp(log_chernoff_tail(lam, n)) * (1 + 1e-12)

    def test_truncation_index_is_minimal(self):
        lam, tol = 2.0, 1e-10
        n = truncation_index(lam, tol)
        assert log_chernoff_tail(lam, n) <= math.log(tol)
        assert n - 1 <= lam or log_chernoff_tail(lam, n - 1) > math.log(tol)

    def test_matches_scipy_mixture(self):
        prior = Prior([0.0, 0.4, 1.0], [0.2, 0.5, 0.3], 1.0)
        params = ChannelParams(gamma=3.0)
        table = poisson_pmf(prior, params)
        n = np.arange(table.n_max + 1)
        oracle = sum(w * stats.poisson.pmf(n, 3.0 * x) for x, w in zip(prior.atoms, prior.weights))
        np.testing.assert_allclose(table.pmf, oracle, rtol=1e-12, atol=1e-300)

    def test_mass_and_tail(self):
        prior = Prior.uniform_grid(7, 2.0)
        table = poisson_pmf(prior, ChannelParams(a=2.0, gamma=5.0))
        assert table.tail_mass <= 1e-10
        assert abs(table.pmf.sum() - 1.0) <= table.tail_mass + 1e-14

    def test_dirac_at_zero(self):
        table = poisson_pmf(Prior.dirac(0.0, 1.0), ChannelParams())
        assert table.pmf[0] == 1.0
        assert not table.pmf[1:].any()

    def test_large_lambda_is_finite(self):
        table = poisson_pmf(Prior.dirac(1.0, 1.0), ChannelParams(gamma=2000.0))
        assert np.all(np.isfinite(table.pmf))
        assert table.pmf.sum() == pytest.approx(1.0, abs=1e-9)

    def test_cap_exceeded(self):
        with pytest.raises(TruncationCapExceeded, match="truncation cap exceeded"):
            poisson_pmf(Prior.dirac(1.0, 1.0), ChannelParams(gamma=1e6), cap=1000)


class TestSampling:
    """Seeded Poisson mixture draws."""

    def test_reproducible(self):
        p = Prior.two_point(0.2, 0.8, 0.5, 1.0)
        a = sample_poisson_mixture(p, ChannelParams(gamma=4.0), 500, 11)
        b = sample_poisson_mixture(p, ChannelParams(gamma=4.0), 500, 11)
        np.testing.assert_array_equal(a, b)

    def test_mean(self):
        p = Prior.two_point(0.2, 0.8, 0.5, 1.0)
        y = sample_poisson_mixture(p, ChannelParams(gamma=4.0), 200_000, 5)
        assert y.mean() == pytest.approx(2.0, abs=0.02)

    def test_derived_seeds_differ(self):
        seeds = {derive_seed(1, n, t) for n in (100, 200) for t in range(50)}
        assert len(seeds) == 100
        assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)


class TestGaussian:
    """Gaussian mixture density, CDF and tail bound."""

    def test_density_and_cdf_against_scipy(self):
        prior = Prior([0.1, 0.6], [0.3, 0.7], 1.0)
        mix = GaussianMixture(prior, 0.5)
        t = np.linspace(-3, 4, 101)
        dens = 0.3 * stats.norm.pdf(t, 0.1, 0.5) + 0.7 * stats.norm.pdf(t, 0.6, 0.5)
        cdf = 0.3 * stats.norm.cdf(t, 0.1, 0.5) + 0.7 * stats.norm.cdf(t, 0.6, 0.5)
        np.testing.assert_allclose(gaussian_density(mix, t), dens, rtol=1e-13)
        np.testing.assert_allclose(gaussian_cdf(mix, t), cdf, rtol=1e-13, atol=1e-300)

    def test_scalar_input(self):
        mix = GaussianMixture(Prior.dirac(0.0, 1.0), 1.0)
        assert isinstance(gaussian_density(mix, 0.0), float)
        assert gaussian_cdf(mix, 0.0) == pytest.approx(0.5)

    def test_tail_bound_dominates(self):
        for sigma in (0.3, 1.0, 2.0):
            for T in (0.5, 1.0, 3.0, 8.0):
                assert stats.norm.sf(T, scale=sigma) <= gaussian_tail_bound(sigma, T)

    def test_tail_radius(self):
        T = gaussian_tail_radius(1.5, 1e-12)
        assert gaussian_tail_bound(1.5, T) <= 1e-12
        assert gaussian_tail_bound(1.5, 0.999 * T) > 1e-12


def test_prior_tv_exact():
    p = Prior([0.0, 0.5], [0.5, 0.5], 1.0)
    q = Prior([0.5, 1.0], [0.25, 0.75], 1.0)
    assert prior_tv(p, q) == pytest.approx(0.75)
    assert prior_tv(p, p) == 0.0
