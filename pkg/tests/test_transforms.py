import math

import numpy as np
import pytest

from chansmooth import ChannelParams, Prior, RemainderNotCertifiable, annulus_max, char_fn, laplace, random_prior
from chansmooth.transforms import laplace_gaussian_numeric, z_transform_poisson

from conftest import seeded_independent_pairs


class TestLaplace:
    """Exact transforms of atomic priors."""

    def test_dirac_real(self):
        assert laplace(Prior.dirac(0.7, 1.0), 2.0) == pytest.approx(math.exp(1.4))

    def test_normalization(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            assert laplace(random_prior(rng, 2.0), 0.0) == pytest.approx(1.0, abs=1e-14)

    def test_two_atom_characteristic_function(self):
        p = Prior([0.0, 1.0], [0.5, 0.5], 1.0)
        t = np.linspace(-10, 10, 41)
        np.testing.assert_allclose(char_fn(p, t), (1 + np.exp(1j * t)) / 2, atol=1e-15)

    def test_char_fn_is_laplace_on_imaginary_axis(self):
        p = Prior([0.1, 0.5, 0.9], [0.2, 0.3, 0.5], 1.0)
        t = np.linspace(-7, 7, 29)
        np.testing.assert_array_equal(char_fn(p, t), laplace(p, 1j * t))

    def test_dirac_char_fn_unimodular(self):
        t = np.linspace(-50, 50, 201)
        np.testing.assert_allclose(np.abs(char_fn(Prior.dirac(0.37, 1.0), t)), 1.0, atol=1e-15)

    def test_char_fn_bounded(self):
        rng = np.random.default_rng(1)
        t = np.linspace(-30, 30, 301)
        for _ in range(50):
            assert np.all(np.abs(char_fn(random_prior(rng, 3.0), t)) <= 1.0 + 1e-15)

    def test_array_shape(self):
        s = np.array([[0.0, 1.0], [1j, -1.0]])
        assert laplace(Prior.dirac(0.5, 1.0), s).shape == (2, 2)


class TestZTransform:
    """Poisson mixture z-transform against the prior Laplace transform."""

    def test_total_mass(self, unit_params):
        v = z_transform_poisson(Prior.uniform_grid(4, 1.0), unit_params, 1.0)
        assert abs(v.value - 1.0) <= unit_params.tol

    def test_constant_term(self):
        p = Prior([0.2, 0.8], [0.4, 0.6], 1.0)
        params = ChannelParams(gamma=2.5)
        v = z_transform_poisson(p, params, 0.0)
        assert v.value == pytest.approx(complex(laplace(p, -2.5)), abs=1e-15)

    def test_dirac_at_two(self, unit_params):
        v = z_transform_poisson(Prior.dirac(1.0, 1.0), unit_params, 2.0)
        assert abs(v.value - math.e) <= v.remainder + 1e-12
        assert v.value.real == pytest.approx(2.7182818, abs=1e-7)

    def test_identity_random_cases(self):
        rng = np.random.default_rng(2024)
        for _ in range(200):
            a = rng.uniform(0.5, 2.0)
            params = ChannelParams(a=a, gamma=rng.uniform(0.2, 4.0))
            prior = random_prior(rng, a, 5)
            z = rng.uniform(0, 2) * np.exp(1j * rng.uniform(0, 2 * np.pi))
            v = z_transform_poisson(prior, params, z)
            exact = laplace(prior, params.gamma * (z - 1))
            assert abs(v.value - exact) <= v.remainder + 1e-8

    def test_remainder_not_certifiable(self, unit_params):
        with pytest.raises(RemainderNotCertifiable, match="remainder not certifiable"):
            z_transform_poisson(Prior.dirac(1.0, 1.0), unit_params, 4.0)
        with pytest.raises(RemainderNotCertifiable):
            z_transform_poisson(Prior.dirac(1.0, 1.0), unit_params, 3.0, z_cap=2.0)


class TestGaussianLaplace:
    """Numerical Laplace transform of the Gaussian mixture."""

    def test_identity_random_cases(self):
        rng = np.random.default_rng(77)
        for _ in range(100):
            prior = random_prior(rng, 1.0, 4)
            sigma = rng.choice([0.5, 1.0, 2.0])
            s = rng.uniform(-5, 5)
            numeric = laplace_gaussian_numeric(prior, sigma, s)
            exact = math.exp(s * s * sigma * sigma / 2) * laplace(prior, s).real
            assert numeric == pytest.approx(exact, rel=1e-6)


class TestAnnulusMax:
    """Maximum modulus of the half Laplace difference on circles."""

    def test_identical_priors(self):
        p = Prior.uniform_grid(3, 1.0)
        for r in (0.1, 1.0, 5.0):
            assert annulus_max((p, p), -1.0, r) == 0.0

    def test_requires_grid(self):
        p = Prior.dirac(0.5, 1.0)
        with pytest.raises(ValueError):
            annulus_max((p, p), 0.0, 1.0, grid=32)

    def test_dirac_pair_on_unit_circle(self):
        # |f| <= (e^{a Re s} + 1) / 2 and Re s <= 0 on |s + 1| = 1
        v = annulus_max((Prior.dirac(0.0, 1.0), Prior.dirac(1.0, 1.0)), -1.0, 1.0)
        assert 0 < v <= 1.0
        theta = np.linspace(0, 2 * np.pi, 2_000_001)
        oracle = np.max(np.abs(1 - np.exp(-1 + np.exp(1j * theta)))) / 2
        assert v == pytest.approx(oracle, rel=1e-9)

    def test_nondecreasing_in_radius(self):
        for p1, p2 in seeded_independent_pairs(5, 20):
            radii = [0.3, 1.0, 2.5, 4.0]
            vals = [annulus_max((p1, p2), -1.0, r) for r in radii]
            assert all(b >= a * (1 - 1e-12) for a, b in zip(vals, vals[1:]))

    def test_log_convex_in_log_radius(self):
        rng = np.random.default_rng(9)
        for p1, p2 in seeded_independent_pairs(11, 25):
            center = complex(rng.uniform(-2, 1))
            u = np.sort(rng.uniform(-1.0, 1.5, 3))
            mid = 0.5 * (u[0] + u[2])
            logm = [math.log(annulus_max((p1, p2), center, math.exp(x))) for x in (u[0], mid, u[2])]
            assert logm[1] <= 0.5 * (logm[0] + logm[2]) + 1e-3
