import math

import numpy as np
import pytest
from scipy import integrate

from chansmooth.quadrature import adaptive_simpson, gauss_legendre


class TestAdaptiveSimpson:
    """Vectorized adaptive Simpson with error estimates."""

    @pytest.mark.parametrize(
        "f, lo, hi",
        [
            (np.sin, 0.0, math.pi),
            (lambda t: np.exp(-t * t), -6.0, 6.0),
            (lambda t: np.sqrt(np.abs(t)), -1.0, 2.0),
            (lambda t: 1.0 / (1.0 + 100.0 * t * t), -1.0, 1.0),
        ],
    )
    def test_against_scipy(self, f, lo, hi):
        value, err = adaptive_simpson(f, lo, hi, 1e-11)
        oracle, _ = integrate.quad(f, lo, hi, epsabs=1e-13, limit=500)
        assert abs(value - oracle) <= max(10 * err, 1e-10)
        assert err <= 1e-10

    def test_polynomial_exact(self):
        value, err = adaptive_simpson(lambda t: t**3 - 2 * t, 0.0, 2.0, 1e-12)
        assert value == pytest.approx(0.0, abs=1e-13)

    def test_empty_interval(self):
        assert adaptive_simpson(np.cos, 1.0, 1.0, 1e-10)[0] == 0.0


def test_gauss_legendre_against_scipy():
    f = lambda t: np.exp(0.7 * t) * np.cos(3 * t)
    oracle, _ = integrate.quad(f, -2.0, 5.0, epsabs=1e-14)
    assert gauss_legendre(f, -2.0, 5.0) == pytest.approx(oracle, rel=1e-13)
