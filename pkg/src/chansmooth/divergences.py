"""Distances between Poisson- and Gaussian-smoothed priors.

Every function returns a :class:`DivergenceResult` carrying the value and
a bound on the numerical error (series truncation, tail cut-off and
quadrature), so callers can compare values "within combined error".
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import erfc, ndtr

from .measures import (
    ChannelParams,
    GaussianMixture,
    Prior,
    gaussian_cdf,
    gaussian_density,
    gaussian_tail_bound,
    gaussian_tail_radius,
    poisson_pmf,
)
from .quadrature import adaptive_simpson
from .transforms import char_fn


class Method(str, enum.Enum):
    SERIES = "series"
    QUADRATURE = "quadrature"
    PLANCHEREL = "plancherel"
    CDF_INTEGRAL = "cdf-integral"


@dataclass(frozen=True)
class DivergenceResult:
    value: float
    error_bound: float
    method: Method

    def __float__(self):
        return self.value


# squared-L2 integrals are resolved this much tighter than tol
_L2_TIGHTEN = 1e-4
_ROOT_GRID = 2048


def _integrate_abs(diff, lo: float, hi: float, tol: float) -> tuple[float, float]:
    """``int_lo^hi |diff(t)| dt`` for smooth ``diff``.

    Sign changes are located on a uniform grid and polished with Brent's
    method, so each piece handed to adaptive Simpson is smooth.
    """
    grid = np.linspace(lo, hi, _ROOT_GRID + 1)
    vals = diff(grid)
    if not np.any(vals):
        return 0.0, 0.0
    sign = np.sign(vals)

    def scalar(t):
        return float(diff(np.array([t]))[0])

    cuts = [lo]
    for k in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
        u, v = grid[k], grid[k + 1]
        # scalar and batched sums can disagree in sign at roundoff level
        if scalar(u) * scalar(v) < 0:
            cuts.append(brentq(scalar, u, v, xtol=1e-15))
        else:
            cuts.append(0.5 * (u + v))
    cuts.append(hi)
    total = err = 0.0
    width = hi - lo
    for u, v in zip(cuts[:-1], cuts[1:]):
        if v <= u:
            continue
        val, e = adaptive_simpson(lambda t: np.abs(diff(t)), u, v, tol * (v - u) / width)
        total += val
        err += e
    return total, err


def tv_poisson(p1: Prior, p2: Prior, params: ChannelParams) -> DivergenceResult:
    """Total variation between ``Poi_gamma o p1`` and ``Poi_gamma o p2``."""
    t1 = poisson_pmf(p1, params)
    t2 = poisson_pmf(p2, params)
    value = 0.5 * float(np.abs(t1.pmf - t2.pmf).sum())
    return DivergenceResult(value, 0.5 * (t1.tail_mass + t2.tail_mass), Method.SERIES)


def hellinger_sq_poisson(p1: Prior, p2: Prior, params: ChannelParams) -> DivergenceResult:
    """Squared Hellinger ``sum_n (sqrt(p1_n) - sqrt(p2_n))^2`` of the Poisson mixtures."""
    t1 = poisson_pmf(p1, params)
    t2 = poisson_pmf(p2, params)
    value = float(((np.sqrt(t1.pmf) - np.sqrt(t2.pmf)) ** 2).sum())
    return DivergenceResult(value, t1.tail_mass + t2.tail_mass, Method.SERIES)


def tv_gaussian(p1: Prior, p2: Prior, params: ChannelParams) -> DivergenceResult:
    """Total variation between ``Gsn_sigma o p1`` and ``Gsn_sigma o p2``.

    Integrated on ``[-T, a + T]``; outside, each mixture has at most
    ``2 g(T)`` mass with ``g`` the Gaussian tail bound, so the cut-off costs
    at most ``2 g(T)`` of TV.
    """
    sigma, a = params.sigma, params.a
    m1, m2 = GaussianMixture(p1, sigma), GaussianMixture(p2, sigma)
    T = gaussian_tail_radius(sigma, params.tol / 4.0)
    tail = 2.0 * gaussian_tail_bound(sigma, T)

    def diff(t):
        return gaussian_density(m1, t) - gaussian_density(m2, t)

    l1, quad_err = _integrate_abs(diff, -T, a + T, params.tol / 10.0)
    return DivergenceResult(0.5 * l1, 0.5 * quad_err + tail, Method.QUADRATURE)


def _sqrt_with_error(sq: float, sq_err: float) -> tuple[float, float]:
    sq = max(sq, 0.0)
    value = math.sqrt(sq)
    err = math.sqrt(sq_err) if value == 0 else min(math.sqrt(sq_err), sq_err / (2.0 * value))
    return value, err


def l2_gaussian(p1: Prior, p2: Prior, params: ChannelParams, method: str = "direct") -> DivergenceResult:
    """L2 distance between the two Gaussian mixture densities.

    ``method="direct"`` integrates the squared density difference;
    ``method="plancherel"`` integrates ``exp(-sigma^2 t^2) |Psi_1 - Psi_2|^2 / (2 pi)``
    in the frequency domain.
    """
    sigma, a = params.sigma, params.a
    sq_tol = params.tol * _L2_TIGHTEN
    if method == "direct":
        m1, m2 = GaussianMixture(p1, sigma), GaussianMixture(p2, sigma)
        peak = 1.0 / (math.sqrt(2.0 * math.pi) * sigma)
        # (d1 - d2)^2 <= peak * (d1 + d2) and each density has <= 2 g(T) outside
        T = gaussian_tail_radius(sigma, sq_tol / (8.0 * peak))
        tail = 4.0 * peak * gaussian_tail_bound(sigma, T)

        def integrand(t):
            d = gaussian_density(m1, t) - gaussian_density(m2, t)
            return d * d

        sq, err = adaptive_simpson(integrand, -T, a + T, sq_tol / 2.0, initial_panels=64)
        value, verr = _sqrt_with_error(sq, err + tail)
        return DivergenceResult(value, verr, Method.QUADRATURE)
    if method == "plancherel":
        # |Psi_1 - Psi_2| <= 2; tail of (4 / 2pi) int_{|t|>T} exp(-sigma^2 t^2)
        T = math.sqrt(math.log(16.0 / (math.pi * params.tol)) / sigma**2)
        while 2.0 / (math.sqrt(math.pi) * sigma) * erfc(sigma * T) > sq_tol / 2.0:
            T *= 1.1
        tail = 2.0 / (math.sqrt(math.pi) * sigma) * float(erfc(sigma * T))

        def integrand(t):
            d = char_fn(p1, t) - char_fn(p2, t)
            return np.exp(-(sigma * t) ** 2) * (d.real**2 + d.imag**2)

        # integrand is even in t
        half, err = adaptive_simpson(integrand, 0.0, T, sq_tol / 8.0, initial_panels=64)
        sq = half / math.pi
        value, verr = _sqrt_with_error(sq, err / math.pi + tail)
        return DivergenceResult(value, verr, Method.PLANCHEREL)
    raise ValueError(f"unknown method {method!r}; expected 'direct' or 'plancherel'")


def w1(p1: Prior, p2: Prior) -> DivergenceResult:
    """Exact W1 between atomic priors as the area between their CDFs."""
    x = np.union1d(p1.atoms, p2.atoms)
    gap = np.abs(p1.cdf(x[:-1]) - p2.cdf(x[:-1]))
    return DivergenceResult(float(gap @ np.diff(x)), 0.0, Method.CDF_INTEGRAL)


def w1_smoothed(p1: Prior, p2: Prior, sigma: float, tol: float = 1e-10) -> DivergenceResult:
    """W1 between ``Gsn_sigma o p1`` and ``Gsn_sigma o p2`` (Gaussian-smoothed W1).

    In one dimension the optimal coupling is the quantile coupling, so the
    distance is ``int |F_1 - F_2|``.  Outside ``[-T, a + T]`` each CDF (or its
    complement) integrates to at most ``sigma * phi(T / sigma)``.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    lo_atom = min(p1.atoms[0], p2.atoms[0])
    hi_atom = max(p1.atoms[-1], p2.atoms[-1])
    m1, m2 = GaussianMixture(p1, sigma), GaussianMixture(p2, sigma)

    def tail_area(T):
        z = T / sigma
        return 4.0 * sigma * (math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi) - z * float(ndtr(-z)))

    T = sigma
    while tail_area(T) > tol / 2.0:
        T *= 1.25

    def diff(t):
        return gaussian_cdf(m1, t) - gaussian_cdf(m2, t)

    value, err = _integrate_abs(diff, lo_atom - T, hi_atom + T, tol / 10.0)
    return DivergenceResult(value, err + tail_area(T), Method.CDF_INTEGRAL)
