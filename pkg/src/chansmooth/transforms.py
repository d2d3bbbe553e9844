"""Laplace, Fourier and z-transforms of atomic priors and their mixtures.

Complex arguments are plain Python / numpy complex numbers.  For an
atomic prior every transform is an exact finite sum; only the z-transform
of the Poisson mixture involves a truncated series, whose remainder is
bounded explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .exceptions import RemainderNotCertifiable
from .measures import (
    DEFAULT_TRUNCATION_CAP,
    ChannelParams,
    GaussianMixture,
    Prior,
    gaussian_density,
    gaussian_tail_bound,
    gaussian_tail_radius,
    poisson_pmf,
    truncation_index,
)
from .quadrature import gauss_legendre

DEFAULT_Z_CAP = 4.0
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def laplace(prior: Prior, s):
    """``L(prior)(s) = E[exp(s X)]`` for complex ``s`` (scalar or array)."""
    s = np.asarray(s, dtype=np.complex128)
    out = np.exp(s[..., None] * prior.atoms) @ prior.weights
    return complex(out) if out.ndim == 0 else out


def char_fn(prior: Prior, t):
    """Characteristic function ``Psi(t) = L(prior)(i t)``."""
    return laplace(prior, 1j * np.asarray(t, dtype=np.float64))


@dataclass(frozen=True)
class SeriesValue:
    """A truncated series value with a certified bound on the dropped terms."""

    value: complex
    remainder: float
    n_terms: int


def _log_remainder(lam: float, n_max: int, radius: float) -> float:
    """log bound on ``sum_{n > n_max} pmf(n) radius^n`` for a mixture of Poisson(<= lam).

    Requires ``n_max + 1 > lam``; then the (n_max+1)-th Poisson term is
    largest at mean ``lam``, and successive terms shrink at least by the
    ratio ``lam * radius / (n_max + 2)``.
    """
    q = lam * radius / (n_max + 2)
    if n_max + 1 <= lam or q >= 1.0:
        return math.inf
    if radius == 0:
        return -math.inf
    n1 = n_max + 1
    return n1 * math.log(lam * radius) - lam - gammaln(n1 + 1.0) - math.log1p(-q)


def z_transform_poisson(
    prior: Prior,
    params: ChannelParams,
    z,
    z_cap: float = DEFAULT_Z_CAP,
    cap: int = DEFAULT_TRUNCATION_CAP,
) -> SeriesValue:
    """``Z(Poi_gamma o prior)(z) = sum_n pmf(n) z^n`` from the truncated PMF table.

    The table is extended until the certified remainder is below
    ``params.tol``.  Raises :class:`RemainderNotCertifiable` for
    ``|z| >= z_cap``.
    """
    z = complex(z)
    radius = abs(z)
    if radius >= z_cap:
        raise RemainderNotCertifiable(f"remainder not certifiable: |z|={radius:g} >= {z_cap:g}")
    lam = params.gamma * params.a
    log_tol = math.log(params.tol)
    n_max = truncation_index(lam, params.tol, cap)
    while _log_remainder(lam, n_max, radius) > log_tol:
        n_max = int(n_max * 1.25) + 1
        if n_max > cap:
            raise RemainderNotCertifiable(
                f"remainder not certifiable within {cap} terms at |z|={radius:g}"
            )
    table = poisson_pmf(prior, params, n_max=n_max, cap=cap)
    value = complex(np.polynomial.polynomial.polyval(z, table.pmf))
    remainder = math.exp(_log_remainder(lam, table.n_max, radius))
    if radius <= 1.0:
        remainder = min(remainder, table.tail_mass)
    return SeriesValue(value=value, remainder=remainder, n_terms=table.n_max + 1)


def laplace_gaussian_numeric(prior: Prior, sigma: float, s: float, rel_tail: float = 1e-9) -> float:
    """``int exp(s t) (Gsn_sigma o prior)(t) dt`` by Gauss-Legendre panels.

    Exponential tilting moves each component mean by ``s sigma^2``, so the
    window is ``[-T, a + T]`` with ``T = |s| sigma^2 + T0`` and ``T0`` chosen
    so the neglected tilted mass is at most ``rel_tail``.  Closed form:
    ``exp(s^2 sigma^2 / 2) * laplace(prior, s)``.
    """
    s = float(s)
    T = abs(s) * sigma**2 + gaussian_tail_radius(sigma, rel_tail / 2.0)
    mix = GaussianMixture(prior, sigma)
    lo, hi = -T, prior.a + T
    panels = max(16, int(math.ceil(2.0 * (hi - lo) / sigma)))
    # factor out the peak of the exponential to keep terms O(1)
    shift = s * (hi if s > 0 else lo)
    value = gauss_legendre(lambda t: np.exp(s * t - shift) * gaussian_density(mix, t), lo, hi, panels, 20)
    return value * math.exp(shift)


def half_difference(p1: Prior, p2: Prior, s):
    """``f(s) = (L(p1)(s) - L(p2)(s)) / 2``."""
    return 0.5 * (laplace(p1, s) - laplace(p2, s))


def annulus_max(
    prior_pair: tuple[Prior, Prior],
    center: complex,
    r: float,
    grid: int = 1024,
    refine_iters: int = 60,
) -> float:
    """Estimate ``M(r) = max_{|s - center| <= r} |f(s)|`` for the half Laplace difference.

    By the maximum modulus principle the maximum sits on the circle.  The
    circle is scanned on ``grid`` equally spaced angles and the best arc is
    refined by golden-section search.  This is a lower estimate of the true
    maximum with error controlled by the grid resolution.
    """
    if grid < 64:
        raise ValueError("grid must be at least 64")
    p1, p2 = prior_pair
    center = complex(center)

    def modulus(theta):
        return np.abs(half_difference(p1, p2, center + r * np.exp(1j * np.asarray(theta))))

    theta = np.linspace(0.0, 2.0 * math.pi, grid, endpoint=False)
    vals = modulus(theta)
    k = int(np.argmax(vals))
    best = float(vals[k])
    if best == 0.0 or r == 0.0:
        return best

    step = 2.0 * math.pi / grid
    lo, hi = theta[k] - step, theta[k] + step
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = float(modulus(x1)), float(modulus(x2))
    for _ in range(refine_iters):
        if f1 > f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = float(modulus(x1))
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = float(modulus(x2))
    return max(best, f1, f2)
