"""Atomic priors on [0, a] and their Poisson / Gaussian pushforwards.

A prior is a finitely supported probability measure. Pushing it through
the Poisson channel (x -> Poi(gamma * x)) gives a Poisson mixture on the
nonnegative integers; pushing it through the Gaussian channel
(x -> N(x, sigma^2)) gives a Gaussian location mixture on the real line.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln, ndtr, xlogy

from .exceptions import TruncationCapExceeded

DEFAULT_TOL = 1e-10
DEFAULT_TRUNCATION_CAP = 10**7
_WEIGHT_SUM_TOL = 1e-12
_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(eq=False)
class Prior:
    """Finitely supported probability measure on ``[0, a]``.

    Atoms must be strictly increasing and lie in ``[0, a]``; weights are
    nonnegative and sum to one within 1e-12.  Use :meth:`from_unsorted`
    to build a prior from arbitrary (possibly repeated) locations.
    """

    atoms: np.ndarray
    weights: np.ndarray
    a: float

    def __post_init__(self):
        self.atoms = np.array(self.atoms, dtype=np.float64).reshape(-1)
        self.weights = np.array(self.weights, dtype=np.float64).reshape(-1)
        self.a = float(self.a)
        if not self.a > 0 or not math.isfinite(self.a):
            raise ValueError(f"support bound a must be positive, got {self.a}")
        if self.atoms.size == 0:
            raise ValueError("prior needs at least one atom")
        if self.atoms.shape != self.weights.shape:
            raise ValueError("atoms and weights must have the same length")
        if not np.all(np.isfinite(self.atoms)) or not np.all(np.isfinite(self.weights)):
            raise ValueError("atoms and weights must be finite")
        if self.atoms[0] < 0 or self.atoms[-1] > self.a:
            raise ValueError(f"atoms must lie in [0, {self.a}]")
        if np.any(np.diff(self.atoms) <= 0):
            raise ValueError("atoms must be strictly increasing")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")
        if abs(self.weights.sum() - 1.0) > _WEIGHT_SUM_TOL:
            raise ValueError(f"weights sum to {self.weights.sum()!r}, expected 1")
        self.atoms.setflags(write=False)
        self.weights.setflags(write=False)

    @classmethod
    def from_unsorted(cls, atoms, weights, a) -> "Prior":
        """Sort atoms, merge duplicates, drop zero weights and renormalize."""
        atoms = np.asarray(atoms, dtype=np.float64).reshape(-1)
        weights = np.asarray(weights, dtype=np.float64).reshape(-1)
        keep = weights > 0
        atoms, weights = atoms[keep], weights[keep]
        uniq, inverse = np.unique(atoms, return_inverse=True)
        merged = np.bincount(inverse, weights=weights, minlength=uniq.size)
        return cls(uniq, merged / merged.sum(), a)

    @classmethod
    def dirac(cls, x: float, a: float) -> "Prior":
        return cls([x], [1.0], a)

    @classmethod
    def two_point(cls, x: float, y: float, w: float, a: float) -> "Prior":
        """``w * delta_x + (1 - w) * delta_y``."""
        return cls.from_unsorted([x, y], [w, 1.0 - w], a)

    @classmethod
    def uniform_grid(cls, m: int, a: float) -> "Prior":
        """Equal weights on ``m`` equally spaced points including 0 and a."""
        if m < 1:
            raise ValueError("uniform_grid needs m >= 1")
        atoms = np.linspace(0.0, a, m) if m > 1 else np.array([a / 2.0])
        return cls(atoms, np.full(m, 1.0 / m), a)

    def __len__(self):
        return self.atoms.size

    def __eq__(self, other):
        if not isinstance(other, Prior):
            return NotImplemented
        return (
            self.a == other.a
            and np.array_equal(self.atoms, other.atoms)
            and np.array_equal(self.weights, other.weights)
        )

    def __repr__(self):
        return f"Prior({format_prior(self)})"

    def mean(self) -> float:
        return float(self.atoms @ self.weights)

    def cdf(self, x):
        """Right-continuous CDF of the atomic measure."""
        idx = np.searchsorted(self.atoms, np.asarray(x, dtype=np.float64), side="right")
        cum = np.concatenate([[0.0], np.cumsum(self.weights)])
        return cum[idx]


def discretize(density: Callable[[np.ndarray], np.ndarray], a: float, m: int) -> Prior:
    """Approximate a continuous density on ``[0, a]`` by an ``m``-atom prior.

    Mass of each of ``m`` equal cells is estimated by the midpoint rule and
    placed at the cell midpoint.
    """
    edges = np.linspace(0.0, a, m + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    mass = np.clip(np.asarray(density(mids), dtype=np.float64), 0.0, None)
    if mass.sum() <= 0:
        raise ValueError("density has no mass on [0, a]")
    return Prior.from_unsorted(mids, mass / mass.sum(), a)


@dataclass(frozen=True)
class ChannelParams:
    """Support bound ``a``, Gaussian std ``sigma``, Poisson scale ``gamma``."""

    a: float = 1.0
    sigma: float = 1.0
    gamma: float = 1.0
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        for name in ("a", "sigma", "gamma", "tol"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite real, got {value!r}")

    def replace(self, **changes) -> "ChannelParams":
        fields = dict(a=self.a, sigma=self.sigma, gamma=self.gamma, tol=self.tol)
        fields.update(changes)
        return ChannelParams(**fields)


# ----------------------------------------------------------------------
# Poisson channel
# ----------------------------------------------------------------------


@dataclass
class PoissonMixtureTable:
    """PMF of ``Poi_gamma o prior`` on ``0..n_max`` plus the mass beyond it."""

    params: ChannelParams
    pmf: np.ndarray
    tail_mass: float

    @property
    def n_max(self) -> int:
        return self.pmf.size - 1


def log_chernoff_tail(lam: float, n: int) -> float:
    """log of the Chernoff bound ``P(Poi(lam) >= n) <= e^-lam (e lam / n)^n``.

    Valid for ``n > lam``; returns 0 (the trivial bound) otherwise.
    """
    if n <= lam:
        return 0.0
    if lam == 0:
        return -math.inf
    return -lam + n * (1.0 + math.log(lam) - math.log(n))


def truncation_index(lam: float, tol: float, cap: int = DEFAULT_TRUNCATION_CAP) -> int:
    """Smallest ``N > lam`` whose Chernoff tail bound is at most ``tol``."""
    log_tol = math.log(tol)
    lo = int(math.floor(lam)) + 1
    if log_chernoff_tail(lam, lo) <= log_tol:
        return lo
    hi = max(2 * lo, lo + 1)
    while log_chernoff_tail(lam, hi) > log_tol:
        if hi > cap:
            raise TruncationCapExceeded(
                f"truncation cap exceeded: Poisson({lam:g}) needs more than {cap} terms"
            )
        hi *= 2
    # the bound is decreasing for n > lam
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if log_chernoff_tail(lam, mid) <= log_tol:
            hi = mid
        else:
            lo = mid
    if hi > cap:
        raise TruncationCapExceeded(
            f"truncation cap exceeded: Poisson({lam:g}) needs {hi} > {cap} terms"
        )
    return hi


def poisson_component_logpmf(n: np.ndarray, means: np.ndarray) -> np.ndarray:
    """``log Poi(mean)(n)`` for every (mean, n) pair; shape (len(means), len(n))."""
    n = np.asarray(n, dtype=np.float64)[None, :]
    means = np.asarray(means, dtype=np.float64)[:, None]
    return xlogy(n, means) - means - gammaln(n + 1.0)


def poisson_pmf(
    prior: Prior,
    params: ChannelParams,
    n_max: int | None = None,
    cap: int = DEFAULT_TRUNCATION_CAP,
) -> PoissonMixtureTable:
    """Truncated PMF of the Poisson mixture with a certified tail.

    The truncation point is chosen from a Chernoff bound for
    ``Poisson(gamma * a)``, whose upper tail dominates that of every
    mixture component.  ``n_max`` can only raise the truncation point.
    """
    lam_max = params.gamma * params.a
    n_auto = truncation_index(lam_max, params.tol, cap)
    n_top = n_auto if n_max is None else max(n_auto, int(n_max))
    if n_top > cap:
        raise TruncationCapExceeded(f"truncation cap exceeded: {n_top} > {cap}")
    logp = poisson_component_logpmf(np.arange(n_top + 1), params.gamma * prior.atoms)
    pmf = prior.weights @ np.exp(logp)
    tail = math.exp(log_chernoff_tail(lam_max, n_top + 1))
    return PoissonMixtureTable(params=params, pmf=pmf, tail_mass=tail)


def sample_poisson_mixture(prior: Prior, params: ChannelParams, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` iid observations from ``Poi_gamma o prior``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    comp = rng.choice(len(prior), size=n, p=prior.weights)
    return rng.poisson(params.gamma * prior.atoms[comp])


def derive_seed(seed: int, *keys: int) -> int:
    """Independent 63-bit stream seed for ``(seed, *keys)``."""
    state = np.random.SeedSequence([int(seed), *map(int, keys)]).generate_state(2, np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))


# ----------------------------------------------------------------------
# Gaussian channel
# ----------------------------------------------------------------------


@dataclass
class GaussianMixture:
    prior: Prior
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


def gaussian_density(mix: GaussianMixture, t):
    """Mixture density ``sum_i w_i phi_sigma(t - x_i)``; vectorized in ``t``."""
    t = np.asarray(t, dtype=np.float64)
    z = (t[..., None] - mix.prior.atoms) / mix.sigma
    dens = np.exp(-0.5 * z * z) @ mix.prior.weights / (_SQRT_2PI * mix.sigma)
    return dens if dens.ndim else float(dens)


def gaussian_cdf(mix: GaussianMixture, t):
    """Mixture CDF ``sum_i w_i Phi((t - x_i) / sigma)``; vectorized in ``t``."""
    t = np.asarray(t, dtype=np.float64)
    cdf = ndtr((t[..., None] - mix.prior.atoms) / mix.sigma) @ mix.prior.weights
    cdf = np.clip(cdf, 0.0, 1.0)
    return cdf if cdf.ndim else float(cdf)


def gaussian_tail_bound(sigma: float, T: float) -> float:
    """``sqrt(2/pi) * sigma * exp(-T^2 / (2 sigma^2)) / T``, bounds ``P(N(0, sigma^2) > T)``."""
    return math.sqrt(2.0 / math.pi) * sigma * math.exp(-T * T / (2.0 * sigma * sigma)) / T


def gaussian_tail_radius(sigma: float, target: float) -> float:
    """Smallest ``T > 0`` with ``gaussian_tail_bound(sigma, T) <= target``."""
    log_c = 0.5 * math.log(2.0 / math.pi) + math.log(sigma) - math.log(target)

    def excess(T):
        return log_c - T * T / (2.0 * sigma * sigma) - math.log(T)

    lo = 1e-300
    hi = sigma * (math.sqrt(2.0 * max(log_c - math.log(sigma), 1.0)) + 1.0)
    while excess(hi) > 0:
        hi *= 2.0
    if excess(lo) <= 0:
        return lo
    return brentq(excess, lo, hi, xtol=1e-14 * hi, rtol=1e-15) * (1.0 + 1e-12)


# ----------------------------------------------------------------------
# Text records and random families
# ----------------------------------------------------------------------


def _fmt_list(values) -> str:
    return "[" + ", ".join(repr(float(v)) for v in values) + "]"


def format_prior(prior: Prior) -> str:
    """Serialize as ``atoms=[...] weights=[...] a=<real>`` (round-trip exact)."""
    return f"atoms={_fmt_list(prior.atoms)} weights={_fmt_list(prior.weights)} a={float(prior.a)!r}"


_RECORD_RE = re.compile(
    r"^\s*atoms\s*=\s*\[(?P<atoms>[^\]]*)\]\s+weights\s*=\s*\[(?P<weights>[^\]]*)\]"
    r"(?:\s+a\s*=\s*(?P<a>\S+))?\s*$"
)


def _parse_floats(text: str) -> list[float]:
    text = text.strip()
    return [float(tok) for tok in text.split(",")] if text else []


def parse_prior(text: str, a: float | None = None) -> Prior:
    """Inverse of :func:`format_prior`.  ``a`` fills in a missing support bound."""
    m = _RECORD_RE.match(text)
    if m is None:
        raise ValueError(f"not a prior record: {text!r}")
    atoms = _parse_floats(m.group("atoms"))
    weights = _parse_floats(m.group("weights"))
    if m.group("a") is not None:
        a_rec = float(m.group("a"))
        if a is not None and a_rec != a:
            raise ValueError(f"prior record has a={a_rec} but channel has a={a}")
        a = a_rec
    if a is None:
        raise ValueError("prior record has no support bound a")
    return Prior(atoms, weights, a)


def random_prior(rng: np.random.Generator, a: float, max_atoms: int = 4) -> Prior:
    """Prior with 1..max_atoms uniform atoms and Dirichlet(1) weights."""
    k = int(rng.integers(1, max_atoms + 1))
    atoms = rng.uniform(0.0, a, size=k)
    weights = rng.dirichlet(np.ones(k))
    return Prior.from_unsorted(atoms, weights, a)


def perturbed_prior(rng: np.random.Generator, prior: Prior, scale: float) -> Prior:
    """Move every atom by up to ``scale * a`` (reflected into [0, a]) and jitter weights."""
    a = prior.a
    shift = rng.uniform(-scale * a, scale * a, size=len(prior))
    atoms = np.abs(prior.atoms + shift)
    atoms = np.where(atoms > a, 2 * a - atoms, atoms)
    weights = prior.weights * np.exp(scale * rng.uniform(-1.0, 1.0, size=len(prior)))
    return Prior.from_unsorted(atoms, weights / weights.sum(), a)


def random_pair(
    rng: np.random.Generator,
    a: float,
    max_atoms: int = 4,
    log10_scale: tuple[float, float] = (-3.0, -1.0),
) -> tuple[Prior, Prior]:
    """A random prior and a local perturbation of it.

    The perturbation scale is log-uniform in ``10**log10_scale`` so a family
    of pairs covers several orders of magnitude of output divergence.
    """
    p1 = random_prior(rng, a, max_atoms)
    scale = 10.0 ** rng.uniform(*log10_scale)
    return p1, perturbed_prior(rng, p1, scale)


def prior_tv(p1: Prior, p2: Prior) -> float:
    """Exact total variation between two atomic priors."""
    atoms = np.union1d(p1.atoms, p2.atoms)
    w1 = np.zeros(atoms.size)
    w2 = np.zeros(atoms.size)
    w1[np.searchsorted(atoms, p1.atoms)] = p1.weights
    w2[np.searchsorted(atoms, p2.atoms)] = p2.weights
    return 0.5 * float(np.abs(w1 - w2).sum())

