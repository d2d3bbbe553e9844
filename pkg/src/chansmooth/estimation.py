"""Grid NPMLE for Poisson mixtures and the Monte Carlo rate-study harness."""

from __future__ import annotations

import enum
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np
from scipy.optimize import lsq_linear
from scipy.stats import linregress

from .divergences import hellinger_sq_poisson, tv_gaussian, tv_poisson, w1_smoothed
from .exceptions import InsufficientGrid, LikelihoodDegenerate
from .measures import ChannelParams, Prior, derive_seed, poisson_component_logpmf, sample_poisson_mixture

log = logging.getLogger(__name__)

# weight of the sum-to-one row in the Newton least-squares model
_SUM_PENALTY = 100.0
_SUM_REFINE = 10


@dataclass(frozen=True)
class NpmleConfig:
    grid_size: int = 200
    max_iters: int = 5000
    loglik_tol: float = 1e-9
    weight_floor: float = 1e-12
    polish: bool = True

    def __post_init__(self):
        if self.grid_size < 2:
            raise ValueError("grid_size must be >= 2")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not (self.loglik_tol > 0 and self.weight_floor > 0):
            raise ValueError("tolerances must be positive")


@dataclass
class NpmleFit:
    """NPMLE solution plus the diagnostics needed to audit it.

    ``gradient[j]`` is ``(1/n) sum_i pmf(y_i; gamma x_j) / mix(y_i)`` at the
    returned weights; at the grid optimum it is <= 1 everywhere and equal
    to 1 on the support.  ``loglik_history`` covers the EM and Newton
    iterations; ``loglik`` is evaluated after the weight-floor pruning.
    """

    prior: Prior
    grid: np.ndarray
    weights: np.ndarray
    gradient: np.ndarray
    loglik_history: list[float]
    loglik: float
    em_iters: int
    polish_iters: int
    converged: bool

    def optimality_gap(self) -> float:
        """``max_j gradient_j - 1``; upper-bounds the per-sample log-likelihood gap."""
        return float(self.gradient.max() - 1.0)


class _Problem:
    """Sufficient statistics of the sample against a fixed grid of atoms."""

    def __init__(self, samples, grid: np.ndarray, gamma: float):
        samples = np.asarray(samples)
        if samples.size == 0:
            raise ValueError("samples must be nonempty")
        if np.any(samples < 0) or not np.all(np.equal(np.mod(samples, 1), 0)):
            raise ValueError("samples must be nonnegative integers")
        values, counts = np.unique(samples.astype(np.int64), return_counts=True)
        logA = poisson_component_logpmf(values, gamma * grid).T
        row_max = logA.max(axis=1)
        if not np.all(np.isfinite(row_max)):
            bad = values[~np.isfinite(row_max)]
            raise LikelihoodDegenerate(f"likelihood degenerate: values {bad.tolist()} impossible on grid")
        # rescaling rows leaves EM and the gradient unchanged
        self.A = np.exp(logA - row_max[:, None])
        self.c = counts / counts.sum()
        self.offset = float(self.c @ row_max)

    def loglik(self, w: np.ndarray) -> float:
        return float(self.c @ np.log(self.A @ w)) + self.offset

    def gradient(self, w: np.ndarray) -> np.ndarray:
        return (self.c / (self.A @ w)) @ self.A


def _newton_step(prob: _Problem, w: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """Maximizer of the local quadratic model of the log-likelihood on the simplex.

    With ``f0 = A w`` the model is ``-1/2 sum_k c_k (f_k / f0_k - 2)^2``,
    a nonnegative least-squares problem over the current support plus the
    local maxima of the gradient that exceed 1.
    """
    peak = np.r_[True, grad[1:] >= grad[:-1]] & np.r_[grad[:-1] >= grad[1:], True] & (grad > 1.0)
    idx = np.nonzero((w > 0) | peak)[0]
    f0 = prob.A @ w
    sc = np.sqrt(prob.c)
    M = np.vstack([(sc / f0)[:, None] * prob.A[:, idx], np.full(idx.size, _SUM_PENALTY)])
    b = np.r_[2.0 * sc, _SUM_PENALTY]
    # a moderate penalty leaves sum(x) slightly off 1; shifting its target
    # by the residual and re-solving drives the error to round-off.
    # bvls is used because scipy's nnls loses accuracy on this row scaling.
    for _ in range(_SUM_REFINE):
        x = lsq_linear(M, b, bounds=(0.0, np.inf), method="bvls", tol=1e-15).x
        miss = 1.0 - x.sum()
        if abs(miss) <= 1e-15:
            break
        b[-1] += _SUM_PENALTY * miss
    out = np.zeros_like(w)
    out[idx] = x / x.sum()
    return out


def _kkt_violation(w: np.ndarray, grad: np.ndarray) -> float:
    """Largest breach of ``grad <= 1`` everywhere and ``grad == 1`` on the support."""
    return max(float(grad.max()) - 1.0, float(np.abs(grad[w > 0] - 1.0).max()))


def npmle_solve(samples, params: ChannelParams, cfg: NpmleConfig | None = None) -> NpmleFit:
    """Maximize ``(1/n) sum_i log sum_j w_j Poi(y_i; gamma x_j)`` over grid weights.

    Multiplicative EM updates ``w_j <- w_j * gradient_j`` run from uniform
    weights until the per-sample gain drops below ``loglik_tol`` (or
    ``max_iters``).  EM alone converges sublinearly on this ill-conditioned
    problem, so unless ``cfg.polish`` is off, constrained Newton steps with
    backtracking then continue until the gradient is within ``loglik_tol``
    of 1 on the support and below ``1 + loglik_tol`` elsewhere.
    Both phases never decrease the log-likelihood.
    """
    cfg = cfg or NpmleConfig()
    grid = np.linspace(0.0, params.a, cfg.grid_size)
    prob = _Problem(samples, grid, params.gamma)
    w = np.full(cfg.grid_size, 1.0 / cfg.grid_size)
    ll = prob.loglik(w)
    history = [ll]

    em_iters = 0
    for em_iters in range(1, cfg.max_iters + 1):
        w_new = w * prob.gradient(w)
        w_new /= w_new.sum()
        ll_new = prob.loglik(w_new)
        gain = ll_new - ll
        if gain < 0:
            # EM cannot descend; a negative gain is round-off at the optimum
            break
        w, ll = w_new, ll_new
        history.append(ll)
        if gain < cfg.loglik_tol:
            break

    grad = prob.gradient(w)
    polish_iters = 0
    if cfg.polish:
        while _kkt_violation(w, grad) > cfg.loglik_tol and polish_iters < cfg.max_iters:
            target = _newton_step(prob, w, grad)
            d = target - w
            slope = float(grad @ d)
            # gains near the optimum are below the resolution of loglik itself
            ratio = (prob.A @ d) / (prob.A @ w)
            alpha = 1.0
            for _ in range(60):
                gain = float(prob.c @ np.log1p(alpha * ratio))
                if gain >= alpha * slope / 3.0:
                    break
                alpha *= 0.5
            else:
                break
            polish_iters += 1
            w, ll = w + alpha * d, ll + gain
            w[w < 0] = 0.0
            history.append(ll)
            grad = prob.gradient(w)

    w = np.where(w < cfg.weight_floor, 0.0, w)
    w /= w.sum()
    grad = prob.gradient(w)
    keep = w > 0
    prior = Prior(grid[keep], w[keep] / w[keep].sum(), params.a)
    converged = bool(_kkt_violation(w, grad) <= 10.0 * cfg.loglik_tol)
    return NpmleFit(prior, grid, w, grad, history, prob.loglik(w), em_iters, polish_iters, converged)


def npmle_fit(samples, params: ChannelParams, cfg: NpmleConfig | None = None) -> Prior:
    """Grid NPMLE of the mixing distribution from Poisson-mixture samples."""
    return npmle_solve(samples, params, cfg).prior


# ----------------------------------------------------------------------
# Rate study
# ----------------------------------------------------------------------


class Metric(str, enum.Enum):
    HELLINGER_SQ = "hellinger_sq"
    TV_POISSON = "tv_poisson"
    TV_GAUSSIAN = "tv_gaussian"
    W1_SMOOTHED = "w1_smoothed"


@dataclass
class RateStudyRecord:
    n: int
    trial: int
    seed: int
    hellinger_sq: float
    tv_poisson: float
    tv_gaussian: float
    w1_smoothed: float
    runtime_ms: float
    sigma: float = field(default=math.nan, compare=False, repr=False)
    fit: NpmleFit | None = field(default=None, compare=False, repr=False)

    def metric(self, metric) -> float:
        return float(getattr(self, Metric(metric).value))


SigmaSchedule = Callable[[int], float] | Mapping[int, float]


def polylog_sigma_schedule(v: float, scale: float = 1.0) -> Callable[[int], float]:
    """``sigma(n) = scale * log(1/eps_n)^(-v/2)``, ``eps_n = sqrt(log n / (n log log n))``.

    Shrinks the smoothing level polylogarithmically in ``n`` for ``0 < v < 1``.
    """
    if not 0 < v < 1:
        raise ValueError("v must lie in (0, 1)")

    def sigma(n: int) -> float:
        ln = math.log(n)
        eps = math.sqrt(ln / (n * math.log(ln)))
        return scale * math.log(1.0 / eps) ** (-v / 2.0)

    return sigma


def _sigma_for(n: int, params: ChannelParams, schedule: SigmaSchedule | None) -> float:
    if schedule is None:
        return params.sigma
    if callable(schedule):
        return float(schedule(n))
    return float(schedule[n])


def _run_trial(true_prior, params, n, trial, seed, schedule, cfg, keep_fit, timing) -> RateStudyRecord:
    start = time.perf_counter()
    stream = derive_seed(seed, n, trial)
    samples = sample_poisson_mixture(true_prior, params, n, stream)
    fit = npmle_solve(samples, params, cfg)
    est = fit.prior
    sigma = _sigma_for(n, params, schedule)
    gparams = params.replace(sigma=sigma)
    rec = RateStudyRecord(
        n=n,
        trial=trial,
        seed=stream,
        hellinger_sq=hellinger_sq_poisson(true_prior, est, params).value,
        tv_poisson=tv_poisson(true_prior, est, params).value,
        tv_gaussian=tv_gaussian(true_prior, est, gparams).value,
        w1_smoothed=w1_smoothed(true_prior, est, sigma, params.tol).value,
        runtime_ms=(time.perf_counter() - start) * 1e3 if timing else 0.0,
        sigma=sigma,
        fit=fit if keep_fit else None,
    )
    log.debug("n=%d trial=%d H2=%.3e W1s=%.3e", n, trial, rec.hellinger_sq, rec.w1_smoothed)
    return rec


def rate_study(
    true_prior: Prior,
    params: ChannelParams,
    n_grid: Iterable[int],
    trials: int,
    seed: int,
    sigma_schedule: SigmaSchedule | None = None,
    cfg: NpmleConfig | None = None,
    threads: int = 1,
    keep_fits: bool = False,
    timing: bool = True,
) -> list[RateStudyRecord]:
    """Fit the NPMLE on fresh samples for every ``(n, trial)`` and score it.

    Each trial draws from its own stream ``derive_seed(seed, n, trial)``,
    so output does not depend on ``threads``.  With ``timing=False`` the
    ``runtime_ms`` column is zero and records are fully reproducible.
    """
    n_grid = [int(n) for n in n_grid]
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError("n_grid must be strictly increasing")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    cfg = cfg or NpmleConfig()
    tasks = [(n, t) for n in n_grid for t in range(trials)]

    def run(task):
        n, t = task
        return _run_trial(true_prior, params, n, t, seed, sigma_schedule, cfg, keep_fits, timing)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(run, tasks))
    else:
        records = [run(task) for task in tasks]
    records.sort(key=lambda r: (r.n, r.trial))
    return records


def fit_rate_slope(records: Iterable[RateStudyRecord], metric) -> tuple[float, float]:
    """OLS slope (and its standard error) of log mean metric against log n."""
    metric = Metric(metric)
    by_n: dict[int, list[float]] = {}
    for rec in records:
        by_n.setdefault(rec.n, []).append(rec.metric(metric))
    if len(by_n) < 3:
        raise InsufficientGrid(f"insufficient grid: need >= 3 distinct n, got {len(by_n)}")
    ns = np.array(sorted(by_n), dtype=np.float64)
    means = np.array([np.mean(by_n[int(n)]) for n in ns])
    if np.any(means <= 0):
        raise ValueError(f"{metric.value} has nonpositive mean; cannot fit a log-log slope")
    fit = linregress(np.log(ns), np.log(means))
    return float(fit.slope), float(fit.stderr)


def summarize(records: Iterable[RateStudyRecord], metric) -> list[tuple[int, float, float]]:
    """``(n, mean, standard error)`` of a metric for each sample size."""
    metric = Metric(metric)
    by_n: dict[int, list[float]] = {}
    for rec in records:
        by_n.setdefault(rec.n, []).append(rec.metric(metric))
    out = []
    for n in sorted(by_n):
        vals = np.asarray(by_n[n])
        se = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
        out.append((n, float(vals.mean()), se))
    return out
