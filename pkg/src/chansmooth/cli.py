"""Command-line front end: ``chansmooth <command> --config FILE --out DIR``.

Every command validates its whole configuration before computing, and
writes outputs via temporary files renamed into place, so a failed run
leaves no partial files behind.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import tempfile
from dataclasses import dataclass

from . import config as C
from .bounds import BoundReport, e_max_forms, theorem1_bound, theorem2_bound
from .divergences import hellinger_sq_poisson, l2_gaussian, tv_gaussian, tv_poisson, w1, w1_smoothed
from .estimation import fit_rate_slope, npmle_solve, polylog_sigma_schedule, rate_study, summarize
from .exceptions import ChanSmoothError, ConfigError, InadmissibleEpsilon
from .experiments import dominance_sweep, family_constants
from .measures import derive_seed, sample_poisson_mixture
from .tables import bounds_to_csv, dominance_to_csv, rate_plot_svg, rate_to_csv, write_csv

log = logging.getLogger("chansmooth")

COMMANDS = ("divergence", "bounds", "verify", "npmle", "rate-study")
DEFAULT_EPSILONS = "exp(-10), exp(-20), exp(-40)"
EXIT_CONFIG = 2
EXIT_RUNTIME = 1


@dataclass
class Outputs:
    """Files to write (name -> text) plus lines for stdout."""

    files: dict[str, str]
    summary: list[str]


# ----------------------------------------------------------------------
# Commands.  Each returns a zero-argument runner after validating config.
# ----------------------------------------------------------------------


def _seed(cfg: C.ExperimentConfig, section: str, override: int | None) -> int:
    seed = override if override is not None else cfg.convert(section, "seed", int, 0)
    if not 0 <= seed < 2**64:
        raise ConfigError(f"{cfg.where(section, 'seed')}: seed must be a u64, got {seed}")
    return seed


def prepare_divergence(cfg, args):
    params = C.channel_params(cfg)
    p1 = C.prior(cfg, "divergence", "prior1", params.a)
    p2 = C.prior(cfg, "divergence", "prior2", params.a)
    metrics = C.divergence_metrics(cfg)
    funcs = {
        "tv_poisson": lambda: tv_poisson(p1, p2, params),
        "hellinger_sq": lambda: hellinger_sq_poisson(p1, p2, params),
        "tv_gaussian": lambda: tv_gaussian(p1, p2, params),
        "l2_gaussian": lambda: l2_gaussian(p1, p2, params, "direct"),
        "l2_gaussian_plancherel": lambda: l2_gaussian(p1, p2, params, "plancherel"),
        "w1": lambda: w1(p1, p2),
        "w1_smoothed": lambda: w1_smoothed(p1, p2, params.sigma, params.tol),
    }

    def run():
        rows = []
        for name in metrics:
            res = funcs[name]()
            rows.append((name, res.value, res.error_bound, res.method.value))
        return Outputs({"divergence.csv": write_csv(("metric", "value", "error_bound", "method"), rows)}, [])

    return run


def _bound_pair(ell: float, params, r: float) -> tuple[BoundReport, float]:
    try:
        report = theorem1_bound(None, params, ell=ell)
    except InadmissibleEpsilon as exc:
        log.warning("ell=%.6g flagged: %s", ell, exc)
        return BoundReport.failed(ell, params, str(exc)), theorem2_bound(None, params, r, ell=ell)
    first, second = e_max_forms(report.r_epsilon, ell, params)
    if abs(first - second) > 1e-9 * max(abs(first), abs(second), 1.0):
        report.status = "e_max forms disagree"
    return report, theorem2_bound(None, params, r, ell=ell)


def prepare_bounds(cfg, args):
    params = C.channel_params(cfg)
    if cfg.get("bounds", "epsilons") is not None and cfg.get("bounds", "ells") is not None:
        raise ConfigError(f"{cfg.where('bounds')}: give either 'epsilons' or 'ells', not both")
    if cfg.get("bounds", "ells") is not None:
        ells = cfg.convert("bounds", "ells", C.parse_real_list)
    else:
        eps = cfg.convert("bounds", "epsilons", C.parse_real_list, C.parse_real_list(DEFAULT_EPSILONS))
        bad = [e for e in eps if not 0 < e < 1]
        if bad:
            raise cfg.error("bounds", "epsilons", f"epsilons must lie in (0, 1), got {bad}")
        ells = [-math.log(e) for e in eps]
    if any(not ell > 0 for ell in ells):
        raise cfg.error("bounds", "ells", "ells must be positive")
    r = cfg.convert("bounds", "r", C.parse_real, 2.0)
    if not r > 1:
        raise cfg.error("bounds", "r", "disc radius must exceed 1")

    def run():
        pairs = [_bound_pair(ell, params, r) for ell in ells]
        return Outputs({"bounds.csv": bounds_to_csv(pairs)}, [])

    return run


def prepare_verify(cfg, args):
    params = C.channel_params(cfg)
    pairs = cfg.convert("verify", "pairs", int, 200)
    max_atoms = cfg.convert("verify", "max_atoms", int, 4)
    scale = cfg.convert("verify", "log10_scale", C.parse_real_list, [-1.0, -1.0])
    if pairs < 1:
        raise cfg.error("verify", "pairs", "need at least one pair")
    if max_atoms < 1:
        raise cfg.error("verify", "max_atoms", "need at least one atom")
    if len(scale) != 2 or scale[0] > scale[1]:
        raise cfg.error("verify", "log10_scale", "expected 'lo, hi' with lo <= hi")
    seed = _seed(cfg, "verify", args.seed)

    def run():
        rows = dominance_sweep(params, pairs, seed, max_atoms, (scale[0], scale[1]))
        k1, k2 = family_constants(rows)
        summary = [f"pairs={pairs} seed={seed}", f"K1={k1:.17g}", f"K2={k2:.17g}"]
        return Outputs({"verify.csv": dominance_to_csv(rows)}, summary)

    return run


def _read_samples(path: str) -> list[int]:
    try:
        with open(path, encoding="utf-8") as fh:
            tokens = fh.read().replace(",", " ").split()
    except OSError as exc:
        raise ValueError(f"cannot read samples: {exc.strerror}") from None
    samples = [int(t) for t in tokens]
    if any(s < 0 for s in samples):
        raise ValueError("samples must be nonnegative integers")
    return samples


def prepare_npmle(cfg, args):
    params = C.channel_params(cfg)
    ncfg = C.npmle_config(cfg, "npmle")
    has_prior, has_samples = cfg.get("npmle", "prior") is not None, cfg.get("npmle", "samples") is not None
    if has_prior == has_samples:
        raise ConfigError(f"{cfg.where('npmle')}: give exactly one of 'prior' (with 'n') or 'samples'")
    if has_samples:
        samples = cfg.convert("npmle", "samples", _read_samples)
    else:
        truth = C.prior(cfg, "npmle", "prior", params.a)
        n = cfg.convert("npmle", "n", int, 1000)
        if n < 1:
            raise cfg.error("npmle", "n", "need at least one sample")
        samples = sample_poisson_mixture(truth, params, n, derive_seed(_seed(cfg, "npmle", args.seed), n))

    def run():
        fit = npmle_solve(samples, params, ncfg)
        rows = [(x, w, fit.gradient[int(j)]) for j, (x, w) in _support(fit)]
        summary = [
            f"loglik={fit.loglik:.17g}",
            f"optimality_gap={fit.optimality_gap():.17g}",
            f"em_iters={fit.em_iters} polish_iters={fit.polish_iters} converged={fit.converged}",
        ]
        return Outputs({"npmle.csv": write_csv(("atom", "weight", "gradient"), rows)}, summary)

    return run


def _support(fit):
    for j, (x, w) in enumerate(zip(fit.grid, fit.weights)):
        if w > 0:
            yield j, (float(x), float(w))


def _sigma_schedule(text: str):
    text = text.strip()
    if text == "fixed":
        return None
    call = C.parse_call(text)
    if call is None or call[0] != "polylog":
        raise ValueError("expected 'fixed', 'polylog(v)' or 'polylog(v, scale)'")
    args = call[1]
    if len(args) not in (1, 2):
        raise ValueError("polylog takes v and an optional scale")
    return polylog_sigma_schedule(*args)


def prepare_rate_study(cfg, args):
    params = C.channel_params(cfg)
    truth = C.prior(cfg, "rate-study", "prior", params.a)
    n_grid = cfg.convert("rate-study", "n_grid", C.parse_int_list)
    if any(n < 1 for n in n_grid) or any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise cfg.error("rate-study", "n_grid", "must be positive and strictly increasing")
    trials = cfg.convert("rate-study", "trials", int)
    if trials < 1:
        raise cfg.error("rate-study", "trials", "need at least one trial")
    schedule = cfg.convert("rate-study", "sigma_schedule", _sigma_schedule)
    metric = C.rate_metric(cfg)
    ncfg = C.npmle_config(cfg, "rate-study")
    seed = _seed(cfg, "rate-study", args.seed)
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")

    def run():
        records = rate_study(
            truth, params, n_grid, trials, seed, schedule, ncfg, threads=args.threads, timing=args.timing
        )
        files = {"rate-study.csv": rate_to_csv(records)}
        summary = []
        if len(n_grid) >= 3:
            slope, se = fit_rate_slope(records, metric)
            summary.append(f"{metric.value} slope={slope:.6f} se={se:.6f}")
        else:
            slope = se = math.nan
            summary.append(f"{metric.value} slope undefined: need >= 3 distinct n")
        files["rate-study.svg"] = rate_plot_svg(summarize(records, metric), slope, se, metric.value)
        return Outputs(files, summary)

    return run


PREPARE = {
    "divergence": prepare_divergence,
    "bounds": prepare_bounds,
    "verify": prepare_verify,
    "npmle": prepare_npmle,
    "rate-study": prepare_rate_study,
}


# ----------------------------------------------------------------------
# Driver
# ----------------------------------------------------------------------


def write_outputs(out_dir: str, files: dict[str, str]) -> None:
    """Write all files to temporaries first, then rename them into place."""
    os.makedirs(out_dir, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=out_dir)
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            staged.append((tmp, os.path.join(out_dir, name)))
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, final in staged:
        os.replace(tmp, final)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chansmooth", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--out", default=".", help="output directory (default: current)")
        p.add_argument("--seed", type=int, default=None, help="u64 seed; overrides the config")
        p.add_argument("--threads", type=int, default=1, help="worker threads for rate studies")
        p.add_argument("--timing", action="store_true", help="record wall-clock runtime_ms (breaks byte-identity)")
    return parser


def _configure_logging() -> None:
    level_name = os.environ.get("CSL_LOG", "WARNING").upper()
    level = logging.getLevelName(level_name)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = C.load_config(args.config, args.command)
        run = PREPARE[args.command](cfg, args)
    except ConfigError as exc:
        print(f"chansmooth: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        outputs = run()
    except (ChanSmoothError, ValueError, OSError) as exc:
        print(f"chansmooth: {args.command} failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    write_outputs(args.out, outputs.files)
    for line in outputs.summary:
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
