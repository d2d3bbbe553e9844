"""Experiment configuration: INI-style sections of flat ``key = value`` pairs.

Example::

    [channel]
    a = 1
    sigma = 1
    gamma = 1

    [divergence]
    prior1 = dirac(1)
    prior2 = dirac(1.1)
    metrics = tv_poisson, tv_gaussian

Unknown sections and keys are rejected, and every error names the file,
line, section and key involved.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field

from .estimation import Metric, NpmleConfig
from .exceptions import ConfigError
from .measures import ChannelParams, Prior, parse_prior

CHANNEL_KEYS = {"a", "sigma", "gamma", "tol"}
NPMLE_KEYS = {"grid_size", "max_iters", "loglik_tol", "weight_floor", "polish"}
DIVERGENCE_METRICS = (
    "tv_poisson", "hellinger_sq", "tv_gaussian", "l2_gaussian", "l2_gaussian_plancherel", "w1", "w1_smoothed",
)

SECTION_KEYS = {
    "channel": CHANNEL_KEYS,
    "divergence": {"prior1", "prior2", "metrics"},
    "bounds": {"epsilons", "ells", "r"},
    "verify": {"pairs", "max_atoms", "log10_scale", "seed"},
    "npmle": {"prior", "n", "samples", "seed"} | NPMLE_KEYS,
    "rate-study": {"prior", "n_grid", "trials", "seed", "sigma_schedule", "metric"} | NPMLE_KEYS,
}
REQUIRED = {
    "divergence": ("prior1", "prior2"),
    "bounds": (),
    "verify": (),
    "npmle": (),
    "rate-study": ("prior", "n_grid", "trials"),
}


@dataclass
class ExperimentConfig:
    """A parsed config file; values keep their source lines for diagnostics."""

    path: str
    sections: dict[str, dict[str, str]]
    lines: dict[tuple[str, str], int] = field(default_factory=dict)

    def where(self, section: str, key: str | None = None) -> str:
        if key is None:
            return f"{self.path}: [{section}]"
        line = self.lines.get((section, key))
        loc = f"{self.path}:{line}" if line is not None else self.path
        return f"{loc}: [{section}] {key}"

    def error(self, section: str, key: str | None, message: str) -> ConfigError:
        return ConfigError(f"{self.where(section, key)}: {message}")

    def get(self, section: str, key: str, default: str | None = None) -> str | None:
        return self.sections.get(section, {}).get(key, default)

    def require(self, section: str, key: str) -> str:
        value = self.get(section, key)
        if value is None:
            raise ConfigError(f"{self.where(section)}: missing required key '{key}'")
        return value

    def convert(self, section: str, key: str, parser, default=None):
        """Parse one value with ``parser``; failures become located errors."""
        raw = self.get(section, key)
        if raw is None:
            return default
        try:
            return parser(raw)
        except (ValueError, TypeError) as exc:
            raise self.error(section, key, f"invalid value {raw!r}: {exc}") from None


_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]")


def _line_index(text: str) -> dict[tuple[str, str], int]:
    index: dict[tuple[str, str], int] = {}
    section = None
    for num, line in enumerate(text.splitlines(), start=1):
        if m := _SECTION_RE.match(line):
            section = m.group(1).strip()
        elif section is not None and (m := _KEY_RE.match(line)) and not line[:1].isspace():
            index.setdefault((section, m.group(1).strip().lower()), num)
    return index


def parse_config(text: str, path: str = "<config>", command: str | None = None) -> ExperimentConfig:
    """Parse and validate config text; ``command`` also checks required keys."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    cfg = ExperimentConfig(path, {s: dict(parser[s]) for s in parser.sections()}, _line_index(text))
    for section, values in cfg.sections.items():
        if section not in SECTION_KEYS:
            raise ConfigError(f"{cfg.where(section)}: unknown section")
        for key in values:
            if key not in SECTION_KEYS[section]:
                raise cfg.error(section, key, "unknown key")
    if command is not None:
        for key in REQUIRED[command]:
            cfg.require(command, key)
    return cfg


def load_config(path: str, command: str | None = None) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    return parse_config(text, path, command)


# ----------------------------------------------------------------------
# Value grammars
# ----------------------------------------------------------------------

_PRESET_RE = re.compile(r"^\s*(\w+)\s*\(([^)]*)\)\s*$")


def parse_real(text: str) -> float:
    """A float or ``exp(x)``, e.g. ``exp(-10)``."""
    text = text.strip()
    if m := re.fullmatch(r"exp\((.*)\)", text):
        return math.exp(float(m.group(1)))
    return float(text)


def parse_real_list(text: str) -> list[float]:
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise ValueError("empty list")
    return [parse_real(t) for t in items]


def parse_int_list(text: str) -> list[int]:
    out = []
    for tok in (t.strip() for t in text.split(",") if t.strip()):
        value = float(tok)
        if value != int(value):
            raise ValueError(f"{tok} is not an integer")
        out.append(int(value))
    if not out:
        raise ValueError("empty list")
    return out


def parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def parse_call(text: str) -> tuple[str, list[float]] | None:
    """Split ``name(x, y, ...)`` into the name and real arguments, else ``None``."""
    m = _PRESET_RE.match(text)
    if m is None:
        return None
    return m.group(1), [float(t) for t in m.group(2).split(",") if t.strip()]


def parse_prior_spec(text: str, a: float) -> Prior:
    """``dirac(x)``, ``two_point(x, y, w)``, ``uniform_grid(m)`` or a prior record."""
    call = parse_call(text)
    if call is None:
        return parse_prior(text, a)
    name, args = call
    presets = {"dirac": (1, Prior.dirac), "two_point": (3, Prior.two_point), "uniform_grid": (1, None)}
    if name not in presets:
        raise ValueError(f"unknown preset {name!r}; expected one of {sorted(presets)}")
    arity, ctor = presets[name]
    if len(args) != arity:
        raise ValueError(f"{name} takes {arity} argument(s), got {len(args)}")
    if name == "uniform_grid":
        if args[0] != int(args[0]):
            raise ValueError("uniform_grid needs an integer atom count")
        return Prior.uniform_grid(int(args[0]), a)
    return ctor(*args, a)


def channel_params(cfg: ExperimentConfig) -> ChannelParams:
    kw = {k: cfg.convert("channel", k, parse_real) for k in CHANNEL_KEYS if cfg.get("channel", k) is not None}
    try:
        return ChannelParams(**kw)
    except ValueError as exc:
        raise ConfigError(f"{cfg.where('channel')}: {exc}") from None


def npmle_config(cfg: ExperimentConfig, section: str) -> NpmleConfig:
    kw = {}
    for key, parser in (
        ("grid_size", int),
        ("max_iters", int),
        ("loglik_tol", parse_real),
        ("weight_floor", parse_real),
        ("polish", parse_bool),
    ):
        value = cfg.convert(section, key, parser)
        if value is not None:
            kw[key] = value
    try:
        return NpmleConfig(**kw)
    except ValueError as exc:
        raise ConfigError(f"{cfg.where(section)}: {exc}") from None


def prior(cfg: ExperimentConfig, section: str, key: str, a: float) -> Prior:
    cfg.require(section, key)
    return cfg.convert(section, key, lambda t: parse_prior_spec(t, a))


def divergence_metrics(cfg: ExperimentConfig) -> list[str]:
    raw = cfg.get("divergence", "metrics")
    if raw is None:
        return list(DIVERGENCE_METRICS)
    names = [t.strip() for t in raw.split(",") if t.strip()]
    for name in names:
        if name not in DIVERGENCE_METRICS:
            raise cfg.error("divergence", "metrics", f"unknown metric {name!r}; expected {list(DIVERGENCE_METRICS)}")
    return names


def rate_metric(cfg: ExperimentConfig) -> Metric:
    return cfg.convert("rate-study", "metric", Metric, Metric.W1_SMOOTHED)
