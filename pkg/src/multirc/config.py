"""Experiment configuration files.

A configuration is a flat, sectioned key-value file (INI syntax, one
section level).  Every omitted network or training key falls back to the
reference defaults; unknown keys and out-of-range values are rejected with
the offending section and key named.

Grid-valued keys (``rho``, ``x_cen``) accept a single number, a
comma-separated list, or an inclusive ``lo:hi:step`` range.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

import numpy as np

from . import defaults
from .errors import ConfigError

KINDS = (
    "sweep", "basin", "track", "floquet",
    "lyapunov", "symmetry", "itinerancy", "neuron",
)

# Recognised keys per section; anything else is a config error.
_NET_KEYS = {"n", "p", "seed"}
_PARAM_KEYS = {"sigma", "gamma", "tau", "beta", "t_listen", "t_train"}
_TASK_KEYS = {"b", "x_cen", "mode"}
_EXPERIMENT_KEYS = {
    "kind", "rho", "t_predict", "window", "with_lyapunov",
    # basin
    "grid_min", "grid_max", "grid_points", "listen_time",
    # track
    "which", "settle",
    # lyapunov / itinerancy / neuron
    "transient", "renorm", "span", "indices",
}
_OUTPUT_KEYS = {"directory"}


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    p: float
    seed: int
    sigma: float
    gamma: float
    tau: float
    beta: float
    t_listen: float
    t_train: float
    b: float
    x_cen_grid: np.ndarray
    mode: str
    kind: str
    rho_grid: np.ndarray
    options: dict = field(default_factory=dict)
    out_dir: str = "out"

    @property
    def x_cen(self) -> float:
        return float(self.x_cen_grid[0])

    @property
    def rho(self) -> float:
        return float(self.rho_grid[0])


def parse_grid(text: str, section: str, key: str) -> np.ndarray:
    """A scalar, comma list, or inclusive lo:hi:step range, as an array."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [float(v) for v in text.split(":")]
            if len(parts) != 3:
                raise ValueError("a range needs exactly lo:hi:step")
            lo, hi, step = parts
            if step <= 0 or hi < lo:
                raise ValueError("need step > 0 and hi >= lo")
            count = int(round((hi - lo) / step))
            return lo + step * np.arange(count + 1)
        if "," in text:
            return np.array([float(v) for v in text.split(",")])
        return np.array([float(text)])
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {text!r}: {exc}") from None


def _get(parser, section, key, cast, default):
    if not parser.has_option(section, key):
        if default is None:
            raise ConfigError(f"[{section}] is missing the required key '{key}'")
        return default
    raw = parser.get(section, key)
    try:
        if cast is bool:
            if raw.lower() in ("true", "yes", "1"):
                return True
            if raw.lower() in ("false", "no", "0"):
                return False
            raise ValueError("expected a boolean")
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from None


def _check_keys(parser, section, allowed):
    if not parser.has_section(section):
        return
    for key in parser.options(section):
        if key not in allowed:
            raise ConfigError(
                f"[{section}] has an unknown key '{key}' "
                f"(allowed: {', '.join(sorted(allowed))})"
            )


def load_config(path) -> ExperimentConfig:
    """Parse and validate a configuration file, filling in the defaults."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh, source=str(path))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None

    for section in parser.sections():
        if section not in ("net", "params", "task", "experiment", "output"):
            raise ConfigError(f"unknown section [{section}]")
    _check_keys(parser, "net", _NET_KEYS)
    _check_keys(parser, "params", _PARAM_KEYS)
    _check_keys(parser, "task", _TASK_KEYS)
    _check_keys(parser, "experiment", _EXPERIMENT_KEYS)
    _check_keys(parser, "output", _OUTPUT_KEYS)
    if not parser.has_section("experiment"):
        raise ConfigError("the [experiment] section is required")

    n = _get(parser, "net", "n", int, defaults.N_NEURONS)
    p = _get(parser, "net", "p", float, defaults.CONNECTIVITY)
    seed = _get(parser, "net", "seed", int, defaults.DEFAULT_SEED)
    sigma = _get(parser, "params", "sigma", float, defaults.SIGMA)
    gamma = _get(parser, "params", "gamma", float, defaults.GAMMA)
    tau = _get(parser, "params", "tau", float, defaults.TAU)
    beta = _get(parser, "params", "beta", float, defaults.BETA)
    t_listen = _get(parser, "params", "t_listen", float, defaults.T_LISTEN)
    t_train = _get(parser, "params", "t_train", float, defaults.T_TRAIN)
    b = _get(parser, "task", "b", float, defaults.ORBIT_RADIUS)
    mode = _get(parser, "task", "mode", str, "opposite")
    x_cen_grid = (
        parse_grid(parser.get("task", "x_cen"), "task", "x_cen")
        if parser.has_option("task", "x_cen") else np.array([0.0])
    )
    kind = _get(parser, "experiment", "kind", str, None)
    rho_grid = (
        parse_grid(parser.get("experiment", "rho"), "experiment", "rho")
        if parser.has_option("experiment", "rho")
        else np.array([sum(defaults.RHO_RANGE) / 2])
    )
    out_dir = _get(parser, "output", "directory", str, "out")

    if kind not in KINDS:
        raise ConfigError(
            f"[experiment] kind = {kind!r} is not one of {', '.join(KINDS)}"
        )
    for name, value, low in (
        ("n", n, 2), ("gamma", gamma, np.nextafter(0, 1)),
        ("tau", tau, np.nextafter(0, 1)), ("b", b, np.nextafter(0, 1)),
    ):
        if value < low:
            raise ConfigError(f"{name} = {value} is out of range (must be >= {low})")
    if not 0 < p <= 1:
        raise ConfigError(f"[net] p = {p} must lie in (0, 1]")
    if sigma < 0 or beta < 0:
        raise ConfigError("sigma and beta must be nonnegative")
    if not 0 < t_listen < t_train:
        raise ConfigError(f"need 0 < t_listen < t_train, got {t_listen}, {t_train}")
    if mode not in ("opposite", "same"):
        raise ConfigError(f"[task] mode = {mode!r} must be 'opposite' or 'same'")
    if np.any(rho_grid < 0):
        raise ConfigError("[experiment] rho values must be nonnegative")

    options = {}
    if parser.has_section("experiment"):
        for key in parser.options("experiment"):
            if key not in ("kind", "rho"):
                options[key] = parser.get("experiment", key)
    return ExperimentConfig(
        n=n, p=p, seed=seed, sigma=sigma, gamma=gamma, tau=tau, beta=beta,
        t_listen=t_listen, t_train=t_train, b=b, x_cen_grid=x_cen_grid,
        mode=mode, kind=kind, rho_grid=rho_grid, options=options,
        out_dir=out_dir,
    )


def option(config: ExperimentConfig, key: str, cast, default):
    """A kind-specific option from the experiment section, with default."""
    if key not in config.options:
        return default
    raw = config.options[key]
    try:
        if cast is bool:
            return raw.lower() in ("true", "yes", "1")
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"[experiment] {key} = {raw!r}: {exc}") from None


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def echo_config(config: ExperimentConfig, path) -> None:
    """Write the fully resolved configuration (all defaults made explicit)."""
    parser = configparser.ConfigParser()
    parser["net"] = {"n": str(config.n), "p": _fmt(config.p), "seed": str(config.seed)}
    parser["params"] = {
        "sigma": _fmt(config.sigma), "gamma": _fmt(config.gamma),
        "tau": _fmt(config.tau), "beta": _fmt(config.beta),
        "t_listen": _fmt(config.t_listen), "t_train": _fmt(config.t_train),
    }
    parser["task"] = {
        "b": _fmt(config.b),
        "x_cen": ",".join(f"{v:.17g}" for v in config.x_cen_grid),
        "mode": config.mode,
    }
    experiment = {"kind": config.kind,
                  "rho": ",".join(f"{v:.17g}" for v in config.rho_grid)}
    experiment.update(config.options)
    parser["experiment"] = experiment
    parser["output"] = {"directory": config.out_dir}
    with open(path, "w") as fh:
        parser.write(fh)
