"""Experiment configuration: a TOML document (flat keys or one level of
[sections]) or the equivalent command-line flags."""
from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field, fields
from fractions import Fraction

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import gl2
from .errors import ParameterError
from .frac import WindowSpec, to_fraction

EXPERIMENTS = (
    "sieve", "ap", "classes", "joint", "jointzero", "extremal", "langtrotter", "satotate",
    "residues", "balog", "landau", "meanvalue", "envelope", "verify",
)


def available_threads() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


@dataclass
class ExperimentConfig:
    experiment: str = "joint"
    curve: str = "11a3"
    x: int = 1000
    lo: int | None = None
    p: int | None = None
    ell: list[int] = field(default_factory=lambda: [3])
    omega: float = 1.0
    alpha: Fraction = Fraction(2)
    theta: Fraction = Fraction(1, 2)
    lam: Fraction = Fraction(1, 2)
    delta1: Fraction = Fraction(0)
    delta2: Fraction = Fraction(1)
    t: int = 0
    sign: str | None = None
    tprime: float | None = None
    statement: str = "joint"
    delta: float = 1.0
    eps: float = 0.01
    n_L: int = 1
    log_d_L: float = 0.0
    C_over_G: float = 1.0
    bins: int = 40
    threads: int = field(default_factory=available_threads)
    cache: str | None = None
    out: str | None = None
    csv: str | None = None

    @property
    def window(self) -> WindowSpec:
        return WindowSpec(self.delta1, self.delta2)


# config key -> (attribute, kind)
_KEYS = {
    "experiment": ("experiment", "str"),
    "curve": ("curve", "curve"),
    "x": ("x", "int"),
    "lo": ("lo", "int"),
    "p": ("p", "int"),
    "ell": ("ell", "intlist"),
    "omega": ("omega", "real"),
    "alpha": ("alpha", "exact"),
    "theta": ("theta", "exact"),
    "lambda": ("lam", "exact"),
    "delta1": ("delta1", "exact"),
    "delta2": ("delta2", "exact"),
    "t": ("t", "int"),
    "sign": ("sign", "str"),
    "tprime": ("tprime", "real"),
    "statement": ("statement", "str"),
    "delta": ("delta", "real"),
    "eps": ("eps", "real"),
    "n_L": ("n_L", "int"),
    "log_d_L": ("log_d_L", "real"),
    "C_over_G": ("C_over_G", "real"),
    "bins": ("bins", "int"),
    "threads": ("threads", "int"),
    "cache": ("cache", "str"),
    "out": ("out", "str"),
    "csv": ("csv", "str"),
}


def _coerce(key: str, kind: str, v):
    bad = ParameterError(f"{key}: expected {kind}, got {type(v).__name__} {v!r}")
    if kind == "int":
        if isinstance(v, bool) or not isinstance(v, int):
            raise bad
        return v
    if kind == "real":
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise bad
        return float(v)
    if kind == "exact":
        # numbers or "p/q" strings, kept exact for the fractional-part decisions
        if isinstance(v, bool) or not isinstance(v, (int, float, str, Fraction)):
            raise bad
        try:
            return to_fraction(Fraction(v) if isinstance(v, str) else v)
        except (ValueError, ZeroDivisionError):
            raise bad from None
    if kind == "str":
        if not isinstance(v, str):
            raise bad
        return v
    if kind == "curve":
        if isinstance(v, list) and len(v) == 5 and all(isinstance(c, int) and not isinstance(c, bool) for c in v):
            return ",".join(map(str, v))
        if not isinstance(v, str):
            raise bad
        return v
    if kind == "intlist":
        if isinstance(v, int) and not isinstance(v, bool):
            return [v]
        if not isinstance(v, list) or not v or not all(isinstance(e, int) and not isinstance(e, bool) for e in v):
            raise bad
        return list(v)
    raise AssertionError(kind)


def _flatten(doc: dict) -> dict:
    flat = {}
    for k, v in doc.items():
        if isinstance(v, dict):
            for k2, v2 in v.items():
                if isinstance(v2, dict):
                    raise ParameterError(f"{k}.{k2}: nested sections are not supported")
                if k2 in flat:
                    raise ParameterError(f"{k2}: given more than once")
                flat[k2] = v2
        else:
            if k in flat:
                raise ParameterError(f"{k}: given more than once")
            flat[k] = v
    return flat


def build_config(values: dict) -> ExperimentConfig:
    """Validate a flat key -> value mapping and apply defaults."""
    cfg = ExperimentConfig()
    for key, v in values.items():
        if key not in _KEYS:
            raise ParameterError(f"unknown key {key!r}")
        attr, kind = _KEYS[key]
        setattr(cfg, attr, _coerce(key, kind, v))
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    if cfg.experiment not in EXPERIMENTS:
        raise ParameterError(f"experiment: unknown {cfg.experiment!r}; expected one of {', '.join(EXPERIMENTS)}")
    for ell in cfg.ell:
        try:
            gl2.check_odd_prime(ell)
        except ParameterError:
            raise ParameterError(f"ell: ℓ must be an odd prime, got {ell}") from None
    if not cfg.delta1 < cfg.delta2:
        raise ParameterError(f"delta1/delta2: empty window [{cfg.delta1}, {cfg.delta2})")
    cfg.window  # range check 0 <= delta1 < delta2 <= 1
    if cfg.x < 1:
        raise ParameterError(f"x: must be >= 1, got {cfg.x}")
    if cfg.omega < 1:
        raise ParameterError(f"omega: must be >= 1, got {cfg.omega}")
    if cfg.bins < 1:
        raise ParameterError(f"bins: must be >= 1, got {cfg.bins}")
    if cfg.threads < 1:
        raise ParameterError(f"threads: must be >= 1, got {cfg.threads}")
    if cfg.alpha <= 0:
        raise ParameterError(f"alpha: must be > 0, got {cfg.alpha}")
    if not 0 <= cfg.theta <= 1:
        raise ParameterError(f"theta: must lie in [0, 1], got {cfg.theta}")
    if cfg.lam < 0:
        raise ParameterError(f"lambda: must be >= 0, got {cfg.lam}")
    if cfg.sign is not None and cfg.sign not in ("Plus", "Minus"):
        raise ParameterError(f"sign: expected Plus or Minus, got {cfg.sign!r}")


def parse_config(text: str) -> ExperimentConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParameterError(f"malformed config: {exc}") from None
    return build_config(_flatten(doc))


def load_config(path) -> dict:
    """Flat key -> value mapping from a config file (validated later)."""
    with open(path, "rb") as fh:
        try:
            return _flatten(tomllib.load(fh))
        except tomllib.TOMLDecodeError as exc:
            raise ParameterError(f"malformed config {path}: {exc}") from None


CONFIG_KEYS = tuple(_KEYS)
assert {a for a, _ in _KEYS.values()} == {f.name for f in fields(ExperimentConfig)}
