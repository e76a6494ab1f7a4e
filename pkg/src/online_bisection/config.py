"""Experiment configuration: a flat ``key = value`` file."""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

from .errors import ConfigError
from .noise import KINDS as NOISE_KINDS, NoiseModel
from .querygen import KINDS as QUERY_KINDS

W_STAR_MODES = ("random_uniform01", "explicit")
MAX_SEED = 2 ** 64 - 1


@dataclass(frozen=True)
class ExperimentConfig:
    D: int = 4
    d: int = 2
    T: int = 10_000
    seed: int = 0
    eval_M: int = 10_000
    w_star_mode: str = "random_uniform01"
    w_star_values: Optional[tuple[float, ...]] = None
    noise_kind: str = "uniform"
    noise_u: float = 1e-3
    noise_sigma: Optional[float] = None
    query_kind: str = "basis_mixture"
    mixture_weight: float = 0.5
    jitter_angle: Optional[float] = None   # None means phi(d)
    scale_lo: float = 0.5
    scale_hi: float = 1.0
    output_path: str = "run.csv"

    def __post_init__(self):
        validate(self)

    def with_(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)

    def noise_model(self) -> NoiseModel:
        return NoiseModel(self.noise_kind, self.noise_u, self.noise_sigma)


# file key -> (dataclass field, parser)
def _int(s):
    return int(s, 0)


def _opt_float(s):
    return None if s.lower() in ("", "none") else float(s)


def _jitter(s):
    return None if s.lower() in ("", "none", "phi") else float(s)


def _values(s):
    return tuple(float(v) for v in s.split(",") if v.strip())


KEYS = {
    "D": ("D", _int),
    "d": ("d", _int),
    "T": ("T", _int),
    "seed": ("seed", _int),
    "eval_M": ("eval_M", _int),
    "w_star_mode": ("w_star_mode", str),
    "w_star_values": ("w_star_values", _values),
    "noise.kind": ("noise_kind", str),
    "noise.u": ("noise_u", float),
    "noise.sigma": ("noise_sigma", _opt_float),
    "query.kind": ("query_kind", str),
    "query.mixture_weight": ("mixture_weight", float),
    "query.jitter_angle": ("jitter_angle", _jitter),
    "query.scale_lo": ("scale_lo", float),
    "query.scale_hi": ("scale_hi", float),
    "output_path": ("output_path", str),
}
_FIELD_TO_KEY = {f: k for k, (f, _) in KEYS.items()}


def _check(ok, key, msg):
    if not ok:
        raise ConfigError(msg, key=_FIELD_TO_KEY.get(key, key))


def validate(cfg: ExperimentConfig):
    for f in ("D", "d", "T", "seed", "eval_M"):
        _check(isinstance(getattr(cfg, f), int) and not isinstance(getattr(cfg, f), bool),
               f, "must be an integer")
    _check(cfg.D >= 1, "D", f"must be >= 1, got {cfg.D}")
    _check(1 <= cfg.d <= cfg.D, "d", f"must satisfy 1 <= d <= D, got d={cfg.d}, D={cfg.D}")
    _check(cfg.T >= 2, "T", f"must be >= 2, got {cfg.T}")
    _check(0 <= cfg.seed <= MAX_SEED, "seed", f"must be an unsigned 64-bit integer, got {cfg.seed}")
    _check(cfg.eval_M >= 1, "eval_M", f"must be >= 1, got {cfg.eval_M}")
    _check(cfg.w_star_mode in W_STAR_MODES, "w_star_mode",
           f"must be one of {W_STAR_MODES}, got {cfg.w_star_mode!r}")
    if cfg.w_star_mode == "explicit":
        vals = cfg.w_star_values
        _check(vals is not None and len(vals) == cfg.D, "w_star_values",
               f"explicit mode needs exactly D={cfg.D} values")
        _check(all(0.0 <= v <= 1.0 for v in vals), "w_star_values", "values must lie in [0, 1]")
    _check(cfg.noise_kind in NOISE_KINDS, "noise_kind",
           f"must be one of {NOISE_KINDS}, got {cfg.noise_kind!r}")
    _check(math.isfinite(cfg.noise_u) and cfg.noise_u > 0, "noise_u", f"must be positive, got {cfg.noise_u}")
    if cfg.noise_kind == "truncated_gaussian":
        _check(cfg.noise_sigma is not None and math.isfinite(cfg.noise_sigma) and cfg.noise_sigma > 0,
               "noise_sigma", "truncated_gaussian needs a positive sigma")
    _check(cfg.query_kind in QUERY_KINDS, "query_kind",
           f"must be one of {QUERY_KINDS}, got {cfg.query_kind!r}")
    _check(0.0 <= cfg.mixture_weight <= 1.0, "mixture_weight", "must lie in [0, 1]")
    if cfg.jitter_angle is not None:
        _check(math.isfinite(cfg.jitter_angle) and 0.0 <= cfg.jitter_angle < math.pi / 2,
               "jitter_angle", "must lie in [0, pi/2)")
    _check(0.0 < cfg.scale_lo <= cfg.scale_hi <= 1.0, "scale_lo",
           f"need 0 < scale_lo <= scale_hi <= 1, got {cfg.scale_lo}, {cfg.scale_hi}")


def parse_config(text: str, *, base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment. Missing keys keep defaults."""
    values = {}
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, _, val = (p.strip() for p in line.partition("="))
        if key not in KEYS:
            raise ConfigError("unknown key", line=lineno, key=key)
        if key in seen:
            raise ConfigError(f"duplicate key (first set on line {seen[key]})", line=lineno, key=key)
        seen[key] = lineno
        field, parse = KEYS[key]
        try:
            values[field] = parse(val)
        except ValueError:
            raise ConfigError(f"cannot parse value {val!r}", line=lineno, key=key) from None
    if "w_star_values" in values and "w_star_mode" not in values:
        values["w_star_mode"] = "explicit"
    base = base or ExperimentConfig()
    known = {f.name for f in fields(ExperimentConfig)}
    assert set(values) <= known
    return replace(base, **values)


def load_config(path) -> ExperimentConfig:
    text = Path(path).read_text()
    return parse_config(text)


def dump_config(cfg: ExperimentConfig) -> str:
    lines = []
    for key, (field, _) in KEYS.items():
        v = getattr(cfg, field)
        if v is None:
            continue
        if isinstance(v, tuple):
            v = ",".join(repr(x) for x in v)
        lines.append(f"{key} = {v}")
    return "\n".join(lines) + "\n"
