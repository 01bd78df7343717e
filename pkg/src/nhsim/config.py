"""JSON run configurations.

All keys are optional; missing ones take the defaults in ``DEFAULTS``.
Unknown keys are rejected with a spelling suggestion.
"""
from __future__ import annotations

import difflib
import json
import math
from dataclasses import dataclass, fields
from pathlib import Path

FORM_ALIASES = {"nH": "nH_direct", "nH_direct": "nH_direct", "gH": "gH", "mgH": "mgH",
                "harmonic_2H": "harmonic_2H", "2H": "harmonic_2H", "logH": "logH"}
FAMILY_OF_FORM = {"nH_direct": "power", "gH": "power", "mgH": "power",
                  "harmonic_2H": "harmonic", "logH": "logarithmic"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    form: str = "nH_direct"
    gamma: float = 2.0
    lam: float = 0.5
    eta: float = 0.0
    zeta: float = 0.0
    use_w: bool | None = None
    center: float | list = 0.0
    wavenumber: float | list = 0.0
    width: float = 1.0
    amplitude: float = 1.0
    snapshot: str | None = None
    n: int = 2048
    L: float = 30.0
    dim: int = 1
    dt: float = 5e-4
    T: float = 1.0
    stride: int = 1
    snapshot_stride: int = 0
    out: str = "nhsim-out"
    preset: str | None = None
    seed: int = 0

    @property
    def family(self) -> str:
        return FAMILY_OF_FORM[self.form]

    def to_dict(self) -> dict:
        d = {}
        for f in fields(self):
            d[_JSON_NAME.get(f.name, f.name)] = getattr(self, f.name)
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


_JSON_NAME = {"lam": "lambda"}
_FIELD_OF = {_JSON_NAME.get(f.name, f.name): f.name for f in fields(RunConfig)}
KNOWN_KEYS = tuple(sorted(_FIELD_OF))
DEFAULTS = RunConfig().to_dict()


def _number(key, v, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"config.{key}: expected a number, got {v!r}")
    if integer:
        if isinstance(v, float) and not v.is_integer():
            raise ConfigError(f"config.{key}: expected an integer, got {v!r}")
        return int(v)
    if not math.isfinite(v):
        raise ConfigError(f"config.{key}: value {v!r} is not finite")
    return v


def _vector(key, v, dim):
    if isinstance(v, list):
        if len(v) != dim:
            raise ConfigError(f"config.{key}: expected {dim} components, got {len(v)}")
        return [_number(f"{key}[{i}]", x) for i, x in enumerate(v)]
    return _number(key, v)


def config_from_dict(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a JSON object")
    for key in raw:
        if key not in _FIELD_OF:
            hint = difflib.get_close_matches(key, KNOWN_KEYS, n=1)
            msg = f"config.{key}: unknown key"
            if hint:
                msg += f" (did you mean {hint[0]!r}?)"
            raise ConfigError(msg)
    merged = {**DEFAULTS, **raw}
    form = merged["form"]
    if form not in FORM_ALIASES:
        raise ConfigError(f"config.form: {form!r} is not one of {sorted(FORM_ALIASES)}")
    cfg = RunConfig(form=FORM_ALIASES[form])
    for k in ("gamma", "lambda", "eta", "zeta", "width", "amplitude", "L", "dt", "T"):
        setattr(cfg, _FIELD_OF[k], _number(k, merged[k]))
    for k in ("n", "dim", "stride", "snapshot_stride", "seed"):
        setattr(cfg, k, _number(k, merged[k], integer=True))
    if cfg.dim not in (1, 2):
        raise ConfigError(f"config.dim: {cfg.dim} outside the admissible set {{1, 2}}")
    cfg.center = _vector("center", merged["center"], cfg.dim)
    cfg.wavenumber = _vector("wavenumber", merged["wavenumber"], cfg.dim)
    if merged["use_w"] is not None and not isinstance(merged["use_w"], bool):
        raise ConfigError(f"config.use_w: expected true, false or null, got {merged['use_w']!r}")
    cfg.use_w = merged["use_w"]
    for k in ("snapshot", "preset"):
        v = merged[k]
        if v is not None and not isinstance(v, str):
            raise ConfigError(f"config.{k}: expected a string or null, got {v!r}")
        setattr(cfg, k, v)
    if not isinstance(merged["out"], str):
        raise ConfigError(f"config.out: expected a string, got {merged['out']!r}")
    cfg.out = merged["out"]
    _check_ranges(cfg)
    return cfg


def _check_ranges(cfg: RunConfig):
    if cfg.family == "power" and not 0.0 < cfg.gamma <= 2.0:
        raise ConfigError(f"config.gamma: {cfg.gamma} outside the admissible interval (0, 2]")
    if cfg.family in ("power", "logarithmic") and cfg.lam == 0.0:
        raise ConfigError("config.lambda: must be nonzero for interacting kernels")
    if cfg.n < 8 or cfg.n & (cfg.n - 1):
        raise ConfigError(f"config.n: {cfg.n} must be a power of two and at least 8")
    for k in ("L", "dt", "width"):
        if not getattr(cfg, k) > 0:
            raise ConfigError(f"config.{k}: {getattr(cfg, k)} must be positive")
    if cfg.T < 0:
        raise ConfigError(f"config.T: {cfg.T} must be nonnegative")
    if cfg.stride < 1:
        raise ConfigError(f"config.stride: {cfg.stride} must be at least 1")
    if cfg.snapshot_stride < 0:
        raise ConfigError(f"config.snapshot_stride: {cfg.snapshot_stride} must be nonnegative")
    if cfg.family == "logarithmic" and cfg.use_w:
        raise ConfigError("config.use_w: the logarithmic kernel has no linearisation vector")


def parse_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(raw)
