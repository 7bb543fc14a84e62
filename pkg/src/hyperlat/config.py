"""Run configuration: a single JSON document, schema-validated with unknown
keys rejected, all defaults embedded and echoed into output manifests."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .numberfield import FieldDesc, NumberFieldError
from .quaternion import AlgebraDesc


class ConfigError(ValueError):
    """Invalid run configuration."""


@dataclass(frozen=True)
class FieldCfg:
    D: int = 17


@dataclass(frozen=True)
class AlgebraCfg:
    u: int = 3
    v: int = 5
    places: tuple[float, ...] = (0.5, 0.5)


@dataclass(frozen=True)
class CongruenceCfg:
    q: int | None = None


@dataclass(frozen=True)
class EnumerationCfg:
    R1: float = 3.5
    R2: float = 9.2
    node_budget: int = 100_000_000


@dataclass(frozen=True)
class DiophantineCfg:
    eps_list: tuple[float, ...] = (0.5, 0.25, 0.125, 0.0625, 0.03125)
    window: tuple[float, float, float, float] = (-1.0, 1.0, 0.5, 2.0)
    seed: int = 17
    pairs: int = 6


@dataclass(frozen=True)
class SpectralCfg:
    delta_prime: float = 0.1
    grid: int = 64


@dataclass(frozen=True)
class TraceCfg:
    N: int = 4
    ell: int = 2
    k: int = 1
    dims: tuple[int, ...] = (2, 2)
    seed: int = 11
    R_list: tuple[float, ...] = (4.0, 6.0, 8.0, 10.0)


@dataclass(frozen=True)
class RunConfig:
    field: FieldCfg = field(default_factory=FieldCfg)
    algebra: AlgebraCfg = field(default_factory=AlgebraCfg)
    congruence: CongruenceCfg = field(default_factory=CongruenceCfg)
    enumeration: EnumerationCfg = field(default_factory=EnumerationCfg)
    diophantine: DiophantineCfg = field(default_factory=DiophantineCfg)
    spectral: SpectralCfg = field(default_factory=SpectralCfg)
    trace: TraceCfg = field(default_factory=TraceCfg)

    def algebra_desc(self) -> AlgebraDesc:
        try:
            fd = FieldDesc.make(self.field.D)
        except NumberFieldError as exc:
            raise ConfigError(str(exc)) from exc
        try:
            return AlgebraDesc(field=fd, u=self.algebra.u, v=self.algebra.v,
                               places_split=tuple(self.algebra.places))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def as_dict(self) -> dict:
        return asdict(self)


_SECTION_TYPES = {
    "field": FieldCfg,
    "algebra": AlgebraCfg,
    "congruence": CongruenceCfg,
    "enumeration": EnumerationCfg,
    "diophantine": DiophantineCfg,
    "spectral": SpectralCfg,
    "trace": TraceCfg,
}

_KEY_SPECS: dict[tuple[str, str], tuple] = {
    ("field", "D"): (int,),
    ("algebra", "u"): (int,),
    ("algebra", "v"): (int,),
    ("algebra", "places"): (list,),
    ("congruence", "q"): (int, type(None)),
    ("enumeration", "R1"): (int, float),
    ("enumeration", "R2"): (int, float),
    ("enumeration", "node_budget"): (int,),
    ("diophantine", "eps_list"): (list,),
    ("diophantine", "window"): (list,),
    ("diophantine", "seed"): (int,),
    ("diophantine", "pairs"): (int,),
    ("spectral", "delta_prime"): (int, float),
    ("spectral", "grid"): (int,),
    ("trace", "N"): (int,),
    ("trace", "ell"): (int,),
    ("trace", "k"): (int,),
    ("trace", "dims"): (list,),
    ("trace", "seed"): (int,),
    ("trace", "R_list"): (list,),
}

_TUPLE_KEYS = {
    ("algebra", "places"), ("diophantine", "eps_list"),
    ("diophantine", "window"), ("trace", "dims"), ("trace", "R_list"),
}


def _validate_section(name: str, raw: dict) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(f"section {name!r} must be an object")
    cls = _SECTION_TYPES[name]
    allowed = set(cls.__dataclass_fields__)
    kwargs = {}
    for key, value in raw.items():
        if key not in allowed:
            raise ConfigError(f"unknown key {name}.{key}")
        types = _KEY_SPECS[(name, key)]
        if isinstance(value, bool) or not isinstance(value, types):
            raise ConfigError(
                f"key {name}.{key} has invalid type {type(value).__name__}"
            )
        if (name, key) in _TUPLE_KEYS:
            value = tuple(value)
        kwargs[key] = value
    return kwargs


def config_from_dict(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("configuration root must be an object")
    sections = {}
    for key, value in raw.items():
        if key not in _SECTION_TYPES:
            raise ConfigError(f"unknown section {key!r}")
        sections[key] = _SECTION_TYPES[key](**_validate_section(key, value))
    cfg = RunConfig(**sections)
    _validate_semantics(cfg)
    return cfg


def _validate_semantics(cfg: RunConfig) -> None:
    cfg.algebra_desc()  # raises ConfigError on bad D / algebra
    if cfg.congruence.q is not None and cfg.congruence.q < 1:
        raise ConfigError("congruence.q must be >= 1")
    if cfg.enumeration.R1 < 0 or cfg.enumeration.R2 < 0:
        raise ConfigError("enumeration radii must be >= 0")
    if cfg.enumeration.node_budget < 1:
        raise ConfigError("enumeration.node_budget must be positive")
    eps = cfg.diophantine.eps_list
    if len(eps) < 1 or any(e <= 0 for e in eps):
        raise ConfigError("diophantine.eps_list must hold positive values")
    if list(eps) != sorted(eps, reverse=True):
        raise ConfigError("diophantine.eps_list must be decreasing")
    if len(cfg.diophantine.window) != 4:
        raise ConfigError("diophantine.window must be [x_min, x_max, y_min, y_max]")
    x0, x1, y0, y1 = cfg.diophantine.window
    if not (x0 < x1 and 0 < y0 < y1):
        raise ConfigError("diophantine.window is degenerate")
    if cfg.diophantine.pairs < 1:
        raise ConfigError("diophantine.pairs must be >= 1")
    if not 0.0 < cfg.spectral.delta_prime < 1.0:
        raise ConfigError("spectral.delta_prime must lie in (0, 1)")
    if cfg.spectral.grid < 2:
        raise ConfigError("spectral.grid must be >= 2")
    t = cfg.trace
    if t.N < 4:
        raise ConfigError("trace.N must be >= 4")
    if not 1 <= t.k < t.ell:
        raise ConfigError("trace.k must satisfy 1 <= k < ell")
    if len(t.dims) != t.ell or any(d not in (2, 3) for d in t.dims):
        raise ConfigError("trace.dims must list factor dimensions in {2, 3}")
    if len(t.R_list) < 2 or any(R <= 1 for R in t.R_list):
        raise ConfigError("trace.R_list needs >= 2 radii, all > 1")


def load_config(path: str | Path | None) -> RunConfig:
    """Load and validate a config file; None gives the embedded defaults."""
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read configuration: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"configuration is not valid JSON: {exc}") from exc
    return config_from_dict(raw)


def config_hash(cfg: RunConfig) -> str:
    payload = json.dumps(cfg.as_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()
