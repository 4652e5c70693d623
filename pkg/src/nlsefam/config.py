"""Run configuration: one JSON document, overridable from the command line."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from typing import Optional

from .errors import NlseFamError
from .quartic import Params
from .scan import FAMILIES
from .verify import FAIL_MIN, PASS_MAX, GridSpec

CHECKS = ("T", "hode", "fode", "nlse", "drift")


class ConfigError(NlseFamError, ValueError):
    pass


@dataclass(frozen=True)
class Tolerances:
    tol_cond: float = 1e-9
    tol_root: float = 1e-9
    tol_pole: float = 1e-6
    pass_max: float = PASS_MAX
    fail_min: float = FAIL_MIN

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigError(f"tolerance {f.name} must be a positive number, got {v!r}")
        if self.pass_max >= self.fail_min:
            raise ConfigError("pass_max must be below fail_min")


@dataclass(frozen=True)
class OutputSpec:
    format: str = "csv"
    path: Optional[str] = None
    precision: int = 17

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if not (isinstance(self.precision, int) and 6 <= self.precision <= 17):
            raise ConfigError(f"precision must be an integer in [6, 17], got {self.precision!r}")


@dataclass(frozen=True)
class VerifySpec:
    checks: Optional[tuple] = None  # None: every check the class supports
    expect_failure: bool = False
    fd_step: Optional[float] = None

    def __post_init__(self):
        if self.checks is not None:
            bad = [c for c in self.checks if c not in CHECKS]
            if bad:
                raise ConfigError(f"unknown checks {bad}; choose from {list(CHECKS)}")
        if self.fd_step is not None and not self.fd_step > 0:
            raise ConfigError("fd_step must be > 0")


@dataclass(frozen=True)
class ScanSpec:
    family: str = "off"
    seed: int = 0
    budget: int = 100
    mag_min: float = 1e-2
    mag_max: float = 1e2
    include_examples: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"scan family must be one of {FAMILIES}")
        if not isinstance(self.budget, int) or self.budget < 0:
            raise ConfigError("budget must be an integer >= 0")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be an integer >= 0")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError("workers must be an integer >= 1")
        if not (0 < self.mag_min <= self.mag_max):
            raise ConfigError("need 0 < mag_min <= mag_max")


@dataclass(frozen=True)
class RunConfig:
    params: Params = field(default_factory=lambda: Params(1.0, 2.0, 0.25, 1.0))
    grid: GridSpec = field(default_factory=GridSpec)
    tolerances: Tolerances = field(default_factory=Tolerances)
    output: OutputSpec = field(default_factory=OutputSpec)
    verify: VerifySpec = field(default_factory=VerifySpec)
    scan: ScanSpec = field(default_factory=ScanSpec)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            sub = getattr(self, f.name)
            out[f.name] = {g.name: getattr(sub, g.name) for g in fields(sub)}
        v = out["verify"]
        v["checks"] = list(v["checks"]) if v["checks"] is not None else None
        return out


_SECTIONS = {
    "params": Params, "grid": GridSpec, "tolerances": Tolerances,
    "output": OutputSpec, "verify": VerifySpec, "scan": ScanSpec,
}


def _build(cls, base, values: dict, where: str):
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(values) - names)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    if "checks" in values and values["checks"] is not None:
        values = dict(values, checks=tuple(values["checks"]))
    try:
        return replace(base, **values)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def from_dict(doc: dict, base: Optional[RunConfig] = None) -> RunConfig:
    """Merge a (possibly partial) config document over ``base``."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    doc = dict(doc)
    doc.pop("schema_version", None)
    unknown = sorted(set(doc) - set(_SECTIONS))
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}")
    cfg = base or RunConfig()
    updates = {}
    for key, cls in _SECTIONS.items():
        if key in doc:
            if not isinstance(doc[key], dict):
                raise ConfigError(f"{key} must be an object")
            updates[key] = _build(cls, getattr(cfg, key), doc[key], key)
    return replace(cfg, **updates)


def load(path: str, base: Optional[RunConfig] = None) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return from_dict(doc, base)
