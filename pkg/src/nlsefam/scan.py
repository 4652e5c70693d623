"""Seeded parameter sweeps recording whether the coupling residual T vanishes.

Each sample is classified, the invariants and root pattern of R1 are
recorded, and where an f can be built the maximum of |T| on the grid decides
the verdict.  Failures on a single sample never stop a sweep.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import NlseFamError
from .family import Kind, build_bundle, classify
from .quartic import Params, invariants, r1_coeffs, roots
from .verify import FAIL_MIN, PASS_MAX, GridSpec, t_residual

SCHEMA_VERSION = 1

EXAMPLES = (
    Params(1.0, 2.0, 0.25, 1.0),
    Params(1.0, 2.0, 0.25, 1.0, h0=1.0),
    Params(0.125, 1.0, 0.5, 1.0),
    Params(-1.0, -2.0, -0.25, 1.0),
)

VERDICTS = ("Vanishing", "NonVanishing", "Indeterminate", "Unsupported")
FAMILIES = ("off", "c2", "c2star")


@dataclass(frozen=True)
class ScanSpace:
    """Sampling law: magnitudes log-uniform in [mag_min, mag_max], random signs.

    family
        ``off``     a, c1, c2 free, c3 > 0, h0 = 0
        ``c2``      a, c1 of one sign, c2 = c1^2/(16a), c3 = 2 c1 c2
        ``c2star``  c1, c2 of one sign, a = c1^2/(12 c2), c3 = 16 c1 c2 / 9
    """

    family: str = "off"
    mag_min: float = 1e-2
    mag_max: float = 1e2

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if not (0 < self.mag_min <= self.mag_max) or not math.isfinite(self.mag_max):
            raise ValueError("need 0 < mag_min <= mag_max < inf")

    def _mag(self, rng) -> float:
        return float(np.exp(rng.uniform(math.log(self.mag_min), math.log(self.mag_max))))

    def _sign(self, rng) -> float:
        return 1.0 if rng.random() < 0.5 else -1.0

    def sample(self, rng) -> Params:
        m = self._mag
        if self.family == "off":
            return Params(self._sign(rng) * m(rng), self._sign(rng) * m(rng),
                          self._sign(rng) * m(rng), m(rng))
        s = self._sign(rng)
        if self.family == "c2":
            a, c1 = s * m(rng), s * m(rng)
            c2 = c1 * c1 / (16 * a)
            return Params(a, c1, c2, 2 * c1 * c2)
        c1, c2 = s * m(rng), s * m(rng)
        return Params(c1 * c1 / (12 * c2), c1, c2, 16 * c1 * c2 / 9)


@dataclass(frozen=True)
class ScanRecord:
    index: int
    params: Params
    kind: str
    disc_h: float
    g2h: float
    g3h: float
    root_structure: str
    t_max_abs: float
    masked_fraction: float
    verdict: str
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "params": self.params.as_dict(),
            "class": self.kind,
            "disc_h": _json_float(self.disc_h),
            "g2h": _json_float(self.g2h),
            "g3h": _json_float(self.g3h),
            "root_structure": self.root_structure,
            "t_max_abs": _json_float(self.t_max_abs),
            "masked_fraction": _json_float(self.masked_fraction),
            "verdict": self.verdict,
            "note": self.note,
        }


def _json_float(x: float):
    return float(x) if math.isfinite(x) else None


@dataclass(frozen=True)
class _Job:
    index: int
    params: Params
    grid: GridSpec
    pass_max: float
    fail_min: float


def evaluate(index: int, p: Params, g: GridSpec, pass_max: float = PASS_MAX,
             fail_min: float = FAIL_MIN) -> ScanRecord:
    q1 = r1_coeffs(p)
    inv = invariants(q1)
    g2h, g3h = float(inv.g2), float(inv.g3)
    disc = float(inv.disc)
    try:
        structure = roots(q1).structure
    except NlseFamError:
        structure = "none"
    kind = "Inadmissible"
    try:
        kind = classify(p).kind.value
        bundle = build_bundle(p, formal=True)
        if "f" not in bundle.supports:
            return ScanRecord(index, p, kind, disc, g2h, g3h, structure, math.nan, 1.0,
                              "Unsupported", f"no f construction for {kind}")
        with np.errstate(all="ignore"):
            rep = t_residual(bundle, g)
    except (NlseFamError, ValueError, ArithmeticError) as exc:
        return ScanRecord(index, p, kind, disc, g2h, g3h, structure, math.nan, 1.0,
                          "Unsupported", f"{type(exc).__name__}: {exc}")
    return ScanRecord(index, p, kind, disc, g2h, g3h, structure, rep.max_abs,
                      rep.masked_fraction, rep.verdict(pass_max, fail_min))


def _run(job: _Job) -> ScanRecord:
    return evaluate(job.index, job.params, job.grid, job.pass_max, job.fail_min)


def _execute(jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) < 2:
        return [_run(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run, jobs))


def sample_params(space: ScanSpace, seed: int, budget: int,
                  include_examples: bool = True) -> list:
    """The parameter sets a sweep visits, in order."""
    if budget < 0:
        raise ValueError("budget must be >= 0")
    forced = list(EXAMPLES[:budget]) if include_examples else []
    rng = np.random.default_rng(seed)
    return forced + [space.sample(rng) for _ in range(budget - len(forced))]


def scan(space: ScanSpace, seed: int, g: GridSpec, budget: int,
         include_examples: bool = True, workers: int = 1,
         pass_max: float = PASS_MAX, fail_min: float = FAIL_MIN) -> list:
    plist = sample_params(space, seed, budget, include_examples)
    jobs = [_Job(i, p, g, pass_max, fail_min) for i, p in enumerate(plist)]
    return _execute(jobs, workers)


def scan_c2star(seed: int, g: GridSpec, budget: int, mag_min: float = 1e-2,
                mag_max: float = 1e2, workers: int = 1, **kw) -> list:
    space = ScanSpace("c2star", mag_min, mag_max)
    return scan(space, seed, g, budget, include_examples=False, workers=workers, **kw)


@dataclass
class ScanSummary:
    counts: dict = field(default_factory=dict)
    off_family_vanishing: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "summary": True,
            "counts": {v: self.counts.get(v, 0) for v in VERDICTS},
            "off_family_vanishing": list(self.off_family_vanishing),
            "off_family_vanishing_flag": bool(self.off_family_vanishing),
        }


_ON_FAMILY = {Kind.HYPERBOLIC_C2.value, Kind.RATIONAL_C2STAR.value}


def summarize(records: Iterable[ScanRecord]) -> ScanSummary:
    s = ScanSummary()
    for r in records:
        s.counts[r.verdict] = s.counts.get(r.verdict, 0) + 1
        if r.verdict == "Vanishing" and r.kind not in _ON_FAMILY:
            s.off_family_vanishing.append(r.index)
    return s


def to_jsonl(records: list, meta: Optional[dict] = None) -> str:
    """One JSON object per record, then a summary footer."""
    lines = []
    header = {"schema_version": SCHEMA_VERSION, "kind": "scan"}
    if meta:
        header["meta"] = meta
    lines.append(json.dumps(header, sort_keys=True))
    for r in records:
        lines.append(json.dumps(r.to_dict(), sort_keys=True))
    footer = summarize(records).to_dict()
    footer["schema_version"] = SCHEMA_VERSION
    lines.append(json.dumps(footer, sort_keys=True))
    return "\n".join(lines) + "\n"
