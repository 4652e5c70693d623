"""Command-line front end.

Exit codes: 0 pass, 1 residual failure, 2 invalid input, 3 unsupported object.
"""
from __future__ import annotations

import argparse
import contextlib
import sys
from dataclasses import asdict
from typing import Optional

import numpy as np

from . import export
from .config import CHECKS, ConfigError, RunConfig, from_dict, load
from .errors import NlseFamError, OutOfFamily
from .family import Kind, build_bundle, classify, k_values
from .quartic import invariants, r1_coeffs, r2_coeffs, roots
from .scan import ScanSpace, scan, to_jsonl
from .verify import (
    f_ode_residual,
    h_ode_residual,
    h_ode_residual_samples,
    invariant_drift,
    nlse_residual,
    t_residual,
)

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_UNSUPPORTED = 0, 1, 2, 3

BUILDS = ("h", "phi", "f0", "f", "psi", "phase_diagram")


# -- argument handling -------------------------------------------------------------

def _common(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("parameters and output")
    g.add_argument("--config", help="JSON run configuration")
    for name in ("a", "c1", "c2", "c3", "h0", "z0"):
        g.add_argument(f"--{name}", type=float)
    g.add_argument("--grid", help="tmin,tmax,nt,zmin,zmax,nz")
    g.add_argument("--exclusion", type=float, help="mask half-width around z0 and poles")
    g.add_argument("--tol-cond", type=float)
    g.add_argument("--tol-pole", type=float)
    g.add_argument("--pass-max", type=float)
    g.add_argument("--fail-min", type=float)
    g.add_argument("--out", help="output path (default stdout)")
    g.add_argument("--format", choices=("csv", "json"))
    g.add_argument("--precision", type=int)


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nlsefam", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="family, invariants, roots and K values")
    _common(p)

    p = sub.add_parser("build", help="tabulate h, phi, f0, f, psi or the phase diagram")
    p.add_argument("what", choices=BUILDS)
    p.add_argument("--plot", action="store_true", help="also write a PNG next to --out")
    _common(p)

    p = sub.add_parser("verify", help="residual checks, reported as JSON")
    p.add_argument("--checks", help=f"comma list from {','.join(CHECKS)}")
    p.add_argument("--expect-failure", action="store_true",
                   help="pass when every residual exceeds fail_min")
    p.add_argument("--fd-step", type=float)
    p.add_argument("--from", dest="source", help="re-verify h tabulated by 'build h'")
    _common(p)

    p = sub.add_parser("scan", help="seeded sweep, JSON lines")
    p.add_argument("--family", choices=("off", "c2", "c2star"))
    p.add_argument("--seed", type=int)
    p.add_argument("--budget", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--no-examples", action="store_true")
    _common(p)
    return ap


def _parse_grid(text: str) -> dict:
    parts = text.split(",")
    if len(parts) != 6:
        raise ConfigError("--grid needs tmin,tmax,nt,zmin,zmax,nz")
    try:
        t0, t1, z0, z1 = (float(parts[i]) for i in (0, 1, 3, 4))
        nt, nz = int(parts[2]), int(parts[5])
    except ValueError as exc:
        raise ConfigError(f"--grid: {exc}") from exc
    return {"t_min": t0, "t_max": t1, "n_t": nt, "z_min": z0, "z_max": z1, "n_z": nz}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load(args.config) if args.config else RunConfig()
    doc: dict = {}
    par = {k: getattr(args, k) for k in ("a", "c1", "c2", "c3", "h0", "z0") if getattr(args, k) is not None}
    if par:
        doc["params"] = par
    grid = _parse_grid(args.grid) if args.grid else {}
    if args.exclusion is not None:
        grid["exclusion_radius"] = args.exclusion
    if grid:
        doc["grid"] = grid
    tol = {k: getattr(args, k) for k in ("tol_cond", "tol_pole", "pass_max", "fail_min")
           if getattr(args, k) is not None}
    if tol:
        doc["tolerances"] = tol
    out = {k: getattr(args, k) for k in ("format", "precision") if getattr(args, k) is not None}
    if args.out is not None:
        out["path"] = args.out
    if out:
        doc["output"] = out
    if args.command == "verify":
        ver = {}
        if args.checks:
            ver["checks"] = [c.strip() for c in args.checks.split(",") if c.strip()]
        if args.expect_failure:
            ver["expect_failure"] = True
        if args.fd_step is not None:
            ver["fd_step"] = args.fd_step
        if ver:
            doc["verify"] = ver
    if args.command == "scan":
        sc = {k: getattr(args, k) for k in ("family", "seed", "budget", "workers")
              if getattr(args, k) is not None}
        if args.no_examples:
            sc["include_examples"] = False
        if sc:
            doc["scan"] = sc
    return from_dict(doc, cfg)


@contextlib.contextmanager
def _sink(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


# -- classify ----------------------------------------------------------------------

def classify_report(cfg: RunConfig) -> dict:
    p = cfg.params
    fam = classify(p, cfg.tolerances.tol_cond)
    q1 = r1_coeffs(p)
    inv1 = invariants(q1)
    rep = {
        "params": p.as_dict(),
        "class": fam.kind.value,
        "conditions": [{"id": c.id, "satisfied": c.satisfied, "residual": c.residual}
                       for c in fam.diagnostics],
        "R1": {"coeffs": [float(x) for x in q1.expanded()], "g2": float(inv1.g2),
               "g3": float(inv1.g3), "disc": float(inv1.disc),
               "roots": roots(q1).describe(), "structure": roots(q1).structure},
    }
    try:
        q2 = r2_coeffs(p, p.h0)
        inv2 = invariants(q2)
        rep["R2_at_z0"] = {"coeffs": [float(x) for x in q2.expanded()], "g2": float(inv2.g2),
                           "g3": float(inv2.g3), "disc": float(inv2.disc),
                           "roots": roots(q2).describe(), "structure": roots(q2).structure}
    except NlseFamError as exc:
        rep["R2_at_z0"] = {"error": str(exc)}
    if fam.kind is Kind.HYPERBOLIC_C2:
        kv = k_values(p)
        rep["K"] = {"K01": kv.k01, "K03": kv.k03, "admissible01": kv.admissible01,
                    "admissible03": kv.admissible03}
    return rep


def _classify_text(rep: dict) -> str:
    lines = [f"class: {rep['class']}"]
    for c in rep["conditions"]:
        lines.append(f"  {c['id']:<22} {'yes' if c['satisfied'] else 'no ':<4} residual {c['residual']:.3e}")
    r1 = rep["R1"]
    lines.append(f"R1: g2 = {r1['g2']:.12g}, g3 = {r1['g3']:.12g}, disc = {r1['disc']:.3e}")
    lines.append(f"    roots {r1['roots']}  [{r1['structure']}]")
    r2 = rep["R2_at_z0"]
    if "error" in r2:
        lines.append(f"R2(., z0): {r2['error']}")
    else:
        lines.append(f"R2(., z0): g2 = {r2['g2']:.12g}, g3 = {r2['g3']:.12g}, disc = {r2['disc']:.3e}")
        lines.append(f"    roots {r2['roots']}  [{r2['structure']}]")
    if "K" in rep:
        k = rep["K"]
        lines.append(f"K01 = {k['K01']:.12g} ({'admissible' if k['admissible01'] else 'not admissible'})")
        lines.append(f"K03 = {k['K03']:.12g} ({'admissible' if k['admissible03'] else 'not admissible'})")
    return "\n".join(lines) + "\n"


def cmd_classify(cfg: RunConfig) -> int:
    rep = classify_report(cfg)
    with _sink(cfg.output.path) as fh:
        if cfg.output.format == "json":
            fh.write(export.dumps_json({"kind": "classify", **rep}))
        else:
            fh.write(_classify_text(rep))
    return EXIT_OK


# -- build -------------------------------------------------------------------------

def _phase_range(p, n: int) -> np.ndarray:
    """Uniform h samples around the real roots of R1, plus the roots themselves."""
    real = [r for r, _ in roots(r1_coeffs(p)).real()]
    lo, hi = (min(real + [0.0]), max(real + [0.0])) if real else (0.0, 1.0)
    pad = 0.05 * (hi - lo) if hi > lo else 1.0
    return np.union1d(np.linspace(lo - pad, hi + pad, n), real)


def build_table(cfg: RunConfig, what: str):
    """(columns, data arrays) for ``build``; raises OutOfFamily if unsupported."""
    p, g = cfg.params, cfg.grid
    if what == "phase_diagram":
        h = _phase_range(p, g.n_z)
        return ["h", "R1"], [h, r1_coeffs(p)(h)]
    bundle = build_bundle(p, cfg.tolerances.tol_cond, cfg.tolerances.tol_pole)
    if what not in bundle.supports:
        raise OutOfFamily(f"{what} is not available for {bundle.family.kind.value}")
    z = g.z
    if what in ("h", "phi", "f0"):
        with np.errstate(all="ignore"):
            vals = np.asarray(getattr(bundle, what)(z))
        if np.iscomplexobj(vals):
            return ["z", "re", "im"], [z, vals.real, vals.imag]
        return ["z", "value"], [z, vals]
    T, Z = g.mesh()
    with np.errstate(all="ignore"):
        vals = np.asarray(getattr(bundle, what)(T, Z, masked=True))
    if what == "psi" or np.iscomplexobj(vals):
        return ["t", "z", "re", "im"], [T, Z, vals.real, vals.imag]
    return ["t", "z", "value"], [T, Z, vals]


def _plot(path: str, what: str, columns, data) -> None:
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not installed; --plot ignored", file=sys.stderr)
        return
    fig, ax = plt.subplots(figsize=(6, 4))
    if columns[0] != "t":
        ax.plot(data[0], data[1])
        ax.set_xlabel(columns[0])
        ax.set_ylabel(columns[1] if columns[1] != "value" else what)
    else:
        T, Z = data[0], data[1]
        nt = np.unique(T).size
        vals = data[2] if columns[2] == "value" else np.hypot(data[2], data[3])
        im = ax.pcolormesh(np.unique(Z), np.unique(T), np.reshape(vals, (nt, -1)), shading="auto")
        fig.colorbar(im, ax=ax, label=what if columns[2] == "value" else f"|{what}|")
        ax.set_xlabel("z")
        ax.set_ylabel("t")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def cmd_build(cfg: RunConfig, what: str, plot: bool = False) -> int:
    try:
        columns, data = build_table(cfg, what)
    except OutOfFamily as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    meta = {"kind": "build", "what": what, "params": cfg.params.as_dict(),
            "class": classify(cfg.params, cfg.tolerances.tol_cond).kind.value}
    with _sink(cfg.output.path) as fh:
        if cfg.output.format == "json":
            doc = dict(meta, columns=columns,
                       data={c: [float(export.fmt(v, cfg.output.precision)) for v in np.ravel(d)]
                             for c, d in zip(columns, data)})
            fh.write(export.dumps_json(doc))
        else:
            export.write_csv(fh, columns, data, meta, cfg.output.precision)
    if plot:
        if not cfg.output.path:
            print("--plot needs --out", file=sys.stderr)
        else:
            _plot(cfg.output.path + ".png", what, columns, data)
    return EXIT_OK


# -- verify ------------------------------------------------------------------------

def default_checks(kind: Kind, supports: frozenset) -> tuple:
    if kind is Kind.HYPERBOLIC_C2:
        return CHECKS
    out = ["T"] if "f" in supports else []
    if "h" in supports:
        out.append("hode")
    if "f" in supports:
        out.append("fode")
    return tuple(out)


def run_checks(cfg: RunConfig) -> dict:
    p, g, tol = cfg.params, cfg.grid, cfg.tolerances
    bundle = build_bundle(p, tol.tol_cond, tol.tol_pole, formal=True)
    checks = cfg.verify.checks or default_checks(bundle.family.kind, bundle.supports)
    step = cfg.verify.fd_step
    need = {"T": {"f", "h"}, "hode": {"h"}, "fode": {"f", "h"}, "nlse": {"psi"}}
    results = {}
    for name in checks:
        if name == "drift":
            if bundle.family.kind is not Kind.HYPERBOLIC_C2:
                raise OutOfFamily("drift needs the hyperbolic family")
            d = invariant_drift(p, g.z)
            results[name] = {"g2": d.g2, "g3": d.g3, "disc": d.disc,
                             "max_abs": max(d.g2, d.g3, d.disc),
                             "method": "R2 invariants along the z grid"}
            continue
        if not need[name] <= bundle.supports:
            raise OutOfFamily(f"check {name} is not available for {bundle.family.kind.value}")
        with np.errstate(all="ignore"):
            if name == "T":
                rep = t_residual(bundle, g, step)
            elif name == "hode":
                rep = h_ode_residual(bundle, g.z, step, g.exclusion_radius)
            elif name == "fode":
                rep = f_ode_residual(bundle, g, step)
            else:
                rep = nlse_residual(bundle, g, step)
        results[name] = rep.to_dict()
    return {"class": bundle.family.kind.value, "route": bundle.route, "results": results}


def _judge(results: dict, cfg: RunConfig) -> bool:
    tol = cfg.tolerances
    vals = [r["max_abs"] for r in results.values()]
    if any(v is None or not np.isfinite(v) for v in vals):
        return False
    if cfg.verify.expect_failure:
        return all(v > tol.fail_min for v in vals)
    return all(v < tol.pass_max for v in vals)


def _verify_from_file(cfg: RunConfig, path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        meta, columns, cols = export.read_csv(fh)
    if meta.get("what") != "h":
        raise ConfigError("--from accepts files written by 'build h'")
    p = from_dict({"params": meta["params"]}).params
    rep = h_ode_residual_samples(cols["z"], cols["value"], p)
    return {"class": meta.get("class"), "route": "samples", "results": {"hode": rep.to_dict()}}


def cmd_verify(cfg: RunConfig, source: Optional[str] = None) -> int:
    try:
        doc = _verify_from_file(cfg, source) if source else run_checks(cfg)
    except OutOfFamily as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    ok = _judge(doc["results"], cfg)
    doc.update(kind="verify", params=cfg.params.as_dict(), grid=asdict(cfg.grid),
               expect_failure=cfg.verify.expect_failure, passed=ok,
               thresholds={"pass_max": cfg.tolerances.pass_max, "fail_min": cfg.tolerances.fail_min})
    with _sink(cfg.output.path) as fh:
        fh.write(export.dumps_json(doc))
    return EXIT_OK if ok else EXIT_FAIL


# -- scan --------------------------------------------------------------------------

def cmd_scan(cfg: RunConfig) -> int:
    sc = cfg.scan
    space = ScanSpace(sc.family, sc.mag_min, sc.mag_max)
    records = scan(space, sc.seed, cfg.grid, sc.budget, sc.include_examples, sc.workers,
                   cfg.tolerances.pass_max, cfg.tolerances.fail_min)
    meta = {"family": sc.family, "seed": sc.seed, "budget": sc.budget,
            "include_examples": sc.include_examples, "grid": asdict(cfg.grid),
            "h0_law": "h0 = 0 (a root of R1 for every sample)",
            "thresholds": {"pass_max": cfg.tolerances.pass_max, "fail_min": cfg.tolerances.fail_min}}
    with _sink(cfg.output.path) as fh:
        fh.write(to_jsonl(records, meta))
    return EXIT_OK


# -- entry point -------------------------------------------------------------------

def _join_grid(argv: list) -> list:
    """``--grid -3,3,...`` would read as an option; glue it into ``--grid=...``."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] == "--grid" and i + 1 < len(argv):
            out.append("--grid=" + argv[i + 1])
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv: Optional[list] = None) -> int:
    parser = make_parser()
    argv = _join_grid(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        cfg = resolve_config(args)
        if args.command == "classify":
            return cmd_classify(cfg)
        if args.command == "build":
            return cmd_build(cfg, args.what, args.plot)
        if args.command == "verify":
            return cmd_verify(cfg, args.source)
        return cmd_scan(cfg)
    except (ConfigError, NlseFamError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
