"""Command-line front end.

Subcommands: ``verify-example`` (the bundled verification case),
``scan-arc`` (user map + arc), ``critical-points``, ``fiber-sample`` and
``betti``.  Reports are JSON, point data CSV; the report content is
byte-identical for a fixed seed and configuration (wall time goes to a
separate timing sidecar).  ``FIBER_ATLAS_THREADS`` caps parallelism.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time

from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .arcscan import Arc, LoopTraceConfig, ScanConfig, atypicality_verdict, detect_vanishing_components, scan_arc, track_loop_along_arc
from .config import RunConfig, parse_overrides
from .poly import PolynomialMap, parse_polynomial
from .rips import betti_summary, persistence_pairs, select_scale, write_persistence_csv
from .variety import RestrictedFunction, constrained_critical_points, sample_fiber
from . import showcase as showcase_mod


def _write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _emit_error(exc: BaseException) -> None:
    sys.stderr.write(
        json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n"
    )


def _parse_map(map_text: str, variables_text: str) -> PolynomialMap:
    variables = tuple(v.strip() for v in variables_text.split(",") if v.strip())
    components = [
        parse_polynomial(part.strip(), variables)
        for part in map_text.split(";")
        if part.strip()
    ]
    return PolynomialMap(components)


def _parse_point(text: str) -> List[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _parse_schedule(text: Optional[str], steps: int) -> List[float]:
    if text:
        return [float(x) for x in text.split(",") if x.strip()]
    return [k / (steps - 1) for k in range(steps)]


def _report_paths(cfg: RunConfig, name: str):
    os.makedirs(cfg.out_dir, exist_ok=True)
    return (
        os.path.join(cfg.out_dir, f"{name}.json"),
        os.path.join(cfg.out_dir, f"{name}.timing.json"),
    )


def _finish(cfg: RunConfig, name: str, payload: dict, started: float) -> str:
    report_path, timing_path = _report_paths(cfg, name)
    payload = {"tool_version": __version__, "config": cfg.echo(), **payload}
    _write_json(report_path, payload)
    _write_json(timing_path, {"wall_time_s": time.time() - started})
    return report_path


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------


def cmd_verify_example(args) -> int:
    started = time.time()
    cfg = RunConfig.build(args.seed, args.config, parse_overrides(args.set), args.out, args.threads)
    bundle = showcase_mod.build_bundle()
    sc = showcase_mod.ShowcaseConfig(seed=cfg.seed, threads=cfg.threads)
    if args.coarse:
        sc = showcase_mod.coarse_config(cfg.seed, threads=cfg.threads)
    report = showcase_mod.verify_all(bundle, sc)
    payload = report.to_json_dict()
    if args.coarse:
        payload["warning"] = "coarse grids; verdict unchanged but margins are weaker"
    path = _finish(cfg, "verify_example", payload, started)
    print(report.verdict.machine_line)
    for check in report.checks:
        print(f"check {check.name}: {check.status}")
    print(f"report: {path}")
    return 0 if report.overall_pass else 1


def cmd_scan_arc(args) -> int:
    started = time.time()
    cfg = RunConfig.build(args.seed, args.config, parse_overrides(args.set), args.out, args.threads)
    pmap = _parse_map(args.map, args.vars)
    start, end = (s.strip() for s in args.arc.split(":"))
    schedule = _parse_schedule(args.schedule, args.steps)
    arc = Arc.segment(_parse_point(start), _parse_point(end), schedule)
    scan_cfg = ScanConfig(
        radius=args.radius, count=args.count, seed=cfg.seed, threads=cfg.threads,
    )
    report = scan_arc(pmap, arc, scan_cfg)
    vanishing = detect_vanishing_components(report)
    trace = None
    trace_payload = None
    if args.cut:
        cut_map = PolynomialMap(
            [parse_polynomial(c.strip(), pmap.variables) for c in args.cut.split(";")]
        )
        loop_cfg = LoopTraceConfig(
            radius=args.radius, count=args.count, seed=cfg.seed, threads=cfg.threads,
        )
        trace = track_loop_along_arc(pmap, arc, cut_map, loop_cfg)
        trace_payload = trace.to_json_dict()
    verdict = atypicality_verdict(report, trace=trace, vanishing=vanishing)
    payload = {
        "scan": report.to_json_dict(),
        "vanishing": [f.to_json_dict() for f in vanishing],
        "loop_trace": trace_payload,
        "verdict": verdict.to_json_dict(),
    }
    os.makedirs(cfg.out_dir, exist_ok=True)
    if args.emit_persistence:
        emitted = []
        for k, rec in enumerate(report.records):
            if rec.summary is None:
                continue
            fs = sample_fiber(
                pmap, rec.target, radius=scan_cfg.radius, count=scan_cfg.count,
                seed=scan_cfg.seed + 1009 * k,
            )
            pairs = persistence_pairs(fs.points, rec.summary.scale)
            pp_path = os.path.join(cfg.out_dir, f"persistence_{k:03d}.csv")
            write_persistence_csv(pp_path, pairs)
            fs.to_csv(os.path.join(cfg.out_dir, f"fiber_{k:03d}.csv"))
            emitted.append(os.path.basename(pp_path))
        payload["persistence_csvs"] = emitted
    path = _finish(cfg, "scan_arc", payload, started)
    print(verdict.machine_line)
    print(f"report: {path}")
    return 0


def cmd_critical_points(args) -> int:
    started = time.time()
    cfg = RunConfig.build(args.seed, args.config, parse_overrides(args.set), args.out, args.threads)
    variables = tuple(v.strip() for v in args.vars.split(","))
    objective = parse_polynomial(args.objective, variables)
    constraints = _parse_map(args.constraints, args.vars)
    inequalities = tuple(
        parse_polynomial(q.strip(), variables) for q in (args.inequalities or "").split(";") if q.strip()
    )
    rf = RestrictedFunction(objective, constraints, inequalities)
    lo, hi = (float(x) for x in args.box.split(","))
    result = constrained_critical_points(
        rf,
        [(lo, hi)] * len(variables),
        multistart_n=args.multistart,
        seed=cfg.seed,
    )
    payload = {
        "points": [p.to_json_dict() for p in result.points],
        "diagnostics": json.loads(json.dumps(result.diagnostics, default=str)),
    }
    path = _finish(cfg, "critical_points", payload, started)
    print(f"critical points: {len(result.points)}")
    for p in result.points:
        print(f"  at {np.round(p.location, 8).tolist()} index={p.morse_index}")
    print(f"report: {path}")
    return 0


def cmd_fiber_sample(args) -> int:
    started = time.time()
    cfg = RunConfig.build(args.seed, args.config, parse_overrides(args.set), args.out, args.threads)
    pmap = _parse_map(args.map, args.vars)
    target = _parse_point(args.target)
    fs = sample_fiber(
        pmap, target, radius=args.radius, count=args.count, seed=cfg.seed,
    )
    os.makedirs(cfg.out_dir, exist_ok=True)
    csv_path = os.path.join(cfg.out_dir, "fiber_sample.csv")
    fs.to_csv(csv_path)
    payload = {"sample": fs.metadata(), "csv": os.path.basename(csv_path)}
    path = _finish(cfg, "fiber_sample", payload, started)
    print(f"sampled {fs.count} points -> {csv_path}")
    print(f"report: {path}")
    return 0


def cmd_betti(args) -> int:
    started = time.time()
    cfg = RunConfig.build(args.seed, args.config, parse_overrides(args.set), args.out, args.threads)
    points = np.loadtxt(args.infile, delimiter=",", skiprows=1 if args.header else 0)
    if points.ndim == 1:
        points = points[:, None]
    if args.columns:
        cols = [int(c) for c in args.columns.split(",")]
        points = points[:, cols]
    if args.eps == "auto":
        scale = select_scale(points)
    else:
        scale = float(args.eps)
    summary = betti_summary(points, scale=scale)
    payload = {"betti": summary.to_json_dict()}
    os.makedirs(cfg.out_dir, exist_ok=True)
    if args.emit_persistence:
        pairs = persistence_pairs(points, scale)
        pp_path = os.path.join(cfg.out_dir, "persistence.csv")
        write_persistence_csv(pp_path, pairs)
        payload["persistence_csv"] = os.path.basename(pp_path)
    path = _finish(cfg, "betti", payload, started)
    print(f"b0={summary.b0} b1={summary.b1} chi={summary.euler} eps={summary.scale:.6g}")
    print(f"report: {path}")
    return 0


# ----------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------


def _add_common(sp) -> None:
    sp.add_argument("--seed", type=int, default=None, help="master seed (required here or in --config)")
    sp.add_argument("--config", default=None, help="flat key=value config file")
    sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="config override")
    sp.add_argument("--out", default=None, help="output directory")
    sp.add_argument("--threads", type=int, default=None, help="parallel task cap (default: FIBER_ATLAS_THREADS)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fiber-atlas",
        description="Fiber topology of real polynomial maps along arcs",
    )
    parser.add_argument("--version", action="version", version=f"fiber-atlas {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("verify-example", help="run the bundled verification case")
    _add_common(sp)
    sp.add_argument("--coarse", action="store_true", help="coarse grids (faster, weaker margins)")
    sp.set_defaults(fn=cmd_verify_example)

    sp = sub.add_parser("scan-arc", help="fiber invariants along an arc of a user map")
    _add_common(sp)
    sp.add_argument("--map", required=True, help="semicolon-separated polynomial components")
    sp.add_argument("--vars", required=True, help="comma-separated variable names")
    sp.add_argument("--arc", required=True, help="start:end, each a comma-separated point")
    sp.add_argument("--schedule", default=None, help="comma-separated parameters in [0,1]")
    sp.add_argument("--steps", type=int, default=11, help="uniform schedule size if --schedule absent")
    sp.add_argument("--radius", type=float, default=8.0)
    sp.add_argument("--count", type=int, default=1500)
    sp.add_argument("--cut", default=None, help="loop cut polynomial(s), semicolon separated")
    sp.add_argument("--emit-persistence", action="store_true")
    sp.set_defaults(fn=cmd_scan_arc)

    sp = sub.add_parser("critical-points", help="constrained critical points with Morse data")
    _add_common(sp)
    sp.add_argument("--objective", required=True)
    sp.add_argument("--vars", required=True)
    sp.add_argument("--constraints", required=True, help="semicolon-separated equality constraints")
    sp.add_argument("--inequalities", default=None, help="semicolon-separated 'poly >= 0' constraints")
    sp.add_argument("--box", default="-10,10", help="lo,hi bounds applied to every variable")
    sp.add_argument("--multistart", type=int, default=400)
    sp.set_defaults(fn=cmd_critical_points)

    sp = sub.add_parser("fiber-sample", help="sample a fiber inside a ball, dump CSV")
    _add_common(sp)
    sp.add_argument("--map", required=True)
    sp.add_argument("--vars", required=True)
    sp.add_argument("--target", required=True, help="comma-separated target point")
    sp.add_argument("--radius", type=float, default=8.0)
    sp.add_argument("--count", type=int, default=2000)
    sp.set_defaults(fn=cmd_fiber_sample)

    sp = sub.add_parser("betti", help="Rips Betti numbers of a CSV point cloud")
    _add_common(sp)
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--eps", default="auto", help="'auto' or a numeric scale")
    sp.add_argument("--header", action="store_true", help="skip a CSV header row")
    sp.add_argument("--columns", default=None, help="comma-separated column indices to use")
    sp.add_argument("--emit-persistence", action="store_true")
    sp.set_defaults(fn=cmd_betti)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except BrokenPipeError:
        return 0
    except Exception as exc:  # error JSON on stderr, nonzero exit
        _emit_error(exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
