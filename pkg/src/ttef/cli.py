"""Command line: solve instances (``run``) or compare configurations (``bench``).

    ttef [run] --mode ub --prop ttef @example1 path/to/j301_1.sm
    ttef bench --props tt,ttef --time-limit 60 tests/data/j30
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

from .engine import MODES, PROP_LEVELS, SolverConfig, solve
from .psplib import PsplibError, example1, read_sm, to_instance

COLUMNS = ("instance", "mode", "prop", "status", "value", "failures", "decisions", "seconds", "seed")
SOLVED = ("optimal", "infeasible")


@dataclass
class RunReport:
    instance: str
    mode: str
    prop: str
    status: str
    value: Optional[int]
    failures: int
    decisions: int
    seconds: Optional[float]
    seed: int


def _load(spec: str):
    if spec.startswith("@"):
        if spec == "@example1":
            return example1()
        raise PsplibError(f"unknown built-in instance {spec}")
    return to_instance(read_sm(spec))


def _solve_one(spec: str, config: SolverConfig, timing: bool) -> RunReport:
    name = spec[1:] if spec.startswith("@") else Path(spec).stem
    try:
        project = _load(spec)
    except (OSError, ValueError) as exc:
        print(f"error: {spec}: {exc}", file=sys.stderr)
        return RunReport(name, config.mode, config.prop, "error", None, 0, 0, None, config.seed)
    res = solve(project, config)
    value = None if res.status in ("unknown", "infeasible") else res.value
    seconds = round(res.seconds, 3) if timing else None
    return RunReport(name, config.mode, config.prop, res.status, value, res.failures, res.decisions, seconds, config.seed)


def _solve_all(specs, config: SolverConfig, timing: bool, jobs: int) -> list[RunReport]:
    if jobs <= 1 or len(specs) <= 1:
        return [_solve_one(s, config, timing) for s in specs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_solve_one, specs, [config] * len(specs), [timing] * len(specs)))


def format_reports(reports, output: str) -> str:
    if output == "json":
        return json.dumps([asdict(r) for r in reports], indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in reports:
        row = asdict(r)
        w.writerow(["" if row[c] is None else row[c] for c in COLUMNS])
    return buf.getvalue()


def _solver_flags(ap: argparse.ArgumentParser):
    ap.add_argument("--mode", choices=MODES, default="ub")
    ap.add_argument("--time-limit", type=float, default=600.0, metavar="SEC")
    ap.add_argument("--restart-base", type=int, default=250)
    ap.add_argument("--restart-factor", type=float, default=2.0)
    ap.add_argument("--sgs-budget", type=int, default=500)
    ap.add_argument("--start-makespan", type=int, default=1, metavar="M")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--output", choices=("csv", "json"), default="csv")
    ap.add_argument("--jobs", type=int, default=1, metavar="N")
    ap.add_argument("--no-timing", action="store_true", help="leave the seconds column empty")


def _config(args, prop: str, ap: argparse.ArgumentParser) -> SolverConfig:
    try:
        return SolverConfig(prop=prop, mode=args.mode, restart_base=args.restart_base,
                            restart_factor=args.restart_factor, sgs_budget=args.sgs_budget,
                            time_limit=args.time_limit, start_makespan=args.start_makespan, seed=args.seed)
    except ValueError as exc:
        ap.error(str(exc))


def run(argv) -> int:
    ap = argparse.ArgumentParser(prog="ttef run", description="Solve RCPSP instances.")
    ap.add_argument("instances", nargs="+", metavar="INSTANCE", help=".sm file or @example1")
    ap.add_argument("--prop", choices=PROP_LEVELS, default="ttef")
    _solver_flags(ap)
    args = ap.parse_args(argv)
    config = _config(args, args.prop, ap)
    reports = _solve_all(args.instances, config, not args.no_timing, args.jobs)
    sys.stdout.write(format_reports(reports, args.output))
    return 2 if any(r.status == "error" for r in reports) else 0


def aggregate(reports_by_prop: dict[str, list[RunReport]]) -> list[dict]:
    """Solved count, and mean runtime and failures over the instances solved
    by every configuration."""
    common = None
    for reps in reports_by_prop.values():
        solved = {r.instance for r in reps if r.status in SOLVED}
        common = solved if common is None else common & solved
    rows = []
    for prop, reps in reports_by_prop.items():
        shared = [r for r in reps if r.instance in common]
        k = len(shared)
        secs = [r.seconds for r in shared if r.seconds is not None]
        rows.append({
            "prop": prop,
            "instances": len(reps),
            "svd": sum(r.status in SOLVED for r in reps),
            "cmpr": len(common),
            "cmpr_seconds": round(sum(secs) / len(secs), 3) if secs else "",
            "cmpr_failures": round(sum(r.failures for r in shared) / k, 1) if k else "",
        })
    return rows


def bench(argv) -> int:
    ap = argparse.ArgumentParser(prog="ttef bench", description="Compare propagation levels on a directory.")
    ap.add_argument("directory", type=Path)
    ap.add_argument("--props", default="tt,ttef", help="comma-separated propagation levels")
    ap.add_argument("--details", action="store_true", help="also print the per-instance reports")
    _solver_flags(ap)
    args = ap.parse_args(argv)
    props = [p.strip() for p in args.props.split(",") if p.strip()]
    for p in props:
        if p not in PROP_LEVELS:
            ap.error(f"unknown propagation level {p!r}")
    if not args.directory.is_dir():
        ap.error(f"{args.directory} is not a directory")
    specs = sorted(str(p) for p in args.directory.glob("*.sm"))
    if not specs:
        ap.error(f"no .sm files in {args.directory}")
    by_prop = {p: _solve_all(specs, _config(args, p, ap), not args.no_timing, args.jobs) for p in props}
    if args.details:
        sys.stdout.write(format_reports([r for p in props for r in by_prop[p]], args.output))
    rows = aggregate(by_prop)
    if args.output == "json":
        sys.stdout.write(json.dumps(rows, indent=2) + "\n")
    else:
        w = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return 2 if any(r.status == "error" for reps in by_prop.values() for r in reps) else 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] == "bench":
        return bench(argv[1:])
    if argv and argv[0] == "run":
        argv = argv[1:]
    return run(argv)
