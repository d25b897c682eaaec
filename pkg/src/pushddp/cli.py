"""Unified command line: plan one target, run the benchmark, serve the
recorder, or inspect a demo library.

Exit codes: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv as _csv
import json
import sys

from . import benchkit, demolib
from .costlib import Weights
from .ddpcore import SolverOptions
from .paramio import load_params_file
from .planners import PlanRequest, plan
from .pushdyn import SliderParams


def _load_config(args):
    if getattr(args, "params", None):
        return load_params_file(args.params)
    return SliderParams(), Weights()


def _parse_target(text: str):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("target must be x,y,theta")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _cmd_plan(args) -> int:
    params, weights = _load_config(args)
    library = None
    if args.demos:
        library = demolib.load_library(args.demos)
    req = PlanRequest(
        target=args.target,
        method=args.method,
        weights=weights,
        options=SolverOptions(max_iters=args.max_iters),
        T=args.horizon,
        dt=args.dt,
        params=params,
    )
    result = plan(req, library)
    doc = result.to_json_dict(include_trajectory=not args.no_trajectory)
    text = json.dumps(doc, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    else:
        print(text)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as f:
            json.dump(result.report.to_json_dict(), f, indent=2)
    if args.traj_csv:
        with open(args.traj_csv, "w", newline="", encoding="utf-8") as f:
            writer = _csv.writer(f)
            writer.writerow(["t", "x", "y", "theta", "px", "py", "vx", "vy", "ux", "uy", "mode"])
            traj = result.trajectory
            for t in range(traj.horizon):
                writer.writerow(
                    [t, *(repr(v) for v in traj.states[t])]
                    + [repr(v) for v in traj.controls[t]]
                    + [traj.modes[t].token()]
                )
            writer.writerow([traj.horizon, *(repr(v) for v in traj.states[-1])] + ["", "", ""])
    print(
        f"method={result.method} success={result.success} "
        f"errors=({result.errors[0]:.4f}, {result.errors[1]:.4f}, {result.errors[2]:.4f})",
        file=sys.stderr,
    )
    return 0


def _cmd_bench(args) -> int:
    params, weights = _load_config(args)
    methods = tuple(m.strip().upper() for m in args.methods.split(","))
    cfg = benchkit.BenchConfig(
        n_targets=args.n,
        seed=args.seed,
        methods=methods,
        weights=weights,
        jobs=args.jobs,
        T=args.horizon,
        dt=args.dt,
    )
    library = demolib.load_library(args.demos) if args.demos else None
    done = {"count": 0}
    total = args.n * len(cfg.methods)

    def progress(rec):
        done["count"] += 1
        if done["count"] % 10 == 0 or done["count"] == total:
            print(f"  {done['count']}/{total} solves", file=sys.stderr)

    rows, records = benchkit.evaluate(cfg, library, progress=progress)
    csv_text = benchkit.emit(rows, "csv")
    with open(args.out, "w", encoding="utf-8") as f:
        f.write(csv_text)
    if args.md:
        with open(args.md, "w", encoding="utf-8") as f:
            f.write(benchkit.emit(rows, "markdown"))
    benchkit.write_records(records, args.records)
    total_time = sum(r.get("wall_time_s", 0.0) for r in records)
    print(benchkit.emit(rows, "markdown"), end="", file=sys.stderr)
    print(f"wrote {args.out} and {args.records}; solver time {total_time:.0f}s", file=sys.stderr)
    return 0


def _cmd_record_serve(args) -> int:
    from .teleod import serve

    params, _ = _load_config(args)
    serve(args.port, params, args.demos, host=args.host)
    return 0


def _cmd_demo_ls(args) -> int:
    lib = demolib.load_library(args.dir)
    for d in lib.demos:
        print(
            f"{d.id}  target=({d.target[0]:+.4f}, {d.target[1]:+.4f}, {d.target[2]:+.4f})  "
            f"N_s={d.n_switches}  samples={d.n_samples}  duration={d.duration:.2f}s"
        )
    return 0


def _cmd_demo_show(args) -> int:
    demo = demolib.load(args.file)
    doc = {
        "id": demo.id,
        "target": list(demo.target),
        "dt_rec": demo.dt_rec,
        "n_samples": demo.n_samples,
        "n_switches": demo.n_switches,
        "duration": demo.duration,
        "modes": [m.token() for m in demo.modes],
    }
    print(json.dumps(doc, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pushddp", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="solve one planning request")
    p.add_argument("--method", default="zs", choices=["zs", "ds", "dp", "ws", "ZS", "DS", "DP", "WS"])
    p.add_argument("--target", type=_parse_target, required=True, metavar="X,Y,TH")
    p.add_argument("--demos", help="demo library directory (required for ds/dp/ws)")
    p.add_argument("--params", help="key-value parameter file")
    p.add_argument("--horizon", type=int, default=200)
    p.add_argument("--dt", type=float, default=0.05)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--out", help="write the result JSON here instead of stdout")
    p.add_argument("--report", help="write the solver report JSON to this file")
    p.add_argument("--traj-csv", help="write the trajectory as CSV")
    p.add_argument("--no-trajectory", action="store_true", help="omit arrays from the JSON")
    p.set_defaults(func=_cmd_plan)

    b = sub.add_parser("bench", help="run the seeded benchmark")
    b.add_argument("--seed", type=int, default=42)
    b.add_argument("--n", type=int, default=100)
    b.add_argument("--methods", default="zs,ds,dp,ws")
    b.add_argument("--demos", help="demo library directory")
    b.add_argument("--params", help="key-value parameter file")
    b.add_argument("--out", default="results.csv")
    b.add_argument("--md", help="also write a markdown table")
    b.add_argument("--records", default="records.jsonl")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--horizon", type=int, default=200)
    b.add_argument("--dt", type=float, default=0.05)
    b.set_defaults(func=_cmd_bench)

    r = sub.add_parser("record-serve", help="run the demonstration recording service")
    r.add_argument("--port", type=int, default=8400)
    r.add_argument("--host", default="127.0.0.1")
    r.add_argument("--demos", default="demos", help="directory for saved demos")
    r.add_argument("--params", help="key-value parameter file")
    r.set_defaults(func=_cmd_record_serve)

    d = sub.add_parser("demo", help="inspect a demo library")
    dsub = d.add_subparsers(dest="demo_command", required=True)
    dls = dsub.add_parser("ls", help="list demos in a directory")
    dls.add_argument("dir")
    dls.set_defaults(func=_cmd_demo_ls)
    dshow = dsub.add_parser("show", help="dump one demo's metadata")
    dshow.add_argument("file")
    dshow.set_defaults(func=_cmd_demo_show)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, demolib.SchemaError, demolib.EmptyLibraryError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
