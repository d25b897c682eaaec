"""Benchmark harness: seeded target sampling, per-method statistics and
Table-style reporting.

Targets come from a SplitMix64 stream so every implementation of the
protocol reproduces the same set from the same seed (the generator
algorithm is part of the external contract, see SplitMix64 below).
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import demolib
from .costlib import Weights
from .ddpcore import SolverOptions
from .planners import PlanRequest, plan

__all__ = [
    "TaskSpace",
    "BenchConfig",
    "StatsRow",
    "SplitMix64",
    "sample_targets",
    "sample_targets_where",
    "evaluate",
    "aggregate",
    "rescore",
    "emit",
    "write_records",
]

_MASK64 = (1 << 64) - 1

METHOD_ORDER = ("ZS", "DS", "DP", "WS")


class SplitMix64:
    """SplitMix64 PRNG (Steele, Lea & Flood 2014).

    state += 0x9E3779B97F4A7C15; z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
    output = z ^ (z >> 31); all mod 2^64.

    uniform() maps the top 53 bits to [0, 1). The streaming order for
    target sampling is x, y, theta per target, in target order.
    """

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * (2.0 ** -53)


@dataclass(frozen=True)
class TaskSpace:
    x_min: float = -0.25
    x_max: float = 0.25
    y_min: float = -0.25
    y_max: float = 0.25
    # theta spans (-pi, pi]

    def contains(self, target: Sequence[float]) -> bool:
        x, y, th = target
        return (
            self.x_min <= x <= self.x_max
            and self.y_min <= y <= self.y_max
            and -math.pi < th <= math.pi
        )


def _draw(rng: SplitMix64, space: TaskSpace) -> Tuple[float, float, float]:
    x = space.x_min + rng.uniform() * (space.x_max - space.x_min)
    y = space.y_min + rng.uniform() * (space.y_max - space.y_min)
    th = math.pi - rng.uniform() * (2.0 * math.pi)  # lands in (-pi, pi]
    return (x, y, th)


def sample_targets(seed: int, n: int, space: TaskSpace = TaskSpace()) -> List[Tuple[float, float, float]]:
    """n i.i.d. uniform targets over the task-space box."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = SplitMix64(seed)
    return [_draw(rng, space) for _ in range(n)]


def sample_targets_where(
    seed: int,
    n: int,
    predicate: Callable[[Tuple[float, float, float]], bool],
    space: TaskSpace = TaskSpace(),
    max_draws: int = 1_000_000,
) -> List[Tuple[float, float, float]]:
    """Rejection-sample n targets satisfying a predicate, same stream."""
    rng = SplitMix64(seed)
    out = []
    for _ in range(max_draws):
        t = _draw(rng, space)
        if predicate(t):
            out.append(t)
            if len(out) == n:
                return out
    raise RuntimeError("predicate too restrictive: ran out of draws")


@dataclass
class BenchConfig:
    n_targets: int = 100
    seed: int = 42
    methods: Tuple[str, ...] = METHOD_ORDER
    xy_tol: float = 0.01
    theta_tol: float = 5.0 * math.pi / 180.0
    weights: Weights = field(default_factory=Weights)
    options: SolverOptions = field(default_factory=SolverOptions)
    T: int = 200
    dt: float = 0.05
    jobs: int = 1
    space: TaskSpace = field(default_factory=TaskSpace)

    def __post_init__(self):
        if self.n_targets < 1:
            raise ValueError("n_targets must be >= 1")
        methods = tuple(m.upper() for m in self.methods)
        for m in methods:
            if m not in METHOD_ORDER:
                raise ValueError(f"unknown method {m!r}")
        # keep canonical report order regardless of the requested order
        self.methods = tuple(m for m in METHOD_ORDER if m in methods)


@dataclass
class StatsRow:
    method: str
    x_err_mean_cm: float
    x_err_std_cm: float
    y_err_mean_cm: float
    y_err_std_cm: float
    theta_err_mean_rad: float
    theta_err_std_rad: float
    success_rate: float


def _run_one(args) -> dict:
    index, method, target, cfg, demos = args
    library = demolib.DemoLibrary(demos) if demos is not None else None
    req = PlanRequest(
        target=target,
        method=method,
        weights=cfg.weights,
        options=cfg.options,
        T=cfg.T,
        dt=cfg.dt,
    )
    start = time.perf_counter()
    result = plan(req, library)
    elapsed = time.perf_counter() - start
    ex, ey, eth = result.errors
    return {
        "index": index,
        "method": method,
        "target": [target[0], target[1], target[2]],
        "x_err_cm": 100.0 * ex,
        "y_err_cm": 100.0 * ey,
        "theta_err_rad": eth,
        "success": bool(
            abs(ex) < cfg.xy_tol and abs(ey) < cfg.xy_tol and abs(eth) < cfg.theta_tol
        ),
        "iterations": result.report.iterations,
        "termination": result.report.termination_reason,
        "selected_demo_id": result.selected_demo_id,
        "wall_time_s": elapsed,  # stripped from persisted records (see write_records)
    }


def evaluate(
    config: BenchConfig,
    library: Optional[demolib.DemoLibrary] = None,
    targets: Optional[List[Tuple[float, float, float]]] = None,
    progress: Optional[Callable[[dict], None]] = None,
) -> Tuple[List[StatsRow], List[dict]]:
    """Run every requested method on every sampled target.

    Per-target records are keyed and ordered by (target index, method
    order), so results are identical for any worker count. Solver failures
    score as non-success via the returned trajectory; the sweep never
    aborts.
    """
    needs_demos = any(m != "ZS" for m in config.methods)
    if needs_demos and (library is None or len(library) == 0):
        raise demolib.EmptyLibraryError("DS/DP/WS evaluation requires a demo library")
    if targets is None:
        targets = sample_targets(config.seed, config.n_targets, config.space)
    demos = library.demos if library is not None else None
    jobs = [
        (i, m, t, config, demos)
        for i, t in enumerate(targets)
        for m in config.methods
    ]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            records = []
            for rec in pool.map(_run_one, jobs, chunksize=1):
                records.append(rec)
                if progress is not None:
                    progress(rec)
    else:
        records = []
        for job in jobs:
            rec = _run_one(job)
            records.append(rec)
            if progress is not None:
                progress(rec)
    records.sort(key=lambda r: (r["index"], METHOD_ORDER.index(r["method"])))
    return aggregate(records, config.methods), records


def _pop_stats(values: List[float]) -> Tuple[float, float]:
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n
    return mean, math.sqrt(var)


def aggregate(records: List[dict], methods: Sequence[str] = METHOD_ORDER) -> List[StatsRow]:
    """Per-method mean/std (population) over all runs, failures included."""
    rows = []
    for m in methods:
        recs = [r for r in records if r["method"] == m]
        if not recs:
            continue
        xm, xs = _pop_stats([r["x_err_cm"] for r in recs])
        ym, ys = _pop_stats([r["y_err_cm"] for r in recs])
        tm, ts = _pop_stats([r["theta_err_rad"] for r in recs])
        succ = sum(1 for r in recs if r["success"]) / len(recs)
        rows.append(StatsRow(m, xm, xs, ym, ys, tm, ts, succ))
    return rows


def rescore(records: List[dict], xy_tol: float, theta_tol: float) -> Dict[str, float]:
    """Recompute success rates from stored records at other thresholds."""
    out: Dict[str, List[int]] = {}
    for r in records:
        ok = (
            abs(r["x_err_cm"]) < 100.0 * xy_tol
            and abs(r["y_err_cm"]) < 100.0 * xy_tol
            and abs(r["theta_err_rad"]) < theta_tol
        )
        out.setdefault(r["method"], []).append(1 if ok else 0)
    return {m: sum(v) / len(v) for m, v in out.items()}


_CSV_HEADER = (
    "method,x_err_mean_cm,x_err_std_cm,y_err_mean_cm,y_err_std_cm,"
    "theta_err_mean_rad,theta_err_std_rad,success_rate"
)


def emit(rows: List[StatsRow], fmt: str = "csv") -> str:
    """Render the summary as csv or a markdown table."""
    if not rows:
        raise ValueError("no rows to emit")
    if fmt == "csv":
        lines = [_CSV_HEADER]
        for r in rows:
            lines.append(
                f"{r.method},{r.x_err_mean_cm!r},{r.x_err_std_cm!r},"
                f"{r.y_err_mean_cm!r},{r.y_err_std_cm!r},"
                f"{r.theta_err_mean_rad!r},{r.theta_err_std_rad!r},{r.success_rate!r}"
            )
        return "\n".join(lines) + "\n"
    if fmt == "markdown":
        lines = [
            "| Method | x_err (cm) | y_err (cm) | theta_err (rad) | succ_rate |",
            "| --- | --- | --- | --- | --- |",
        ]
        for r in rows:
            lines.append(
                f"| {r.method}-DDP | {r.x_err_mean_cm:.2f} ± {r.x_err_std_cm:.2f} "
                f"| {r.y_err_mean_cm:.2f} ± {r.y_err_std_cm:.2f} "
                f"| {r.theta_err_mean_rad:.2f} ± {r.theta_err_std_rad:.2f} "
                f"| {100.0 * r.success_rate:.0f}% |"
            )
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def parse_csv(text: str) -> List[StatsRow]:
    lines = [ln for ln in text.strip().splitlines() if ln]
    if lines[0] != _CSV_HEADER:
        raise ValueError("unexpected csv header")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        rows.append(StatsRow(parts[0], *(float(p) for p in parts[1:])))
    return rows


def write_records(records: List[dict], path: str) -> None:
    """Write per-target records as JSON lines.

    Wall time is dropped so the persisted bytes are a pure function of the
    configuration (same seed = byte-identical file, any worker count)."""
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            rec = {k: v for k, v in rec.items() if k != "wall_time_s"}
            f.write(json.dumps(rec, sort_keys=True) + "\n")
