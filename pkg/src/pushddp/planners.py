"""The four planning pipelines: ZS, DS, DP and WS.

ZS runs the reaching cost from a zero control tape. DS seeds the tape with
the selected demonstration's accelerations. DP keeps the zero start but
penalizes deviation from the demonstrated switch states, velocities and
accelerations. WS refines the DP solution under the plain reaching cost.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import demolib
from .costlib import Weights, dp_cost, ds_cost, target_state
from .ddpcore import SolverOptions, SolveReport, Trajectory, solve
from .pushdyn import HybridState, SliderParams, wrap_angle

__all__ = [
    "PlanRequest",
    "PlanResult",
    "SUCCESS_XY_TOL",
    "SUCCESS_THETA_TOL",
    "default_start",
    "compute_errors",
    "is_success",
    "plan",
    "plan_zs",
    "plan_ds",
    "plan_dp",
    "plan_ws",
]

SUCCESS_XY_TOL = 0.01
SUCCESS_THETA_TOL = 5.0 * math.pi / 180.0

_FACE_NORMALS = ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))

TASK_SPACE_XY = 0.25


@dataclass
class PlanRequest:
    target: Tuple[float, float, float]
    method: str = "ZS"  # ZS | DS | DP | WS
    x0: Optional[HybridState] = None
    weights: Weights = field(default_factory=Weights)
    options: SolverOptions = field(default_factory=SolverOptions)
    T: int = 200
    dt: float = 0.05
    params: SliderParams = field(default_factory=SliderParams)
    dp_init: str = "zeros"  # "zeros" | "demo" (ablation flag)

    def __post_init__(self):
        self.method = self.method.upper()
        if self.method not in ("ZS", "DS", "DP", "WS"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.dp_init not in ("zeros", "demo"):
            raise ValueError("dp_init must be 'zeros' or 'demo'")
        tx, ty, _ = self.target
        if max(abs(tx), abs(ty)) > TASK_SPACE_XY:
            warnings.warn(f"target {self.target} lies outside the task space", stacklevel=2)

    def start_state(self) -> HybridState:
        return self.x0 if self.x0 is not None else default_start(self.target, self.params)


@dataclass
class PlanResult:
    trajectory: Trajectory
    report: SolveReport
    errors: Tuple[float, float, float]
    success: bool
    method: str
    selected_demo_id: Optional[str] = None
    inner_reports: List[SolveReport] = field(default_factory=list)

    def to_json_dict(self, include_trajectory: bool = True) -> dict:
        out = {
            "method": self.method,
            "errors": {
                "x_err": self.errors[0],
                "y_err": self.errors[1],
                "theta_err": self.errors[2],
            },
            "success": self.success,
            "selected_demo_id": self.selected_demo_id,
            "report": self.report.to_json_dict(),
            "inner_reports": [r.to_json_dict() for r in self.inner_reports],
        }
        if include_trajectory:
            out["trajectory"] = {
                "dt": self.trajectory.dt,
                "states": self.trajectory.states.tolist(),
                "controls": self.trajectory.controls.tolist(),
                "modes": [m.token() for m in self.trajectory.modes],
            }
        return out


def face_touch_radius(params: SliderParams) -> float:
    """Largest center distance whose gap the guard still reads as contact
    (gap = contact_tol up to float rounding)."""
    r = params.half_side + params.contact_tol
    while (r - params.half_side) > params.contact_tol:
        r = math.nextafter(r, params.half_side)
    return r


def default_start(target: Sequence[float], params: SliderParams) -> HybridState:
    """Fixed benchmark start: slider at the origin, pusher resting at the
    -x face center (the recording-session start).

    The start is deliberately independent of the target. Demonstrations
    are recorded from this same state, so a demonstration-started solve
    replays its demo faithfully; a target-dependent placement would
    transplant recorded accelerations onto the wrong face geometry and
    shove the pusher straight off the slider.
    """
    del target  # same start for every request
    r = face_touch_radius(params)
    return HybridState(0.0, 0.0, 0.0, -r, 0.0, 0.0, 0.0)


def compute_errors(traj: Trajectory, target: Sequence[float]) -> Tuple[float, float, float]:
    final = traj.final_state()
    return (
        final.x - float(target[0]),
        final.y - float(target[1]),
        wrap_angle(final.theta - float(target[2])),
    )


def is_success(errors: Sequence[float]) -> bool:
    return (
        abs(errors[0]) < SUCCESS_XY_TOL
        and abs(errors[1]) < SUCCESS_XY_TOL
        and abs(errors[2]) < SUCCESS_THETA_TOL
    )


def _finish(req: PlanRequest, traj, report, demo_id=None, inner=None) -> PlanResult:
    errors = compute_errors(traj, req.target)
    return PlanResult(
        trajectory=traj,
        report=report,
        errors=errors,
        success=is_success(errors),
        method=req.method,
        selected_demo_id=demo_id,
        inner_reports=list(inner) if inner else [],
    )


def plan_zs(req: PlanRequest) -> PlanResult:
    """Plain DDP: reaching cost, zero-start control tape."""
    cost = ds_cost(target_state(req.target), req.weights)
    traj, report = solve(
        req.start_state(), np.zeros((req.T, 2)), cost, req.options, req.dt, req.params
    )
    return _finish(req, traj, report)


def plan_ds(req: PlanRequest, library: demolib.DemoLibrary) -> PlanResult:
    """Demonstration-started DDP: the selected demo's accelerations are the
    initial guess; the cost is the plain reaching assembly."""
    demo = demolib.select(req.target, library)
    aligned = demolib.resample(demo, req.T, req.dt)
    cost = ds_cost(target_state(req.target), req.weights)
    traj, report = solve(
        req.start_state(), aligned.refs.acc_refs, cost, req.options, req.dt, req.params
    )
    return _finish(req, traj, report, demo_id=demo.id)


def _dp_stage(req: PlanRequest, library: demolib.DemoLibrary):
    demo = demolib.select(req.target, library)
    aligned = demolib.resample(demo, req.T, req.dt)
    refs = aligned.refs
    refs.target = target_state(req.target)  # reach the requested pose, not the demo's
    cost = dp_cost(refs, req.weights)
    u0 = aligned.refs.acc_refs if req.dp_init == "demo" else np.zeros((req.T, 2))
    traj, report = solve(req.start_state(), u0, cost, req.options, req.dt, req.params)
    return demo, traj, report


def plan_dp(req: PlanRequest, library: demolib.DemoLibrary) -> PlanResult:
    """Demonstration-penalized DDP: guidance lives in the cost terms, the
    initial guess stays at zero."""
    demo, traj, report = _dp_stage(req, library)
    return _finish(req, traj, report, demo_id=demo.id)


def plan_ws(req: PlanRequest, library: demolib.DemoLibrary) -> PlanResult:
    """Warm-started DDP: the DP solution initializes a final solve under
    the plain reaching cost."""
    demo, dp_traj, dp_report = _dp_stage(req, library)
    cost = ds_cost(target_state(req.target), req.weights)
    traj, report = solve(
        req.start_state(), dp_traj.controls, cost, req.options, req.dt, req.params
    )
    return _finish(req, traj, report, demo_id=demo.id, inner=[dp_report])


def plan(req: PlanRequest, library: Optional[demolib.DemoLibrary] = None) -> PlanResult:
    """Dispatch a request to its pipeline. DS/DP/WS require a library."""
    if req.method == "ZS":
        return plan_zs(req)
    if library is None or len(library) == 0:
        raise demolib.EmptyLibraryError(f"method {req.method} requires demonstrations")
    if req.method == "DS":
        return plan_ds(req, library)
    if req.method == "DP":
        return plan_dp(req, library)
    return plan_ws(req, library)
