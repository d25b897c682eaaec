"""Demonstration-guided trajectory optimization for planar pushing."""

from .costlib import GuidanceRefs, Weights, dp_cost, ds_cost, f_cut
from .ddpcore import CostModel, SolverOptions, SolveReport, Trajectory, rollout, solve
from .demolib import DemoLibrary, Demonstration, load_library, resample, select
from .planners import PlanRequest, PlanResult, plan
from .pushdyn import ContactMode, HybridState, SliderParams, select_mode, step

__version__ = "0.1.0"

__all__ = [
    "ContactMode",
    "CostModel",
    "DemoLibrary",
    "Demonstration",
    "GuidanceRefs",
    "HybridState",
    "PlanRequest",
    "PlanResult",
    "SliderParams",
    "SolveReport",
    "SolverOptions",
    "Trajectory",
    "Weights",
    "dp_cost",
    "ds_cost",
    "f_cut",
    "load_library",
    "plan",
    "resample",
    "rollout",
    "select",
    "select_mode",
    "solve",
    "step",
]
