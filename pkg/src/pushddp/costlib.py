"""Cost terms and assemblies for the pushing planners.

Two assemblies are provided: the plain reaching cost (terminal quadratic
plus control regularizer and soft control-bound penalty) and the
demonstration-guided cost that additionally tracks demonstrated pusher
velocities, accelerations and face-switch waypoints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .ddpcore import CostModel

__all__ = ["Weights", "GuidanceRefs", "f_cut", "ds_cost", "dp_cost", "target_state"]


def _default_qt():
    return np.diag([200.0, 200.0, 100.0, 0.0, 0.0, 0.0, 0.0])


def _default_qn():
    return np.diag([0.0, 0.0, 0.0, 50.0, 50.0, 0.0, 0.0])


@dataclass
class Weights:
    """Weight matrices for the cost assemblies. All symmetric PSD, R PD."""

    Q_T: np.ndarray = field(default_factory=_default_qt)
    R: np.ndarray = field(default_factory=lambda: 1e-2 * np.eye(2))
    Q_f: np.ndarray = field(default_factory=lambda: 1e2 * np.eye(2))
    u_l: float = 1.0
    Q_n: np.ndarray = field(default_factory=_default_qn)
    R_dv: np.ndarray = field(default_factory=lambda: 1e-1 * np.eye(2))
    R_du: np.ndarray = field(default_factory=lambda: 1e-2 * np.eye(2))

    def validate(self) -> "Weights":
        for name, M, dim in (
            ("Q_T", self.Q_T, 7),
            ("R", self.R, 2),
            ("Q_f", self.Q_f, 2),
            ("Q_n", self.Q_n, 7),
            ("R_dv", self.R_dv, 2),
            ("R_du", self.R_du, 2),
        ):
            M = np.asarray(M, dtype=float)
            if M.shape != (dim, dim) or not np.allclose(M, M.T):
                raise ValueError(f"{name} must be a symmetric {dim}x{dim} matrix")
            if np.linalg.eigvalsh(M).min() < -1e-10:
                raise ValueError(f"{name} must be positive semidefinite")
        if np.linalg.eigvalsh(np.asarray(self.R)).min() <= 0:
            raise ValueError("R must be positive definite")
        if self.u_l <= 0:
            raise ValueError("u_l must be positive")
        return self


def target_state(pose: Sequence[float]) -> np.ndarray:
    """Pad a slider pose target with a zero pusher block (position and
    velocity are unweighted by default)."""
    x, y, th = (float(v) for v in pose)
    return np.array([x, y, th, 0.0, 0.0, 0.0, 0.0])


@dataclass
class GuidanceRefs:
    """References extracted from a demonstration, aligned to the solver grid."""

    target: np.ndarray  # (7,) full-state target, zero pusher-velocity block
    switch_states: List[Tuple[int, np.ndarray]]
    vel_refs: np.ndarray  # (T, 2)
    acc_refs: np.ndarray  # (T, 2)

    def __post_init__(self):
        steps = [t for t, _ in self.switch_states]
        if steps != sorted(set(steps)):
            raise ValueError("switch timesteps must be strictly increasing")
        T = self.vel_refs.shape[0]
        if self.acc_refs.shape[0] != T:
            raise ValueError("vel_refs and acc_refs must have equal length")
        if steps and not (0 <= steps[0] and steps[-1] <= T - 1):
            raise ValueError("switch timesteps must lie in [0, T-1]")


def f_cut(u: Sequence[float], u_l: float) -> np.ndarray:
    """Soft-threshold (dead-zone shrinkage) of a control: zero inside the
    box [-u_l, u_l], linear overshoot outside."""
    if u_l <= 0:
        raise ValueError("u_l must be positive")
    u = np.asarray(u, dtype=float)
    return np.sign(u) * np.maximum(np.abs(u) - u_l, 0.0)


class _ReachingCost(CostModel):
    """Terminal quadratic to the target plus control regularizer and
    soft control-bound penalty. Analytic derivatives; the dead-zone kink
    uses a zero subgradient so luu stays PSD."""

    def __init__(self, target: np.ndarray, w: Weights):
        self.target = np.asarray(target, dtype=float)
        if self.target.shape != (7,):
            raise ValueError("target must be a 7-vector")
        self.w = w
        self._R = np.asarray(w.R, dtype=float)
        self._Qf = np.asarray(w.Q_f, dtype=float)
        self._QT = np.asarray(w.Q_T, dtype=float)
        self._ul = float(w.u_l)

    def stage(self, x, u, t):
        ux, uy = float(u[0]), float(u[1])
        R = self._R
        c = R[0, 0] * ux * ux + 2.0 * R[0, 1] * ux * uy + R[1, 1] * uy * uy
        cx = _cut(ux, self._ul)
        cy = _cut(uy, self._ul)
        if cx != 0.0 or cy != 0.0:
            Qf = self._Qf
            c += Qf[0, 0] * cx * cx + 2.0 * Qf[0, 1] * cx * cy + Qf[1, 1] * cy * cy
        return c

    def terminal(self, x):
        e = self.target - np.asarray(x, dtype=float)
        return float(e @ self._QT @ e)

    def stage_derivs(self, x, u, t):
        u = np.asarray(u, dtype=float)
        cut = f_cut(u, self._ul)
        active = np.abs(u) > self._ul
        D = np.diag(active.astype(float))
        lu = 2.0 * self._R @ u + 2.0 * D @ self._Qf @ cut
        luu = 2.0 * self._R + 2.0 * D @ self._Qf @ D
        lx = np.zeros(7)
        lxx = np.zeros((7, 7))
        lux = np.zeros((2, 7))
        return lx, lu, lxx, luu, lux

    def terminal_derivs(self, x):
        e = self.target - np.asarray(x, dtype=float)
        return -2.0 * self._QT @ e, 2.0 * self._QT


def _cut(v: float, ul: float) -> float:
    if v > ul:
        return v - ul
    if v < -ul:
        return v + ul
    return 0.0


class _GuidedCost(_ReachingCost):
    """Reaching cost plus demonstration guidance: velocity and acceleration
    tracking at every stage and switch-state anchoring at the demonstrated
    face-switch timesteps."""

    def __init__(self, refs: GuidanceRefs, w: Weights):
        super().__init__(refs.target, w)
        self.refs = refs
        self._Rdv = np.asarray(w.R_dv, dtype=float)
        self._Rdu = np.asarray(w.R_du, dtype=float)
        self._Qn = np.asarray(w.Q_n, dtype=float)
        self._switch: Dict[int, np.ndarray] = {
            int(t): np.asarray(mu, dtype=float) for t, mu in refs.switch_states
        }
        self._T = refs.vel_refs.shape[0]

    def stage(self, x, u, t):
        c = super().stage(x, u, t)
        vref = self.refs.vel_refs[t]
        dv = (vref[0] - float(x[5]), vref[1] - float(x[6]))
        Rdv = self._Rdv
        c += Rdv[0, 0] * dv[0] * dv[0] + 2.0 * Rdv[0, 1] * dv[0] * dv[1] + Rdv[1, 1] * dv[1] * dv[1]
        aref = self.refs.acc_refs[t]
        du = (aref[0] - float(u[0]), aref[1] - float(u[1]))
        Rdu = self._Rdu
        c += Rdu[0, 0] * du[0] * du[0] + 2.0 * Rdu[0, 1] * du[0] * du[1] + Rdu[1, 1] * du[1] * du[1]
        mu = self._switch.get(t)
        if mu is not None:
            e = mu - np.asarray(x, dtype=float)
            c += float(e @ self._Qn @ e)
        return c

    def stage_derivs(self, x, u, t):
        lx, lu, lxx, luu, lux = super().stage_derivs(x, u, t)
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        dv = self.refs.vel_refs[t] - x[5:7]
        lx = lx.copy()
        lx[5:7] -= 2.0 * self._Rdv @ dv
        lxx = lxx.copy()
        lxx[5:7, 5:7] += 2.0 * self._Rdv
        du = self.refs.acc_refs[t] - u
        lu = lu - 2.0 * self._Rdu @ du
        luu = luu + 2.0 * self._Rdu
        mu = self._switch.get(t)
        if mu is not None:
            lx -= 2.0 * self._Qn @ (mu - x)
            lxx = lxx + 2.0 * self._Qn
        return lx, lu, lxx, luu, lux


def ds_cost(target, weights: Optional[Weights] = None) -> CostModel:
    """Reaching + regularizer + bound-penalty cost. target is a slider pose
    (3,) or a full state (7,)."""
    w = (weights or Weights()).validate()
    target = np.asarray(target, dtype=float)
    if target.shape == (3,):
        target = target_state(target)
    return _ReachingCost(target, w)


def dp_cost(refs: GuidanceRefs, weights: Optional[Weights] = None) -> CostModel:
    """Demonstration-penalized cost: the reaching assembly plus switch,
    velocity and acceleration guidance terms."""
    w = (weights or Weights()).validate()
    return _GuidedCost(refs, w)
