"""DDP solver over the hybrid pusher-slider rollout.

The backward pass linearizes the dynamics with the nominal contact-mode
sequence frozen, so value recursion is well defined across mode
boundaries. Forward passes re-roll the system with the guard active, which
is how the solver explores new mode sequences between iterations. Dynamics
second derivatives are dropped (Gauss-Newton / iLQR-style recursion).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .pushdyn import (
    ContactMode,
    HybridState,
    NonFiniteStateError,
    SliderParams,
    linearize,
    step,
)

__all__ = [
    "Trajectory",
    "CostModel",
    "SolverOptions",
    "SolveReport",
    "BackwardPassResult",
    "rollout",
    "eval_cost",
    "backward_pass",
    "forward_pass",
    "solve",
    "closed_loop_replay",
]

_FD_H = 1e-6


@dataclass
class Trajectory:
    """States (T+1, 7), controls (T, 2) and the modes used at each step."""

    states: np.ndarray
    controls: np.ndarray
    modes: Tuple[ContactMode, ...]
    dt: float
    total_cost: Optional[float] = None

    @property
    def horizon(self) -> int:
        return self.controls.shape[0]

    def state(self, t: int) -> HybridState:
        return HybridState(*self.states[t])

    def final_state(self) -> HybridState:
        return HybridState(*self.states[-1])


class CostModel:
    """Stage/terminal cost evaluator with derivative access.

    Subclasses override ``stage`` and ``terminal``; derivative methods fall
    back to central finite differences unless overridden with analytic
    forms.
    """

    def stage(self, x, u, t: int) -> float:
        raise NotImplementedError

    def terminal(self, x) -> float:
        raise NotImplementedError

    def stage_derivs(self, x, u, t: int):
        """Returns (lx, lu, lxx, luu, lux) at (x, u, t)."""
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        lx = _fd_grad(lambda xx: self.stage(xx, u, t), x)
        lu = _fd_grad(lambda uu: self.stage(x, uu, t), u)
        lxx = _fd_hess(lambda xx: self.stage(xx, u, t), x)
        luu = _fd_hess(lambda uu: self.stage(x, uu, t), u)
        lux = _fd_mixed(lambda xx, uu: self.stage(xx, uu, t), x, u)
        return lx, lu, lxx, luu, lux

    def terminal_derivs(self, x):
        """Returns (gx, gxx) at x."""
        x = np.asarray(x, dtype=float)
        gx = _fd_grad(self.terminal, x)
        gxx = _fd_hess(self.terminal, x)
        return gx, gxx


def _fd_grad(f, z):
    g = np.empty(z.size)
    for i in range(z.size):
        zp = z.copy()
        zm = z.copy()
        zp[i] += _FD_H
        zm[i] -= _FD_H
        g[i] = (f(zp) - f(zm)) / (2 * _FD_H)
    return g


def _fd_hess(f, z):
    n = z.size
    H = np.empty((n, n))
    f0 = f(z)
    for i in range(n):
        for j in range(i, n):
            zpp = z.copy()
            zpp[i] += _FD_H
            zpp[j] += _FD_H
            zpm = z.copy()
            zpm[i] += _FD_H
            zpm[j] -= _FD_H
            zmp = z.copy()
            zmp[i] -= _FD_H
            zmp[j] += _FD_H
            zmm = z.copy()
            zmm[i] -= _FD_H
            zmm[j] -= _FD_H
            H[i, j] = H[j, i] = (f(zpp) - f(zpm) - f(zmp) + f(zmm)) / (4 * _FD_H**2)
    return 0.5 * (H + H.T)


def _fd_mixed(f, x, u):
    # d^2 l / du dx, shape (len(u), len(x))
    M = np.empty((u.size, x.size))
    for i in range(u.size):
        for j in range(x.size):
            up = u.copy()
            um = u.copy()
            up[i] += _FD_H
            um[i] -= _FD_H
            xp = x.copy()
            xm = x.copy()
            xp[j] += _FD_H
            xm[j] -= _FD_H
            M[i, j] = (f(xp, up) - f(xm, up) - f(xp, um) + f(xm, um)) / (4 * _FD_H**2)
    return M


@dataclass(frozen=True)
class SolverOptions:
    max_iters: int = 100
    cost_tol: float = 1e-6
    reg_init: float = 1e-6
    reg_max: float = 1e10
    reg_scale: float = 10.0
    line_search_alphas: Tuple[float, ...] = (1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625)

    def __post_init__(self):
        if min(self.line_search_alphas) <= 0 or list(self.line_search_alphas) != sorted(
            self.line_search_alphas, reverse=True
        ):
            raise ValueError("line_search_alphas must be positive and descending")
        if min(self.max_iters, self.cost_tol, self.reg_init, self.reg_max, self.reg_scale) <= 0:
            raise ValueError("solver options must be positive")


@dataclass
class SolveReport:
    iterations: int
    cost_trace: list
    converged: bool
    termination_reason: str  # "tol" | "max_iters" | "reg_max"
    gains: np.ndarray  # (T, 2, 7)
    feedforward: np.ndarray  # (T, 2)

    def to_json_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "cost_trace": [float(c) for c in self.cost_trace],
            "converged": self.converged,
            "termination_reason": self.termination_reason,
        }


class BackwardPassResult(NamedTuple):
    feedforward: np.ndarray  # (T, 2)
    gains: np.ndarray  # (T, 2, 7)
    dv1: float  # sum k'Qu
    dv2: float  # sum 0.5 k'Quu k
    qu0: np.ndarray  # Qu at t=0, for gradient diagnostics

    def expected_decrease(self, alpha: float) -> float:
        return -(alpha * self.dv1 + alpha * alpha * self.dv2)


def rollout(
    x0: HybridState,
    controls: Sequence,
    dt: float,
    params: SliderParams,
    mode_schedule: Optional[Sequence[ContactMode]] = None,
    cost: Optional[CostModel] = None,
) -> Trajectory:
    """Roll the dynamics forward under a control sequence.

    Modes come from the guard unless a schedule is supplied. Raises
    NonFiniteStateError annotated with the failing timestep.
    """
    controls = np.asarray(controls, dtype=float)
    T = controls.shape[0]
    if T < 1:
        raise ValueError("controls must be non-empty")
    if mode_schedule is not None and len(mode_schedule) != T:
        raise ValueError("mode_schedule length must match controls")
    states = [x0]
    modes = []
    total = 0.0
    s = x0
    for t in range(T):
        u = (controls[t, 0], controls[t, 1])
        override = mode_schedule[t] if mode_schedule is not None else None
        try:
            s, mode = step(s, u, dt, params, mode_override=override)
        except NonFiniteStateError as e:
            raise NonFiniteStateError(f"rollout diverged at step {t}: {e}") from e
        states.append(s)
        modes.append(mode)
        if cost is not None:
            total += cost.stage(states[t], u, t)
    traj = Trajectory(np.array(states), controls.copy(), tuple(modes), dt)
    if cost is not None:
        traj.total_cost = total + cost.terminal(states[-1])
    return traj


def eval_cost(traj: Trajectory, cost: CostModel) -> float:
    total = 0.0
    for t in range(traj.horizon):
        total += cost.stage(traj.states[t], traj.controls[t], t)
    return total + cost.terminal(traj.states[-1])


def backward_pass(
    traj: Trajectory,
    cost: CostModel,
    reg: float,
    params: SliderParams,
) -> Optional[BackwardPassResult]:
    """Riccati-style value recursion along the frozen nominal mode sequence.

    Returns None when any regularized Quu fails its Cholesky factorization,
    in which case the caller escalates the regularization.
    """
    T = traj.horizon
    n, m = 7, 2
    ks = np.empty((T, m))
    Ks = np.empty((T, m, n))
    Vx, Vxx = cost.terminal_derivs(traj.states[-1])
    dv1 = 0.0
    dv2 = 0.0
    reg_eye = reg * np.eye(m)
    qu0 = None
    for t in range(T - 1, -1, -1):
        x = traj.state(t)
        u = traj.controls[t]
        A, B = linearize(x, u, traj.dt, params, traj.modes[t])
        lx, lu, lxx, luu, lux = cost.stage_derivs(traj.states[t], u, t)
        Qx = lx + A.T @ Vx
        Qu = lu + B.T @ Vx
        Qxx = lxx + A.T @ Vxx @ A
        Quu = luu + B.T @ Vxx @ B
        Qux = lux + B.T @ Vxx @ A
        Quu_reg = Quu + reg_eye
        Quu_reg = 0.5 * (Quu_reg + Quu_reg.T)
        try:
            L = np.linalg.cholesky(Quu_reg)
        except np.linalg.LinAlgError:
            return None
        rhs = np.column_stack([Qu, Qux])
        sol = np.linalg.solve(L.T, np.linalg.solve(L, rhs))
        k = -sol[:, 0]
        K = -sol[:, 1:]
        ks[t] = k
        Ks[t] = K
        dv1 += float(k @ Qu)
        dv2 += 0.5 * float(k @ Quu_reg @ k)
        Vx = Qx + K.T @ Quu_reg @ k + K.T @ Qu + Qux.T @ k
        Vxx = Qxx + K.T @ Quu_reg @ K + K.T @ Qux + Qux.T @ K
        Vxx = 0.5 * (Vxx + Vxx.T)
        if t == 0:
            qu0 = Qu
    return BackwardPassResult(ks, Ks, dv1, dv2, qu0)


def forward_pass(
    traj: Trajectory,
    gains: np.ndarray,
    feedforward: np.ndarray,
    alpha: float,
    cost: CostModel,
    dt: float,
    params: SliderParams,
) -> Optional[Trajectory]:
    """Closed-loop re-rollout u = u_hat + alpha*k + K (x - x_hat).

    Modes are re-selected by the guard, never frozen. Returns None when the
    rollout leaves the finite domain (caller rejects the candidate).
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must be in [0, 1]")
    T = traj.horizon
    states = [traj.state(0)]
    controls = np.empty_like(traj.controls)
    modes = []
    total = 0.0
    s = states[0]
    for t in range(T):
        dx = np.array(s) - traj.states[t]
        u = traj.controls[t] + alpha * feedforward[t] + gains[t] @ dx
        try:
            s, mode = step(s, (u[0], u[1]), dt, params)
        except NonFiniteStateError:
            return None
        controls[t] = u
        states.append(s)
        modes.append(mode)
        total += cost.stage(states[t], u, t)
    total += cost.terminal(states[-1])
    if not np.isfinite(total):
        return None
    return Trajectory(np.array(states), controls, tuple(modes), dt, total)


def solve(
    x0: HybridState,
    u_init: Sequence,
    cost: CostModel,
    opts: SolverOptions,
    dt: float,
    params: SliderParams,
) -> Tuple[Trajectory, SolveReport]:
    """Iterate backward/forward passes until convergence or breakdown.

    Regularization escalates multiplicatively on failed factorizations or
    rejected line searches; any strict cost decrease is accepted. The
    best-so-far trajectory is always returned together with a full report.
    """
    traj = rollout(x0, u_init, dt, params, cost=cost)
    T = traj.horizon
    trace = [traj.total_cost]
    ks = np.zeros((T, 2))
    Ks = np.zeros((T, 2, 7))
    reg = opts.reg_init
    converged = False
    reason = "max_iters"
    iterations = 0

    for _ in range(opts.max_iters):
        iterations += 1
        bp = None
        while bp is None:
            bp = backward_pass(traj, cost, reg, params)
            if bp is None:
                reg *= opts.reg_scale
                if reg > opts.reg_max:
                    break
        if bp is None:
            reason = "reg_max"
            break
        ks, Ks = bp.feedforward, bp.gains

        improvement = None
        for alpha in opts.line_search_alphas:
            cand = forward_pass(traj, Ks, ks, alpha, cost, dt, params)
            if cand is not None and cand.total_cost < traj.total_cost:
                improvement = traj.total_cost - cand.total_cost
                traj = cand
                reg = max(reg / opts.reg_scale, opts.reg_init)
                break
        trace.append(traj.total_cost)

        if improvement is not None:
            if improvement < opts.cost_tol:
                converged = True
                reason = "tol"
                break
        else:
            if abs(bp.expected_decrease(1.0)) < opts.cost_tol:
                converged = True
                reason = "tol"
                break
            reg *= opts.reg_scale
            if reg > opts.reg_max:
                reason = "reg_max"
                break

    # refresh gains around the returned nominal so stored feedback matches it
    final_bp = backward_pass(traj, cost, max(reg, opts.reg_init), params)
    if final_bp is not None:
        ks, Ks = final_bp.feedforward, final_bp.gains

    report = SolveReport(
        iterations=iterations,
        cost_trace=trace,
        converged=converged,
        termination_reason=reason,
        gains=Ks,
        feedforward=ks,
    )
    return traj, report


def closed_loop_replay(
    traj: Trajectory,
    report: SolveReport,
    x0: HybridState,
    params: SliderParams,
) -> Trajectory:
    """Replay the stored solution from a (possibly perturbed) start state,
    applying the stored feedforward and feedback gains."""
    T = traj.horizon
    states = [x0]
    controls = np.empty_like(traj.controls)
    modes = []
    s = x0
    for t in range(T):
        dx = np.array(s) - traj.states[t]
        u = traj.controls[t] + report.feedforward[t] + report.gains[t] @ dx
        s, mode = step(s, (u[0], u[1]), traj.dt, params)
        controls[t] = u
        states.append(s)
        modes.append(mode)
    return Trajectory(np.array(states), controls, tuple(modes), traj.dt)
