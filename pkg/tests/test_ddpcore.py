import numpy as np
import pytest

from oracles import lqr_solve
from pushddp.costlib import ds_cost
from pushddp.ddpcore import (
    CostModel,
    SolverOptions,
    backward_pass,
    closed_loop_replay,
    forward_pass,
    rollout,
    solve,
)
from pushddp.pushdyn import ContactMode, HybridState, SliderParams, step

DT = 0.05


class QuadraticCost(CostModel):
    """x'Qx + u'Ru stage, x'Qf x terminal, all relative to a target state."""

    def __init__(self, Q, R, Qf, target):
        self.Q, self.R, self.Qf = Q, R, Qf
        self.mu = np.asarray(target, dtype=float)

    def stage(self, x, u, t):
        z = np.asarray(x, dtype=float) - self.mu
        u = np.asarray(u, dtype=float)
        return float(z @ self.Q @ z + u @ self.R @ u)

    def terminal(self, x):
        z = np.asarray(x, dtype=float) - self.mu
        return float(z @ self.Qf @ z)

    def stage_derivs(self, x, u, t):
        z = np.asarray(x, dtype=float) - self.mu
        u = np.asarray(u, dtype=float)
        return (
            2 * self.Q @ z,
            2 * self.R @ u,
            2 * self.Q,
            2 * self.R,
            np.zeros((2, 7)),
        )

    def terminal_derivs(self, x):
        z = np.asarray(x, dtype=float) - self.mu
        return 2 * self.Qf @ z, 2 * self.Qf


def separation_lqr(T=40):
    """LQR problem on the exactly-linear separation dynamics."""
    params = SliderParams()
    x0 = HybridState(0.0, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0)
    target = np.array([0.0, 0.0, 0.0, 0.62, 0.55, 0.0, 0.0])
    Q = np.zeros((7, 7))
    R = 0.5 * np.eye(2)
    Qf = np.diag([0.0, 0.0, 0.0, 60.0, 60.0, 2.0, 2.0])
    cost = QuadraticCost(Q, R, Qf, target)
    # discrete dynamics of the separation branch at theta = 0
    A = np.eye(7)
    A[3, 5] = DT
    A[4, 6] = DT
    B = np.zeros((7, 2))
    B[3, 0] = DT * DT
    B[4, 1] = DT * DT
    B[5, 0] = DT
    B[6, 1] = DT
    return params, x0, target, cost, A, B, Q, R, Qf, T


class TestRollout:
    def test_static_pusher_fixed_point(self, params):
        x0 = HybridState(0.0, 0.0, 0.0, 0.3, 0.0, 0.0, 0.0)
        traj = rollout(x0, np.zeros((10, 2)), DT, params)
        assert np.all(traj.states == traj.states[0])
        assert all(m == ContactMode.separation() for m in traj.modes)

    def test_single_step_consistency(self, params):
        x0 = HybridState(0.0, 0.0, 0.1, -0.052, 0.01, 0.03, 0.0)
        u = np.array([[0.2, -0.1]])
        traj = rollout(x0, u, DT, params)
        ns, mode = step(x0, u[0], DT, params)
        assert traj.states[1] == pytest.approx(np.array(ns), abs=0)
        assert traj.modes[0] == mode

    def test_mode_schedule_replay_is_exact(self, params):
        x0 = HybridState(0.0, 0.0, 0.0, -0.0505, 0.01, 0.05, 0.0)
        rng = np.random.default_rng(5)
        us = rng.uniform(-0.3, 0.3, size=(40, 2))
        traj = rollout(x0, us, DT, params)
        replay = rollout(x0, us, DT, params, mode_schedule=traj.modes)
        assert np.array_equal(traj.states, replay.states)

    def test_empty_controls_rejected(self, params):
        with pytest.raises(ValueError):
            rollout(HybridState(0, 0, 0, 0.3, 0, 0, 0), np.zeros((0, 2)), DT, params)


class TestBackwardPass:
    def test_gains_match_riccati(self):
        params, x0, target, cost, A, B, Q, R, Qf, T = separation_lqr()
        traj = rollout(x0, np.zeros((T, 2)), DT, params, cost=cost)
        bp = backward_pass(traj, cost, 0.0, params)
        assert bp is not None
        Ks_ric, _, _, _ = lqr_solve(A, B, Q, R, Qf, np.array(x0) - target, T)
        for t in range(T):
            assert np.allclose(bp.gains[t], -Ks_ric[t], atol=1e-8)

    def test_large_reg_shrinks_feedforward(self):
        params, x0, target, cost, *_ , T = separation_lqr()
        traj = rollout(x0, np.full((T, 2), 0.1), DT, params, cost=cost)
        norms = []
        for reg in (1e2, 1e4, 1e6):
            bp = backward_pass(traj, cost, reg, params)
            norms.append(float(np.linalg.norm(bp.feedforward)))
        assert norms[0] > norms[1] > norms[2]

    def test_zero_feedforward_at_optimum(self):
        params, x0, target, cost, A, B, Q, R, Qf, T = separation_lqr()
        _, _, us_opt, _ = lqr_solve(A, B, Q, R, Qf, np.array(x0) - target, T)
        traj = rollout(x0, us_opt, DT, params, cost=cost)
        bp = backward_pass(traj, cost, 0.0, params)
        assert np.max(np.abs(bp.feedforward)) < 1e-10

    def test_gradient_check_against_finite_differences(self):
        # with huge regularization the value recursion degenerates to the
        # plain chain rule, so Qu at t=0 is the open-loop cost gradient
        params, x0, target, cost, *_ , T = separation_lqr(T=15)
        rng = np.random.default_rng(11)
        us = rng.uniform(-0.4, 0.4, size=(T, 2))
        traj = rollout(x0, us, DT, params, cost=cost)
        bp = backward_pass(traj, cost, 1e12, params)
        eps = 1e-6
        fd = np.empty(2)
        for i in range(2):
            up = us.copy()
            um = us.copy()
            up[0, i] += eps
            um[0, i] -= eps
            cp = rollout(x0, up, DT, params, cost=cost).total_cost
            cm = rollout(x0, um, DT, params, cost=cost).total_cost
            fd[i] = (cp - cm) / (2 * eps)
        rel = np.abs(bp.qu0 - fd) / np.maximum(np.abs(fd), 1e-9)
        assert rel.max() <= 1e-4


class TestForwardPass:
    def test_alpha_zero_reproduces_nominal(self, params):
        x0 = HybridState(0.0, 0.0, 0.0, -0.0505, 0.0, 0.04, 0.0)
        us = np.full((20, 2), 0.05)
        cost = ds_cost((0.1, 0.0, 0.0))
        traj = rollout(x0, us, DT, params, cost=cost)
        gains = np.random.default_rng(0).normal(size=(20, 2, 7))
        ff = np.random.default_rng(1).normal(size=(20, 2))
        cand = forward_pass(traj, gains, ff, 0.0, cost, DT, params)
        assert np.array_equal(cand.states, traj.states)
        assert cand.total_cost == traj.total_cost

    def test_lqr_alpha_one_reaches_optimum(self):
        params, x0, target, cost, A, B, Q, R, Qf, T = separation_lqr()
        traj = rollout(x0, np.zeros((T, 2)), DT, params, cost=cost)
        bp = backward_pass(traj, cost, 0.0, params)
        cand = forward_pass(traj, bp.gains, bp.feedforward, 1.0, cost, DT, params)
        _, opt_cost, _, _ = lqr_solve(A, B, Q, R, Qf, np.array(x0) - target, T)
        assert cand.total_cost == pytest.approx(opt_cost, abs=1e-8)

    def test_descent_when_expected_decrease_positive(self):
        params, x0, target, cost, *_ , T = separation_lqr(T=25)
        rng = np.random.default_rng(3)
        for _ in range(10):
            us = rng.uniform(-0.5, 0.5, size=(T, 2))
            traj = rollout(x0, us, DT, params, cost=cost)
            bp = backward_pass(traj, cost, 1e-6, params)
            if bp.expected_decrease(1.0) <= 1e-12:
                continue
            improved = False
            for alpha in SolverOptions().line_search_alphas:
                cand = forward_pass(traj, bp.gains, bp.feedforward, alpha, cost, DT, params)
                if cand is not None and cand.total_cost < traj.total_cost:
                    improved = True
                    break
            assert improved


class TestSolve:
    def test_lqr_converges_in_two_iterations(self):
        params, x0, target, cost, A, B, Q, R, Qf, T = separation_lqr()
        traj, report = solve(x0, np.zeros((T, 2)), cost, SolverOptions(), DT, params)
        _, opt_cost, _, _ = lqr_solve(A, B, Q, R, Qf, np.array(x0) - target, T)
        assert report.converged
        assert report.iterations <= 2
        assert traj.total_cost == pytest.approx(opt_cost, abs=1e-8)

    def test_already_optimal_single_iteration(self):
        params, x0, target, cost, A, B, Q, R, Qf, T = separation_lqr()
        _, _, us_opt, _ = lqr_solve(A, B, Q, R, Qf, np.array(x0) - target, T)
        traj, report = solve(x0, us_opt, cost, SolverOptions(), DT, params)
        assert report.converged
        assert report.iterations == 1
        assert report.termination_reason == "tol"

    def test_cost_trace_monotone_on_pushing_problems(self, params):
        rng = np.random.default_rng(17)
        opts = SolverOptions(max_iters=15)
        for _ in range(20):
            tx = rng.uniform(-0.15, 0.15)
            ty = rng.uniform(-0.15, 0.15)
            tth = rng.uniform(-1.5, 1.5)
            x0 = HybridState(0, 0, 0, -0.051, rng.uniform(-0.02, 0.02), 0, 0)
            cost = ds_cost((tx, ty, tth))
            traj, report = solve(x0, np.zeros((50, 2)), cost, opts, DT, params)
            trace = report.cost_trace
            assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))

    def test_determinism(self, params):
        x0 = HybridState(0, 0, 0, -0.051, 0.01, 0, 0)
        cost = ds_cost((0.1, 0.05, 0.3))
        opts = SolverOptions(max_iters=10)
        u0 = np.zeros((40, 2))
        t1, r1 = solve(x0, u0, cost, opts, DT, params)
        t2, r2 = solve(x0, u0, cost, opts, DT, params)
        assert np.array_equal(t1.states, t2.states)
        assert np.array_equal(t1.controls, t2.controls)
        assert r1.cost_trace == r2.cost_trace
        assert np.array_equal(r1.gains, r2.gains)

    def test_feedback_beats_open_loop(self, params):
        x0 = HybridState(0, 0, 0, -0.051, 0.0, 0, 0)
        target = (0.12, 0.0, 0.0)
        cost = ds_cost(target)
        traj, report = solve(x0, np.zeros((60, 2)), cost, SolverOptions(max_iters=40), DT, params)
        rng = np.random.default_rng(23)
        wins = 0
        trials = 20
        for _ in range(trials):
            delta = rng.uniform(-1e-3, 1e-3, size=7)
            xp = HybridState(*(np.array(x0) + delta))
            open_traj = rollout(xp, traj.controls, DT, params)
            closed = closed_loop_replay(traj, report, xp, params)

            def pose_err(tr):
                e = np.array(tr.states[-1][:3]) - np.array(target)
                return float(np.linalg.norm(e))

            if pose_err(closed) <= pose_err(open_traj) + 1e-12:
                wins += 1
        assert wins >= int(0.9 * trials)
