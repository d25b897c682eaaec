"""Independent reference implementations used to cross-check the package.

Everything here deliberately avoids the solution paths it verifies: the
contact oracle minimizes constraint residuals by dense grid search plus
pattern refinement instead of solving linear systems, and the LQR oracle
is a plain Riccati recursion.
"""

import math

import numpy as np


def _limit_matrix(params):
    a = 1.0 / params.f_max**2
    b = 1.0 / params.m_max**2
    return a, b


def _cmat(r, params):
    a, b = _limit_matrix(params)
    rx, ry = r
    return np.array([[a + b * ry * ry, -b * rx * ry],
                     [-b * rx * ry, a + b * rx * rx]])


def _pattern_search(fun, x0, radius, rounds=70):
    x = np.asarray(x0, dtype=float)
    best = fun(x)
    n = x.size
    dirs = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        dirs.append(e)
        dirs.append(-e)
    if n == 2:
        for sx in (1, -1):
            for sy in (1, -1):
                dirs.append(np.array([sx, sy], dtype=float))
    for _ in range(rounds):
        moved = False
        for d in dirs:
            cand = x + radius * d
            val = fun(cand)
            if val < best:
                x, best = cand, val
                moved = True
        if not moved:
            radius *= 0.5
    return x


def contact_force_bruteforce(contact_point, normal, tangent, v_p, mode, params):
    """Minimize the contact-mode constraint residual over the force by search.

    Returns the body-frame force vector (fx, fy). mode is "stick",
    "slide_up" or "slide_down".
    """
    C = _cmat(contact_point, params)
    n = np.asarray(normal, dtype=float)
    t = np.asarray(tangent, dtype=float)
    v = np.asarray(v_p, dtype=float)
    fscale = max(float(np.linalg.norm(v)), 1e-4) * params.f_max**2 * 1.5

    if mode == "stick":
        def resid(f):
            r = C @ f - v
            return float(r @ r)

        grid = np.linspace(-fscale, fscale, 41)
        best, bval = None, math.inf
        for fx in grid:
            for fy in grid:
                val = resid(np.array([fx, fy]))
                if val < bval:
                    best, bval = np.array([fx, fy]), val
        spacing = grid[1] - grid[0]
        return _pattern_search(resid, best, spacing)

    s = 1.0 if mode == "slide_up" else -1.0
    d = -n + s * params.mu_contact * t

    def resid1(fn):
        f = fn[0] * d
        return float((n @ (C @ f) - n @ v) ** 2)

    grid = np.linspace(-fscale, fscale, 201)
    vals = [resid1(np.array([g])) for g in grid]
    best = np.array([grid[int(np.argmin(vals))]])
    fn = _pattern_search(resid1, best, grid[1] - grid[0])
    return fn[0] * d


def contact_twist_from_force(contact_point, force_xy, params):
    """Limit-surface twist induced by a body-frame contact force."""
    a, b = _limit_matrix(params)
    rx, ry = contact_point
    fx, fy = force_xy
    return np.array([a * fx, a * fy, b * (rx * fy - ry * fx)])


def lqr_solve(A, B, Q, R, Qf, x0, T):
    """Finite-horizon discrete LQR via Riccati recursion.

    Cost: x_T' Qf x_T + sum_t (x_t' Q x_t + u_t' R u_t). Returns the gain
    sequence (u = -K x), the optimal cost from x0, and the optimal controls.
    """
    n = A.shape[0]
    P = Qf.copy()
    Ks = [None] * T
    for t in range(T - 1, -1, -1):
        G = R + B.T @ P @ B
        Ks[t] = np.linalg.solve(G, B.T @ P @ A)
        P = Q + A.T @ P @ A - A.T @ P @ B @ Ks[t]
        P = 0.5 * (P + P.T)
    cost = float(x0 @ P @ x0)
    xs = [np.asarray(x0, dtype=float)]
    us = []
    for t in range(T):
        u = -Ks[t] @ xs[-1]
        us.append(u)
        xs.append(A @ xs[-1] + B @ u)
    return Ks, cost, np.array(us), np.array(xs)
