"""Quasi-static hybrid dynamics of a point pusher and a square slider.

The slider rests on a horizontal surface and is moved through frictional
contact with a single point pusher. Ground friction is modelled with an
ellipsoidal limit surface: the slider body twist is proportional to the
contact wrench, ``twist = A @ wrench`` with ``A = diag(1/f_max^2, 1/f_max^2,
1/m_max^2)``. Each of the four faces supports sticking and two sliding
modes; together with a separation mode this gives 13 interaction modes.

Conventions:
  - slider pose (x, y, theta) in the world frame, theta in (-pi, pi]
  - pusher position (px, py) in the slider body frame
  - pusher velocity (vx, vy) and acceleration control in the world frame
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

__all__ = [
    "SliderParams",
    "HybridState",
    "ContactMode",
    "ContactSolution",
    "FaceContact",
    "NoPushError",
    "DegenerateContactError",
    "NonFiniteStateError",
    "FACE_NAMES",
    "ALL_MODES",
    "wrap_angle",
    "active_face",
    "contact_solve",
    "select_mode",
    "step",
    "linearize",
]

# Outward normals and tangents (normal rotated +90 degrees) of the four
# faces, indexed 0..3 = +x, +y, -x, -y.
_NORMALS = ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))
_TANGENTS = ((0.0, 1.0), (-1.0, 0.0), (0.0, -1.0), (1.0, 0.0))
FACE_NAMES = ("+x", "+y", "-x", "-y")


class NoPushError(Exception):
    """Contact solve produced a tensile normal force (pusher pulling)."""


class DegenerateContactError(Exception):
    """Contact system singular beyond tolerance; parameters are corrupt."""


class NonFiniteStateError(Exception):
    """Integration produced a non-finite state component."""


@dataclass(frozen=True)
class SliderParams:
    """Physical parameters of the pusher-slider system."""

    half_side: float = 0.05
    mu_ground: float = 0.35
    mu_contact: float = 0.3
    mass: float = 0.5
    gravity: float = 9.81
    # torsional-friction length scale; 0.9*half_side keeps single-face
    # rotation slow enough that large reorientations need face switching
    char_len: Optional[float] = None
    contact_tol: float = 1e-3

    def __post_init__(self):
        if self.char_len is None:
            object.__setattr__(self, "char_len", 0.9 * self.half_side)
        if not (self.half_side > 0 and self.mu_ground > 0 and self.mass > 0):
            raise ValueError("half_side, mu_ground and mass must be positive")
        if self.mu_contact < 0 or self.contact_tol <= 0 or self.char_len <= 0:
            raise ValueError("mu_contact must be >= 0, tolerances positive")

    @property
    def f_max(self) -> float:
        return self.mu_ground * self.mass * self.gravity

    @property
    def m_max(self) -> float:
        return self.char_len * self.f_max


class HybridState(NamedTuple):
    """Flat 7-component state: slider pose, pusher position, pusher velocity."""

    x: float
    y: float
    theta: float
    px: float
    py: float
    vx: float
    vy: float

    @property
    def slider_pose(self):
        return (self.x, self.y, self.theta)

    @property
    def pusher_pos(self):
        return (self.px, self.py)

    @property
    def pusher_vel(self):
        return (self.vx, self.vy)

    @classmethod
    def from_array(cls, arr: Sequence[float]) -> "HybridState":
        return cls(*(float(v) for v in arr))


class ContactMode(NamedTuple):
    """One of the 13 interaction modes.

    kind is "ST" (sticking), "SU" (sliding up), "SD" (sliding down) or
    "SE" (separation); face indexes the contact face for the first three
    and is None for separation.
    """

    kind: str
    face: Optional[int]

    @classmethod
    def sticking(cls, face: int) -> "ContactMode":
        return cls("ST", _check_face(face))

    @classmethod
    def sliding_up(cls, face: int) -> "ContactMode":
        return cls("SU", _check_face(face))

    @classmethod
    def sliding_down(cls, face: int) -> "ContactMode":
        return cls("SD", _check_face(face))

    @classmethod
    def separation(cls) -> "ContactMode":
        return cls("SE", None)

    @property
    def in_contact(self) -> bool:
        return self.kind != "SE"

    def token(self) -> str:
        if self.kind == "SE":
            return "SE"
        return self.kind + FACE_NAMES[self.face]

    @classmethod
    def from_token(cls, tok: str) -> "ContactMode":
        if tok == "SE":
            return cls.separation()
        kind, face_tok = tok[:2], tok[2:]
        if kind not in ("ST", "SU", "SD") or face_tok not in FACE_NAMES:
            raise ValueError(f"not a contact-mode token: {tok!r}")
        return cls(kind, FACE_NAMES.index(face_tok))


def _check_face(face: int) -> int:
    if face not in (0, 1, 2, 3):
        raise ValueError(f"face must be in 0..3, got {face}")
    return face


SEPARATION = ContactMode.separation()

ALL_MODES = tuple(
    ContactMode(kind, face) for kind in ("ST", "SU", "SD") for face in range(4)
) + (SEPARATION,)


class FaceContact(NamedTuple):
    """Geometry of the face nearest to a pusher position (body frame)."""

    face: int
    contact_point: tuple
    normal: tuple
    tangent: tuple
    gap: float


class ContactSolution(NamedTuple):
    """Slider twist and contact force for one contact mode.

    body_twist is (vbx, vby, omega) in the slider body frame. force is
    (f_n, f_t): inward normal component (>= 0 when pushing) and tangential
    component along the face tangent. slip is the tangential velocity of
    the pusher relative to the contact point.
    """

    body_twist: tuple
    force: tuple
    slip: float


def wrap_angle(theta: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    t = math.fmod(theta + math.pi, 2.0 * math.pi)
    if t <= 0.0:
        t += 2.0 * math.pi
    return t - math.pi


def active_face(pusher_pos: Sequence[float], params: SliderParams) -> Optional[FaceContact]:
    """Nearest face of the square to a body-frame pusher position.

    The face whose surface segment is closest is returned, with the signed
    normal gap (positive outside) and the pusher position projected onto
    the face (tangential coordinate clamped to the face extent). Returns
    None only in the ambiguous corner pocket: pusher within contact_tol of
    the face plane but beyond the face end by more than contact_tol, where
    attributing contact to the face would invent a corner push.
    """
    px, py = float(pusher_pos[0]), float(pusher_pos[1])
    h = params.half_side
    best_face = -1
    best_dist = math.inf
    best_dn = 0.0
    best_tc = 0.0
    for face in range(4):
        nx, ny = _NORMALS[face]
        tx, ty = _TANGENTS[face]
        dn = nx * px + ny * py - h
        tc = tx * px + ty * py
        over = abs(tc) - h
        dist = math.hypot(dn, over) if over > 0.0 else abs(dn)
        if dist < best_dist:
            best_face, best_dist, best_dn, best_tc = face, dist, dn, tc
    over = abs(best_tc) - h
    if over > params.contact_tol and abs(best_dn) <= params.contact_tol:
        return None
    nx, ny = _NORMALS[best_face]
    tx, ty = _TANGENTS[best_face]
    tc = min(max(best_tc, -h), h)
    cp = (h * nx + tc * tx, h * ny + tc * ty)
    return FaceContact(best_face, cp, (nx, ny), (tx, ty), best_dn)


def _limit_coeffs(params: SliderParams) -> tuple:
    a = 1.0 / (params.f_max * params.f_max)
    b = 1.0 / (params.m_max * params.m_max)
    return a, b


def _contact_matrix(rx: float, ry: float, a: float, b: float) -> tuple:
    # C = J A J^T for J = [[1, 0, -ry], [0, 1, rx]]
    return a + b * ry * ry, -b * rx * ry, a + b * rx * rx


def contact_solve(
    contact_point: Sequence[float],
    normal: Sequence[float],
    tangent: Sequence[float],
    pusher_vel_body: Sequence[float],
    mode: str,
    params: SliderParams,
) -> ContactSolution:
    """Solve one frozen contact mode for force and slider twist.

    mode is "stick", "slide_up" or "slide_down". Sticking matches the full
    contact-point velocity to the pusher velocity; sliding fixes the force
    on the friction-cone edge and matches only the normal component.

    Raises NoPushError when the solved normal force is tensile and
    DegenerateContactError when the contact system is singular.
    """
    rx, ry = float(contact_point[0]), float(contact_point[1])
    nx, ny = float(normal[0]), float(normal[1])
    tx, ty = float(tangent[0]), float(tangent[1])
    vpx, vpy = float(pusher_vel_body[0]), float(pusher_vel_body[1])
    a, b = _limit_coeffs(params)
    c00, c01, c11 = _contact_matrix(rx, ry, a, b)

    if mode == "stick":
        det = c00 * c11 - c01 * c01
        if abs(det) < 1e-12:
            raise DegenerateContactError(f"contact matrix singular, det={det}")
        fx = (c11 * vpx - c01 * vpy) / det
        fy = (c00 * vpy - c01 * vpx) / det
        f_n = -(fx * nx + fy * ny)
        if f_n < 0.0:
            raise NoPushError("sticking solve requires a tensile normal force")
        f_t = fx * tx + fy * ty
        slip = 0.0
    elif mode in ("slide_up", "slide_down"):
        s = 1.0 if mode == "slide_up" else -1.0
        mu = params.mu_contact
        dx = -nx + s * mu * tx
        dy = -ny + s * mu * ty
        denom = nx * (c00 * dx + c01 * dy) + ny * (c01 * dx + c11 * dy)
        if abs(denom) < 1e-12:
            raise DegenerateContactError(f"sliding solve singular, denom={denom}")
        f_n = (nx * vpx + ny * vpy) / denom
        if f_n < 0.0:
            raise NoPushError("sliding solve requires a tensile normal force")
        fx = f_n * dx
        fy = f_n * dy
        f_t = s * mu * f_n
        vcx = c00 * fx + c01 * fy
        vcy = c01 * fx + c11 * fy
        slip = (vpx - vcx) * tx + (vpy - vcy) * ty
    else:
        raise ValueError(f"unknown contact mode {mode!r}")

    tau = rx * fy - ry * fx
    twist = (a * fx, a * fy, b * tau)
    return ContactSolution(twist, (f_n, f_t), slip)


def _body_pusher_vel(theta: float, vx: float, vy: float) -> tuple:
    c, s = math.cos(theta), math.sin(theta)
    return c * vx + s * vy, -s * vx + c * vy


def _resolve_guard(px, py, vbx, vby, params):
    """Mode guard plus the solution to use. Returns (mode, sol, face_contact)."""
    fc = active_face((px, py), params)
    if fc is None or fc.gap > params.contact_tol:
        return SEPARATION, None, fc
    mu = params.mu_contact
    try:
        stick = contact_solve(fc.contact_point, fc.normal, fc.tangent,
                              (vbx, vby), "stick", params)
    except NoPushError:
        return SEPARATION, None, fc
    f_n, f_t = stick.force
    if abs(f_t) <= mu * f_n + 1e-9:
        return ContactMode.sticking(fc.face), stick, fc
    slide = "slide_up" if f_t > 0.0 else "slide_down"
    sign = 1.0 if f_t > 0.0 else -1.0
    try:
        sol = contact_solve(fc.contact_point, fc.normal, fc.tangent,
                            (vbx, vby), slide, params)
    except NoPushError:
        sol = None
    if sol is not None and sol.slip * sign > 0.0:
        mode = ContactMode.sliding_up(fc.face) if sign > 0 else ContactMode.sliding_down(fc.face)
        return mode, sol, fc
    # Slip direction inconsistent with the cone violation: deterministic
    # tie-break to sticking with the tangential force clamped to the cone.
    return ContactMode.sticking(fc.face), _clamp_to_cone(stick, fc, params), fc


def _clamp_to_cone(stick: ContactSolution, fc: FaceContact, params: SliderParams) -> ContactSolution:
    f_n, f_t = stick.force
    lim = params.mu_contact * f_n
    if abs(f_t) <= lim:
        return stick
    f_t = lim if f_t > 0.0 else -lim
    nx, ny = fc.normal
    tx, ty = fc.tangent
    fx = -f_n * nx + f_t * tx
    fy = -f_n * ny + f_t * ty
    a, b = _limit_coeffs(params)
    rx, ry = fc.contact_point
    twist = (a * fx, a * fy, b * (rx * fy - ry * fx))
    slip = 0.0  # sticking semantics after the clamp
    return ContactSolution(twist, (f_n, f_t), slip)


def select_mode(state: HybridState, params: SliderParams) -> ContactMode:
    """Deterministic contact-mode guard for the current state."""
    vbx, vby = _body_pusher_vel(state.theta, state.vx, state.vy)
    mode, _, _ = _resolve_guard(state.px, state.py, vbx, vby, params)
    return mode


def _solve_frozen(mode: ContactMode, px, py, vbx, vby, params):
    """Evaluate a frozen contact branch; total in (state, vel) for linearization.

    A tensile solve yields zero force and twist instead of an error so the
    branch stays well-defined under perturbation.
    """
    h = params.half_side
    nx, ny = _NORMALS[mode.face]
    tx, ty = _TANGENTS[mode.face]
    tc = tx * px + ty * py
    tc = min(max(tc, -h), h)
    cp = (h * nx + tc * tx, h * ny + tc * ty)
    fcontact = FaceContact(mode.face, cp, (nx, ny), (tx, ty),
                           nx * px + ny * py - h)
    kind = {"ST": "stick", "SU": "slide_up", "SD": "slide_down"}[mode.kind]
    try:
        sol = contact_solve(cp, (nx, ny), (tx, ty), (vbx, vby), kind, params)
    except NoPushError:
        return fcontact, ContactSolution((0.0, 0.0, 0.0), (0.0, 0.0), 0.0)
    if mode.kind == "ST":
        sol = _clamp_to_cone(sol, fcontact, params)
    return fcontact, sol


def step(
    state: HybridState,
    control: Sequence[float],
    dt: float,
    params: SliderParams,
    mode_override: Optional[ContactMode] = None,
) -> tuple:
    """Advance the hybrid system one semi-implicit Euler step.

    The pusher velocity is updated first; the contact mode (overridden or
    guard-selected) then determines the slider twist. Returns the next
    state and the mode used. Penetration is removed by projecting the
    pusher back to the face surface after integration.
    """
    if not 0.0 < dt <= 0.2:
        raise ValueError(f"dt must be in (0, 0.2], got {dt}")
    ux, uy = float(control[0]), float(control[1])
    vx = state.vx + ux * dt
    vy = state.vy + uy * dt
    theta = state.theta
    px, py = state.px, state.py
    vbx, vby = _body_pusher_vel(theta, vx, vy)

    if mode_override is None:
        mode, sol, fc = _resolve_guard(px, py, vbx, vby, params)
    else:
        mode = mode_override
        sol = None
        fc = None
    h = params.half_side

    if not mode.in_contact:
        npx = px + vbx * dt
        npy = py + vby * dt
        # free flight may tunnel into the slider; push out of the interior
        if max(abs(npx), abs(npy)) < h:
            face = max(range(4), key=lambda f: _NORMALS[f][0] * npx + _NORMALS[f][1] * npy)
            nx, ny = _NORMALS[face]
            dn = nx * npx + ny * npy - h
            npx -= dn * nx
            npy -= dn * ny
        nstate = HybridState(state.x, state.y, theta, npx, npy, vx, vy)
    else:
        if sol is None:
            fc, sol = _solve_frozen(mode, px, py, vbx, vby, params)
        twx, twy, omega = sol.body_twist
        ntheta = wrap_angle(theta + omega * dt)
        c2, s2 = math.cos(ntheta), math.sin(ntheta)
        nx_ = state.x + (c2 * twx - s2 * twy) * dt
        ny_ = state.y + (s2 * twx + c2 * twy) * dt
        # pusher motion relative to the slider, in the body frame
        dpx = vbx - (twx - omega * py)
        dpy = vby - (twy + omega * px)
        npx = px + dpx * dt
        npy = py + dpy * dt
        fnx, fny = fc.normal
        dn = fnx * npx + fny * npy - h
        if dn < 0.0:
            npx -= dn * fnx
            npy -= dn * fny
        nstate = HybridState(nx_, ny_, ntheta, npx, npy, vx, vy)

    for v in nstate:
        if not math.isfinite(v):
            raise NonFiniteStateError(f"non-finite state after step: {nstate}")
    return nstate, mode


def linearize(
    state: HybridState,
    control: Sequence[float],
    dt: float,
    params: SliderParams,
    frozen_mode: ContactMode,
):
    """Central finite-difference Jacobians of step under a frozen mode.

    Returns (A, B) with A 7x7 and B 7x2. The nominal mode is held fixed so
    the branch never changes under perturbation.

    Separation steps whose flight stays clear of the interior-projection
    branch are linear, so their Jacobians are written down directly; this
    agrees with the difference quotient to machine precision and skips the
    18 extra dynamics evaluations.
    """
    if not frozen_mode.in_contact:
        ux, uy = float(control[0]), float(control[1])
        vx = state.vx + ux * dt
        vy = state.vy + uy * dt
        c, s = math.cos(state.theta), math.sin(state.theta)
        npx = state.px + (c * vx + s * vy) * dt
        npy = state.py + (-s * vx + c * vy) * dt
        h = params.half_side
        clear = 1e-5
        if (
            max(abs(npx), abs(npy)) > h + clear
            and max(abs(state.px), abs(state.py)) > h + clear
        ):
            A = np.eye(7)
            A[3, 2] = (-s * vx + c * vy) * dt
            A[4, 2] = (-c * vx - s * vy) * dt
            A[3, 5] = c * dt
            A[3, 6] = s * dt
            A[4, 5] = -s * dt
            A[4, 6] = c * dt
            B = np.zeros((7, 2))
            B[3, 0] = c * dt * dt
            B[3, 1] = s * dt * dt
            B[4, 0] = -s * dt * dt
            B[4, 1] = c * dt * dt
            B[5, 0] = dt
            B[6, 1] = dt
            return A, B

    x0 = list(state)
    u0 = [float(control[0]), float(control[1])]
    A = np.empty((7, 7))
    B = np.empty((7, 2))
    for i in range(7):
        hstep = max(1e-6, 1e-6 * abs(x0[i]))
        xp = list(x0)
        xm = list(x0)
        xp[i] += hstep
        xm[i] -= hstep
        sp, _ = step(HybridState(*xp), u0, dt, params, mode_override=frozen_mode)
        sm, _ = step(HybridState(*xm), u0, dt, params, mode_override=frozen_mode)
        inv = 0.5 / hstep
        for r in range(7):
            A[r, i] = (sp[r] - sm[r]) * inv
    for i in range(2):
        hstep = max(1e-6, 1e-6 * abs(u0[i]))
        up = list(u0)
        um = list(u0)
        up[i] += hstep
        um[i] -= hstep
        sp, _ = step(state, up, dt, params, mode_override=frozen_mode)
        sm, _ = step(state, um, dt, params, mode_override=frozen_mode)
        inv = 0.5 / hstep
        for r in range(7):
            B[r, i] = (sp[r] - sm[r]) * inv
    if not (np.isfinite(A).all() and np.isfinite(B).all()):
        raise NonFiniteStateError("non-finite entries in linearization")
    return A, B
