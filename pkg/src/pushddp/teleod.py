"""Recording service: human-in-the-loop (or scripted) demonstration capture.

A Session owns the simulator state and advances it at a fixed tick rate; a
position servo turns the latest mouse goal into a pusher acceleration so
recorded controls stay dynamically consistent with the acceleration-driven
model. The WebSocket layer is a thin wrapper that queues client messages
and consumes them between ticks.
"""

from __future__ import annotations

import asyncio
import json
import math
import os
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import fastapi as _fastapi
import numpy as np

from . import demolib
from .pushdyn import ContactMode, HybridState, SliderParams, select_mode, step

__all__ = [
    "ServoGains",
    "Session",
    "tracking_law",
    "default_session_start",
    "create_app",
    "serve",
]

DEFAULT_TICK_DT = 0.02  # 50 Hz


@dataclass(frozen=True)
class ServoGains:
    k_p: float = 20.0
    k_d: float = 8.0
    a_max: float = 2.0  # 2 * u_l with the default control bound

    def __post_init__(self):
        if self.k_p <= 0 or self.k_d <= 0 or self.a_max <= 0:
            raise ValueError("servo gains must be positive")


def tracking_law(
    mouse_goal: Sequence[float],
    pusher_pos: Sequence[float],
    pusher_vel: Sequence[float],
    gains: ServoGains = ServoGains(),
) -> Tuple[float, float]:
    """PD servo from mouse goal to pusher acceleration, norm-clamped.

    The human effectively commands position while the recorded signal
    remains an acceleration the dynamics model accepts directly.
    """
    ux = gains.k_p * (float(mouse_goal[0]) - float(pusher_pos[0])) - gains.k_d * float(pusher_vel[0])
    uy = gains.k_p * (float(mouse_goal[1]) - float(pusher_pos[1])) - gains.k_d * float(pusher_vel[1])
    mag = math.hypot(ux, uy)
    if mag > gains.a_max:
        scale = gains.a_max / mag
        ux *= scale
        uy *= scale
    return ux, uy


def default_session_start(params: SliderParams) -> HybridState:
    """Slider at the origin, pusher resting on the -x face center."""
    from .planners import face_touch_radius

    return HybridState(0.0, 0.0, 0.0, -face_touch_radius(params), 0.0, 0.0, 0.0)


class Session:
    """Deterministic simulator session driving one demonstration at a time.

    Messages are plain dicts in the wire format; tick() advances exactly
    one dt_tick and returns the state frame to broadcast.
    """

    def __init__(
        self,
        params: SliderParams,
        demo_dir: Optional[str] = None,
        x0: Optional[HybridState] = None,
        dt_tick: float = DEFAULT_TICK_DT,
        gains: ServoGains = ServoGains(),
    ):
        self.params = params
        self.demo_dir = demo_dir
        self.x0 = x0 if x0 is not None else default_session_start(params)
        self.dt_tick = dt_tick
        self.gains = gains
        self.state = self.x0
        self.target: Tuple[float, float, float] = (0.0, 0.0, 0.0)
        self.recording = False
        self.tick_count = 0
        self.mouse_goal: Optional[Tuple[float, float]] = None
        self.buffer: List[Tuple[HybridState, Tuple[float, float], ContactMode]] = []

    # -- message handling -------------------------------------------------

    def apply(self, msg: dict) -> Optional[dict]:
        """Handle one client message; returns a reply frame or None.

        Schema problems come back as {"type": "error"} frames instead of
        exceptions so a bad client cannot kill the session.
        """
        try:
            mtype = msg.get("type")
            if mtype == "reset":
                target = msg["target"]
                if len(target) != 3:
                    raise ValueError("target must be [x, y, theta]")
                self.target = tuple(float(v) for v in target)
                self.state = self.x0
                self.mouse_goal = None
                self.recording = False
                self.buffer = []
                return None
            if mtype == "mouse":
                goal = msg["goal"]
                if len(goal) != 2:
                    raise ValueError("goal must be [x, y]")
                self.mouse_goal = (float(goal[0]), float(goal[1]))
                return None
            if mtype == "record":
                on = bool(msg["on"])
                if on and not self.recording:
                    self.buffer = []
                self.recording = on
                return None
            if mtype == "save":
                demo_id = str(msg["id"])
                path = self.save(demo_id)
                return {"type": "saved", "path": path}
            raise ValueError(f"unknown message type {mtype!r}")
        except (KeyError, TypeError, ValueError) as e:
            return {"type": "error", "message": str(e)}

    # -- simulation --------------------------------------------------------

    def pusher_world(self) -> Tuple[float, float]:
        s = self.state
        c, si = math.cos(s.theta), math.sin(s.theta)
        return (s.x + c * s.px - si * s.py, s.y + si * s.px + c * s.py)

    def tick(self) -> dict:
        s = self.state
        if self.mouse_goal is not None:
            u = tracking_law(self.mouse_goal, self.pusher_world(), s.pusher_vel, self.gains)
        else:
            u = (0.0, 0.0)
        nstate, mode = step(s, u, self.dt_tick, self.params)
        if self.recording:
            self.buffer.append((s, u, mode))
        self.state = nstate
        self.tick_count += 1
        return self.state_frame(mode)

    def state_frame(self, mode: Optional[ContactMode] = None) -> dict:
        if mode is None:
            mode = select_mode(self.state, self.params)
        return {
            "type": "state",
            "t": self.tick_count,
            "x": [float(v) for v in self.state],
            "mode": mode.token(),
            "recording": self.recording,
            "target": [float(v) for v in self.target],
        }

    # -- persistence -------------------------------------------------------

    def to_demonstration(self, demo_id: str, target: Optional[Sequence[float]] = None) -> demolib.Demonstration:
        """Freeze the buffer into a demonstration, appending the current
        state as the trailing sample so replay covers every transition."""
        if not self.buffer:
            raise ValueError("nothing recorded")
        states = [list(s) for s, _, _ in self.buffer] + [list(self.state)]
        controls = [list(u) for _, u, _ in self.buffer] + [[0.0, 0.0]]
        modes = tuple(m for _, _, m in self.buffer) + (
            select_mode(self.state, self.params),
        )
        label = tuple(float(v) for v in (target if target is not None else self.target))
        return demolib.Demonstration(
            id=demo_id,
            target=label,
            dt_rec=self.dt_tick,
            states=np.array(states),
            controls=np.array(controls),
            modes=modes,
        )

    def save(self, demo_id: str) -> str:
        if self.demo_dir is None:
            raise ValueError("session has no demo directory")
        demo = self.to_demonstration(demo_id)
        os.makedirs(self.demo_dir, exist_ok=True)
        path = os.path.join(self.demo_dir, f"{demo_id}.demo.jsonl")
        demolib.save(demo, path)
        return path


# -- network layer ---------------------------------------------------------


def create_app(params: SliderParams, demo_dir: str, dt_tick: float = DEFAULT_TICK_DT):
    """FastAPI app exposing the session over a WebSocket plus GET /demos."""
    import contextlib

    from fastapi import FastAPI

    @contextlib.asynccontextmanager
    async def lifespan(app):
        app.state.ticker = asyncio.ensure_future(tick_loop())
        try:
            yield
        finally:
            app.state.ticker.cancel()

    app = FastAPI(title="pushddp demonstration recorder", lifespan=lifespan)
    session = Session(params, demo_dir=demo_dir, dt_tick=dt_tick)
    app.state.session = session
    app.state.clients = set()
    app.state.inbox = asyncio.Queue()

    async def tick_loop():
        next_deadline = time.monotonic()
        while True:
            # consume queued messages between ticks
            while not app.state.inbox.empty():
                ws, msg = app.state.inbox.get_nowait()
                reply = session.apply(msg)
                if reply is not None:
                    try:
                        await ws.send_text(json.dumps(reply))
                    except Exception:
                        pass
            frame = json.dumps(session.tick())
            dead = []
            for ws in app.state.clients:
                try:
                    await ws.send_text(frame)
                except Exception:
                    dead.append(ws)
            for ws in dead:
                app.state.clients.discard(ws)
            next_deadline += session.dt_tick
            delay = next_deadline - time.monotonic()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                next_deadline = time.monotonic()
                await asyncio.sleep(0)

    @app.get("/demos")
    def list_demos():
        out = []
        if os.path.isdir(demo_dir):
            lib = demolib.load_library(demo_dir)
            for d in lib.demos:
                out.append({"id": d.id, "target": list(d.target), "n_switches": d.n_switches})
        return out

    @app.websocket("/ws")
    async def ws_endpoint(ws: "_fastapi.WebSocket"):
        await ws.accept()
        app.state.clients.add(ws)
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError as e:
                    await ws.send_text(json.dumps({"type": "error", "message": str(e)}))
                    continue
                await app.state.inbox.put((ws, msg))
        except _fastapi.WebSocketDisconnect:
            pass
        finally:
            app.state.clients.discard(ws)

    return app


def serve(port: int, params: SliderParams, demo_dir: str, host: str = "127.0.0.1"):
    """Run the recording service until interrupted."""
    import uvicorn

    app = create_app(params, demo_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
