"""Scripted demonstration fixtures.

Three deterministic hand-coded pusher policies drive the simulator through
the recording session, producing demos with zero, one and two face
switches. They stand in for human demonstrations so the whole test suite
runs headless; regeneration is bit-exact.

Each script phase holds a goal fixed in the slider body frame, so the
pusher chases the slider as it moves (press-and-pivot pushes re-grip
between faces the way a human operator does).
"""

from __future__ import annotations

import argparse
import math
import os
from typing import List, Tuple

from . import demolib
from .planners import face_touch_radius
from .pushdyn import HybridState, SliderParams
from .teleod import Session

__all__ = ["FIXTURE_IDS", "generate", "main"]

FIXTURE_IDS = ("ns0", "ns1", "ns2")

_H = 0.05  # phases below assume the default half_side

# (body-frame goal, ticks); goals track the slider pose every tick.
# The generator servo is slow and weak on purpose: mismatched targets then
# get an initial guess the solver can still bend, not a violent shove.
_SCRIPTS = {
    # straight push: press the -x face, shove along +x, back off
    "ns0": [
        ((-_H + 0.012, 0.0), 400),
        ((-_H - 0.012, 0.0), 80),
    ],
    # one switch, clockwise turn past -110 degrees: pivot on -x, re-grip on +y
    "ns1": [
        ((-_H + 0.02, 0.045), 150),
        ((-_H - 0.045, 0.0), 60),
        ((0.0, _H + 0.045), 50),
        ((0.045, _H - 0.02), 170),
        ((0.0, _H + 0.03), 50),
    ],
    # two switches, counterclockwise turn to nearly pi: pivots on -x, -y, +x
    "ns2": [
        ((-_H + 0.02, -0.045), 150),
        ((-_H - 0.045, 0.0), 60),
        ((0.0, -_H - 0.045), 50),
        ((0.045, -_H + 0.02), 160),
        ((0.0, -_H - 0.045), 60),
        ((_H + 0.045, 0.0), 50),
        ((_H - 0.02, 0.045), 170),
        ((_H + 0.03, 0.0), 50),
    ],
}

_EXPECTED_SWITCHES = {"ns0": 0, "ns1": 1, "ns2": 2}


def _run_script(phases: List[Tuple[Tuple[float, float], int]], params: SliderParams) -> Session:
    from .teleod import ServoGains

    r = face_touch_radius(params)
    x0 = HybridState(0.0, 0.0, 0.0, -r, 0.0, 0.0, 0.0)  # pusher on the -x face
    sess = Session(params, x0=x0, gains=ServoGains(k_p=6.0, k_d=5.0, a_max=0.5))
    sess.apply({"type": "reset", "target": [0.0, 0.0, 0.0]})
    sess.apply({"type": "record", "on": True})
    for off, ticks in phases:
        for _ in range(ticks):
            s = sess.state
            c, si = math.cos(s.theta), math.sin(s.theta)
            gx = s.x + c * off[0] - si * off[1]
            gy = s.y + si * off[0] + c * off[1]
            sess.apply({"type": "mouse", "goal": [gx, gy]})
            sess.tick()
    sess.apply({"type": "record", "on": False})
    return sess


def build_demo(demo_id: str, params: SliderParams = None) -> demolib.Demonstration:
    """Run one fixture script; the demo is labelled with the slider pose it
    actually reached."""
    if demo_id not in _SCRIPTS:
        raise KeyError(f"unknown fixture {demo_id!r}; have {sorted(_SCRIPTS)}")
    params = params or SliderParams()
    sess = _run_script(_SCRIPTS[demo_id], params)
    final = sess.state
    demo = sess.to_demonstration(demo_id, target=(final.x, final.y, final.theta))
    got = demo.n_switches
    want = _EXPECTED_SWITCHES[demo_id]
    if got != want:
        raise RuntimeError(f"fixture {demo_id} produced N_s={got}, expected {want}")
    return demo


def generate(out_dir: str, params: SliderParams = None) -> List[str]:
    """Write all three fixtures; returns the file paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for demo_id in FIXTURE_IDS:
        demo = build_demo(demo_id, params)
        path = os.path.join(out_dir, f"{demo_id}.demo.jsonl")
        demolib.save(demo, path)
        paths.append(path)
    return paths


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description="regenerate the scripted demo fixtures")
    ap.add_argument("--out", default="fixtures", help="output directory")
    args = ap.parse_args(argv)
    for path in generate(args.out):
        demo = demolib.load(path)
        print(f"{path}: target=({demo.target[0]:+.4f}, {demo.target[1]:+.4f}, "
              f"{demo.target[2]:+.4f}) N_s={demo.n_switches} duration={demo.duration:.1f}s")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
