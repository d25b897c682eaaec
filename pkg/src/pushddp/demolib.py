"""Demonstration storage, alignment to the solver grid, and k-NN selection.

Demo files are JSON lines: a header record followed by one record per
sample. Floats round-trip exactly through the shortest-repr decimal
encoding, so save/load is lossless.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .costlib import GuidanceRefs, target_state
from .pushdyn import ContactMode, HybridState, SliderParams, step, wrap_angle

__all__ = [
    "Demonstration",
    "DemoLibrary",
    "Resampled",
    "SchemaError",
    "EmptyLibraryError",
    "save",
    "load",
    "load_library",
    "resample",
    "switch_times",
    "select",
    "count_face_switches",
    "verify_replay",
    "THETA_WEIGHT",
]

FORMAT_VERSION = 1

# theta weight in the selection metric: a pi rotation counts as much as a
# 0.25 m translation (a quarter of the task-space half-width)
THETA_WEIGHT = (0.25 / math.pi) ** 2


class SchemaError(Exception):
    """Malformed demo file; message carries the line and field."""


class EmptyLibraryError(Exception):
    """Selection from a library with no demonstrations."""


@dataclass
class Demonstration:
    id: str
    target: Tuple[float, float, float]
    dt_rec: float
    states: np.ndarray  # (n, 7)
    controls: np.ndarray  # (n, 2); the final row is trailing padding
    modes: Tuple[ContactMode, ...]  # (n,)

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=float)
        self.controls = np.asarray(self.controls, dtype=float)
        n = self.states.shape[0]
        if n == 0:
            raise ValueError("demonstration must contain samples")
        if self.controls.shape != (n, 2) or len(self.modes) != n:
            raise ValueError("states, controls and modes must have equal length")

    @property
    def n_samples(self) -> int:
        return self.states.shape[0]

    @property
    def duration(self) -> float:
        return (self.n_samples - 1) * self.dt_rec

    @property
    def n_switches(self) -> int:
        return count_face_switches(self.modes)


@dataclass
class DemoLibrary:
    demos: List[Demonstration]
    source_path: Optional[str] = None

    def __post_init__(self):
        ids = [d.id for d in self.demos]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate demo ids: {sorted(ids)}")

    def __len__(self):
        return len(self.demos)

    def by_id(self, demo_id: str) -> Demonstration:
        for d in self.demos:
            if d.id == demo_id:
                return d
        raise KeyError(demo_id)


def count_face_switches(modes: Sequence[ContactMode]) -> int:
    """Number of face changes between consecutive contact samples,
    ignoring separation stretches in between."""
    last_face = None
    switches = 0
    for m in modes:
        if not m.in_contact:
            continue
        if last_face is not None and m.face != last_face:
            switches += 1
        last_face = m.face
    return switches


def save(demo: Demonstration, path: str) -> None:
    header = {
        "id": demo.id,
        "target": [float(v) for v in demo.target],
        "dt_rec": float(demo.dt_rec),
        "version": FORMAT_VERSION,
    }
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(header) + "\n")
        for t in range(demo.n_samples):
            rec = {
                "t": t,
                "x": [float(v) for v in demo.states[t]],
                "u": [float(v) for v in demo.controls[t]],
                "mode": demo.modes[t].token(),
            }
            f.write(json.dumps(rec) + "\n")


def _field(obj: dict, name: str, lineno: int):
    if name not in obj:
        raise SchemaError(f"line {lineno}: missing field {name!r}")
    return obj[name]


def load(path: str) -> Demonstration:
    with open(path, "r", encoding="utf-8") as f:
        lines = [ln for ln in (l.strip() for l in f) if ln]
    if not lines:
        raise SchemaError("line 1: empty demo file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise SchemaError(f"line 1: invalid JSON: {e}") from e
    demo_id = _field(header, "id", 1)
    target = _field(header, "target", 1)
    dt_rec = _field(header, "dt_rec", 1)
    version = _field(header, "version", 1)
    if version != FORMAT_VERSION:
        raise SchemaError(f"line 1: unsupported version {version}")
    if len(target) != 3:
        raise SchemaError("line 1: field 'target' must have 3 entries")

    states, controls, modes = [], [], []
    for lineno, ln in enumerate(lines[1:], start=2):
        try:
            rec = json.loads(ln)
        except json.JSONDecodeError as e:
            raise SchemaError(f"line {lineno}: invalid JSON: {e}") from e
        x = _field(rec, "x", lineno)
        u = _field(rec, "u", lineno)
        mode = _field(rec, "mode", lineno)
        if len(x) != 7:
            raise SchemaError(f"line {lineno}: field 'x' must have 7 entries")
        if len(u) != 2:
            raise SchemaError(f"line {lineno}: field 'u' must have 2 entries")
        try:
            modes.append(ContactMode.from_token(mode))
        except ValueError as e:
            raise SchemaError(f"line {lineno}: field 'mode': {e}") from e
        states.append(x)
        controls.append(u)
    if not states:
        raise SchemaError("line 2: demo has no samples")
    return Demonstration(
        id=str(demo_id),
        target=tuple(float(v) for v in target),
        dt_rec=float(dt_rec),
        states=np.array(states),
        controls=np.array(controls),
        modes=tuple(modes),
    )


def load_library(directory: str) -> DemoLibrary:
    demos = []
    for name in sorted(os.listdir(directory)):
        if name.endswith(".demo.jsonl"):
            demos.append(load(os.path.join(directory, name)))
    demos.sort(key=lambda d: d.id)
    return DemoLibrary(demos, source_path=directory)


def verify_replay(demo: Demonstration, params: SliderParams) -> float:
    """Replay the recorded controls through the stepper from the first
    sample under the recorded mode schedule; returns the max per-component
    deviation from the stored states. Consistent records stay below 1e-6
    (recorder output is bit-exact by construction)."""
    s = HybridState(*demo.states[0])
    worst = 0.0
    for t in range(demo.n_samples - 1):
        s, _ = step(s, demo.controls[t], demo.dt_rec, params, mode_override=demo.modes[t])
        dev = float(np.max(np.abs(np.array(s) - demo.states[t + 1])))
        worst = max(worst, dev)
    return worst


@dataclass
class Resampled:
    """A demonstration aligned to the solver grid."""

    refs: GuidanceRefs
    states: np.ndarray  # (T+1, 7), velocities time-rescaled
    modes: Tuple[ContactMode, ...]  # (T,)


def _interp_state(states: np.ndarray, idx: float) -> np.ndarray:
    n = states.shape[0]
    lo = min(int(math.floor(idx)), n - 1)
    hi = min(lo + 1, n - 1)
    w = idx - lo
    if hi == lo or w == 0.0:
        return states[lo].copy()
    out = (1.0 - w) * states[lo] + w * states[hi]
    dth = wrap_angle(states[hi, 2] - states[lo, 2])
    out[2] = wrap_angle(states[lo, 2] + w * dth)
    return out


def resample(demo: Demonstration, T: int, dt: float) -> Resampled:
    """Uniformly rescale a demo onto exactly T intervals of dt.

    States interpolate linearly (theta on the circle); velocities scale by
    the time-dilation factor and accelerations by its square. The mode at
    each grid point is the mode of the nearest recorded sample.
    """
    if demo.duration <= 0:
        raise ValueError("demo duration must be positive (need >= 2 samples)")
    if T < 1 or dt <= 0:
        raise ValueError("need T >= 1 and dt > 0")
    n = demo.n_samples
    gamma = demo.duration / (T * dt)

    states = np.empty((T + 1, 7))
    for k in range(T + 1):
        idx = (k / T) * (n - 1)
        states[k] = _interp_state(demo.states, idx)
        states[k, 5:7] *= gamma
    states[0] = demo.states[0].copy()
    states[0, 5:7] *= gamma
    states[T] = demo.states[-1].copy()
    states[T, 5:7] *= gamma

    vel_refs = states[:T, 5:7].copy()

    acc_refs = np.empty((T, 2))
    g2 = gamma * gamma
    for k in range(T):
        tau = (k + 0.5) * dt * gamma
        idx = min(int(tau / demo.dt_rec), max(n - 2, 0))
        acc_refs[k] = demo.controls[idx] * g2

    modes = []
    for k in range(T):
        tau = k * dt * gamma
        idx = min(int(round(tau / demo.dt_rec)), n - 1)
        modes.append(demo.modes[idx])
    modes = tuple(modes)

    t_switch = switch_times(modes)
    switch_states = [(t, states[t].copy()) for t in t_switch]
    refs = GuidanceRefs(
        target=target_state(demo.target),
        switch_states=switch_states,
        vel_refs=vel_refs,
        acc_refs=acc_refs,
    )
    return Resampled(refs=refs, states=states, modes=modes)


def switch_times(modes: Sequence[ContactMode], anchor: str = "pre") -> List[int]:
    """Grid indices anchoring each face switch in an aligned mode sequence.

    "pre" anchors at the last contact index on the old face before the
    change; "post" at the first contact index on the new face.
    """
    if anchor not in ("pre", "post"):
        raise ValueError("anchor must be 'pre' or 'post'")
    contacts = [(t, m.face) for t, m in enumerate(modes) if m.in_contact]
    times = []
    for (t_prev, f_prev), (t_next, f_next) in zip(contacts, contacts[1:]):
        if f_prev != f_next:
            times.append(t_prev if anchor == "pre" else t_next)
    return times


def selection_distance(target: Sequence[float], demo_target: Sequence[float]) -> float:
    dx = float(target[0]) - float(demo_target[0])
    dy = float(target[1]) - float(demo_target[1])
    dth = wrap_angle(float(target[2]) - float(demo_target[2]))
    return dx * dx + dy * dy + THETA_WEIGHT * dth * dth


def select(target: Sequence[float], library: DemoLibrary, k: int = 1) -> Demonstration:
    """Pick the library demo whose labelled target is nearest.

    The k nearest candidates are re-ranked with the same metric, so the
    result is the global argmin; ties break on lexicographic id.
    """
    if len(library) == 0:
        raise EmptyLibraryError("cannot select from an empty demo library")
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = sorted(
        library.demos, key=lambda d: (selection_distance(target, d.target), d.id)
    )
    candidates = ranked[: min(k, len(ranked))]
    return min(candidates, key=lambda d: (selection_distance(target, d.target), d.id))
