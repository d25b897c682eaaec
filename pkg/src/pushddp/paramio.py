"""Flat key-value parameter files.

One `key = value` per line, `#` comments. Slider keys are bare
(`half_side = 0.05`); weight keys carry a `weights.` prefix and matrix
values are comma-separated diagonals (`weights.QT.diag = 200,200,100,0,0,0,0`).
All lengths in meters, angles in radians.
"""

from __future__ import annotations

from typing import Dict, Tuple

import numpy as np

from .costlib import Weights
from .pushdyn import SliderParams

__all__ = ["parse_kv", "load_params_file", "read_params", "read_weights"]

_SLIDER_KEYS = {
    "half_side",
    "mu_ground",
    "mu_contact",
    "mass",
    "gravity",
    "char_len",
    "contact_tol",
}

_WEIGHT_DIAG_KEYS = {
    "weights.QT.diag": ("Q_T", 7),
    "weights.R.diag": ("R", 2),
    "weights.Qf.diag": ("Q_f", 2),
    "weights.Qn.diag": ("Q_n", 7),
    "weights.Rdv.diag": ("R_dv", 2),
    "weights.Rdu.diag": ("R_du", 2),
}


def parse_kv(text: str) -> Dict[str, str]:
    out: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ValueError(f"line {lineno}: empty key or value in {raw!r}")
        out[key] = value
    return out


def read_params(kv: Dict[str, str]) -> SliderParams:
    kwargs = {}
    for key in _SLIDER_KEYS:
        if key in kv:
            kwargs[key] = float(kv[key])
    return SliderParams(**kwargs)


def read_weights(kv: Dict[str, str]) -> Weights:
    w = Weights()
    for key, (attr, dim) in _WEIGHT_DIAG_KEYS.items():
        if key in kv:
            vals = [float(v) for v in kv[key].split(",")]
            if len(vals) != dim:
                raise ValueError(f"{key}: expected {dim} diagonal entries, got {len(vals)}")
            setattr(w, attr, np.diag(vals))
    if "weights.u_l" in kv:
        w.u_l = float(kv["weights.u_l"])
    return w.validate()


def load_params_file(path: str) -> Tuple[SliderParams, Weights]:
    with open(path, "r", encoding="utf-8") as f:
        kv = parse_kv(f.read())
    known = _SLIDER_KEYS | set(_WEIGHT_DIAG_KEYS) | {"weights.u_l"}
    unknown = set(kv) - known
    if unknown:
        raise ValueError(f"unknown parameter keys: {sorted(unknown)}")
    return read_params(kv), read_weights(kv)
