"""CSV and JSON artifacts.

Floats are written with 17 significant digits, which round-trips any
double exactly.  CSV files are comma separated with ``\\n`` line endings and
a mandatory header row.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .integrate import Trajectory
from .model import NormKind, State, lattice_norm


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path, header: list[str], rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]], dtype=np.float64)


def write_trajectory_csv(traj: Trajectory, path, norms: list[NormKind] | None = None) -> Path:
    """Amplitudes ``t, re_b_1, im_b_1, ...`` or, with ``norms``, one column per norm."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    if norms:
        header = ["t"] + [nk.label for nk in norms]
        rows = ([t] + [lattice_norm(State(b, traj.bc), nk) for nk in norms]
                for t, b in zip(traj.times, traj.states))
        return write_csv(path, header, rows)
    states = np.asarray(traj.states)
    n = states.shape[1]
    header = ["t"] + [f"{part}_b_{j}" for j in range(1, n + 1) for part in ("re", "im")]
    flat = np.ascontiguousarray(states, dtype=np.complex128).view(np.float64)
    return write_csv(path, header, ([t, *row] for t, row in zip(traj.times, flat)))


def read_trajectory_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of the amplitude layout: returns ``(times, complex states)``."""
    header, data = read_csv(path)
    if not header[1].startswith("re_b_"):
        raise ValueError("not an amplitude trajectory file")
    return data[:, 0].copy(), np.ascontiguousarray(data[:, 1:]).view(np.complex128)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
