"""Deterministic CSV/JSON writers for run artifacts.

Floats are serialized with repr (shortest round-trip), JSON with sorted keys
and a fixed indent, so identical inputs produce byte-identical files. Nothing
here writes timestamps; wall-clock info belongs in the sidecar run log only.
"""

from __future__ import annotations

import json

import numpy as np

from .dynamics import Trajectory
from .ensemble import SampleSet
from .oracle import SpectrumResult


def _fmt(v) -> str:
    return repr(float(v))


def jsonify(obj):
    """Recursively convert numpy scalars/arrays so json.dumps round-trips."""
    if isinstance(obj, dict):
        return {str(k): jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(jsonify(obj), fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_trajectory_csv(traj: Trajectory, path):
    """One row per accepted step: t,x,y,p,q,generator,constraint."""
    with open(path, "w") as fh:
        fh.write("t,x,y,p,q,generator,constraint\n")
        for i in range(len(traj.times)):
            x, y, p, q = traj.points[i]
            fh.write(",".join([
                _fmt(traj.times[i]), _fmt(x), _fmt(y), _fmt(p), _fmt(q),
                _fmt(traj.generator_log[i]), _fmt(traj.constraint_log[i]),
            ]) + "\n")


def write_events_json(traj: Trajectory, path):
    events = []
    for e in traj.events:
        row = {"kind": e.kind, "t": float(e.time), "x": float(e.point[0])}
        if e.kind == "well_crossing":
            row["direction"] = int(e.direction)
        events.append(row)
    write_json({"events": events, "termination": traj.termination}, path)


def write_ensemble_csv(samples: SampleSet, path):
    with open(path, "w") as fh:
        fh.write("x,p,weight\n")
        for i in range(len(samples)):
            fh.write(f"{_fmt(samples.x[i])},{_fmt(samples.p[i])},{_fmt(samples.weight[i])}\n")


def write_spectrum_json(result: SpectrumResult, path):
    write_json(
        {
            "energies": [float(v) for v in result.energies],
            "hbar": result.hbar,
            "mass": result.mass,
            "grid": {"x_min": result.grid.x_min, "x_max": result.grid.x_max,
                     "n": result.grid.n},
        },
        path,
    )


def write_wavefunctions_csv(result: SpectrumResult, path):
    xs = result.grid.points()
    k = len(result.energies)
    with open(path, "w") as fh:
        fh.write("x," + ",".join(f"psi{i}" for i in range(k)) + "\n")
        for j in range(result.grid.n):
            fh.write(_fmt(xs[j]) + ","
                     + ",".join(_fmt(result.wavefunctions[i, j]) for i in range(k)) + "\n")


def write_uncertainty_csv(rows, path):
    """Sweep rows as delta_E,delta_t,product; absent measurements stay empty."""
    with open(path, "w") as fh:
        fh.write("delta_E,delta_t,product\n")
        for row in rows:
            dt = _fmt(row.delta_t) if row.delta_t is not None else ""
            pr = _fmt(row.product) if row.product is not None else ""
            fh.write(f"{_fmt(row.delta_e)},{dt},{pr}\n")


def write_hbar_csv(rows, path):
    with open(path, "w") as fh:
        fh.write("hbar,deviation\n")
        for hbar, dev in rows:
            fh.write(f"{_fmt(hbar)},{_fmt(dev)}\n")
