"""Adaptive integration of the flavor-selected flow with event detection.

The workhorse is a Dormand-Prince 5(4) embedded pair with PI-free step
control (plain 0.9 * err^(-1/5) with growth capped at 5x). Accepted nodes
carry their derivative, so cubic Hermite interpolation gives dense output
for event refinement and for resampling onto common grids.

Termination semantics:
  completed       reached the end of the requested span
  escaped         an accepted node's max-norm crossed cfg.escape_radius
  step_underflow  the controller pushed |h| below cfg.min_step (finite-time
                  blow-up; expected for CCM on quartic potentials)

No trajectory ever contains a non-finite sample: proposals with non-finite
stages are rejected and the step is halved until acceptance or underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels
from .errors import NumericError, UsageError
from .hamiltonians import ExtendedSystem, Flavor

_CHUNK = 262144

TERMINATION_COMPLETED = "completed"
TERMINATION_ESCAPED = "escaped"
TERMINATION_STEP_UNDERFLOW = "step_underflow"

_FLAVOR_CODE = {Flavor.MFQM: 0, Flavor.CCM: 1, Flavor.CLASSICAL_REAL: 2}

_METHODS = ("adaptive_rk", "implicit_midpoint")


@dataclass(frozen=True)
class IntegratorConfig:
    """Step control and termination knobs.

    fixed_step and sample_stride apply only to the implicit_midpoint method
    (it is a fixed-step integrator kept for conservation studies; stride
    thins the stored samples so very long runs stay in memory).
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    min_step: float = 1e-13
    escape_radius: float = 1e6
    method: str = "adaptive_rk"
    fixed_step: float = 1e-3
    sample_stride: int = 1

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise UsageError("integrator tolerances must be positive")
        if not (0 < self.min_step < self.max_step):
            raise UsageError("need 0 < min_step < max_step")
        if not self.escape_radius > 0:
            raise UsageError("escape_radius must be positive")
        if self.method not in _METHODS:
            raise UsageError(f"unknown integrator method {self.method!r}")
        if not (self.fixed_step > 0 and self.sample_stride >= 1):
            raise UsageError("fixed_step must be positive and sample_stride >= 1")


@dataclass(frozen=True)
class Event:
    kind: str  # "well_crossing" | "escape"
    time: float
    point: np.ndarray
    direction: int = 0  # +-1 for well crossings (sign of dx/dt), 0 for escape


@dataclass
class Trajectory:
    """Accepted-node record of one run.

    times/points/derivs/generator_log/constraint_log share length n; times
    are strictly monotone in the direction of integration. derivs holds the
    vector field at each node and exists for dense output.
    """

    times: np.ndarray
    points: np.ndarray
    derivs: np.ndarray
    generator_log: np.ndarray
    constraint_log: np.ndarray
    events: list[Event] = field(default_factory=list)
    termination: str = TERMINATION_COMPLETED

    def __post_init__(self):
        n = len(self.times)
        if not (len(self.points) == len(self.derivs) == len(self.generator_log)
                == len(self.constraint_log) == n):
            raise UsageError("trajectory arrays must share one length")
        if n > 1:
            dt = np.diff(self.times)
            if not (np.all(dt > 0) or np.all(dt < 0)):
                raise UsageError("trajectory times must be strictly monotone")

    @property
    def duration(self) -> float:
        return float(abs(self.times[-1] - self.times[0]))

    def sample_dense(self, ts) -> np.ndarray:
        """Cubic Hermite resampling onto arbitrary times inside the span."""
        return _hermite_eval(self.times, self.points, self.derivs, np.asarray(ts, float))


def _hermite_eval(times, points, derivs, ts):
    forward = times[-1] >= times[0]
    t_nodes = times if forward else times[::-1]
    x_nodes = points if forward else points[::-1]
    f_nodes = derivs if forward else derivs[::-1]
    idx = np.clip(np.searchsorted(t_nodes, ts, side="right") - 1, 0, len(t_nodes) - 2)
    t0 = t_nodes[idx]
    t1 = t_nodes[idx + 1]
    h = t1 - t0
    s = np.where(h != 0, (ts - t0) / h, 0.0)[:, None]
    p0 = x_nodes[idx]
    p1 = x_nodes[idx + 1]
    m0 = f_nodes[idx] * h[:, None]
    m1 = f_nodes[idx + 1] * h[:, None]
    s2 = s * s
    s3 = s2 * s
    return ((2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * m0
            + (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * m1)


def conserved_logs(sys: ExtendedSystem, points: np.ndarray):
    """Generator and constraint values at many points, vectorized."""
    x, y, p, q = points[:, 0], points[:, 1], points[:, 2], points[:, 3]
    m = sys.mass
    V = sys.potential
    if sys.flavor is Flavor.MFQM:
        vp = V.eval_real(x + y)
        vm = V.eval_real(x - y)
        gen = (p * p + q * q) / (2 * m) + 0.5 * (vp + vm)
        con = p * q / m + 0.5 * (vp - vm)
    elif sys.flavor is Flavor.CCM:
        w = V.eval_complex(x + 1j * y)
        gen = (p * p - q * q) / (2 * m) + w.real
        con = w.imag - p * q / m
    else:
        gen = p * p / (2 * m) + V.eval_real(x)
        con = np.zeros_like(gen)
    return gen, con


def _initial_step(f0, X0, rtol, atol, span, hmax):
    sc = atol + rtol * np.abs(X0)
    d0 = math.sqrt(float(np.mean((X0 / sc) ** 2)))
    d1 = math.sqrt(float(np.mean((f0 / sc) ** 2)))
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    return min(h0, abs(span), hmax)


def integrate(sys: ExtendedSystem, X0, t_span, cfg: IntegratorConfig | None = None,
              x_split: float = 0.0) -> Trajectory:
    """Integrate Hamilton's equations for sys from X0 over t_span.

    Well crossings of the surface x = x_split are detected by sign change
    between accepted nodes and bisection-refined on the Hermite interpolant
    to |x - x_split| < 1e-9 (or a 1e-12 bracket). Backward spans (t1 < t0)
    are allowed; t1 == t0 is not.
    """
    if cfg is None:
        cfg = IntegratorConfig()
    X0 = np.asarray(X0, dtype=float).reshape(4).copy()
    if not np.all(np.isfinite(X0)):
        raise UsageError("initial point must be finite")
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not (math.isfinite(t0) and math.isfinite(t1)) or t1 == t0:
        raise UsageError(f"invalid time span ({t0}, {t1})")

    flavor = _FLAVOR_CODE[sys.flavor]
    dv = sys.potential.deriv_coefficients()
    m = sys.mass

    if cfg.method == "implicit_midpoint":
        ts_all, xs_all, termination = _run_midpoint(flavor, dv, m, X0, t0, t1, cfg)
    else:
        ts_all, xs_all, termination = _run_adaptive(flavor, dv, m, X0, t0, t1, cfg)

    points = np.asarray(xs_all)
    times = np.asarray(ts_all)
    derivs = np.empty_like(points)
    for i in range(len(points)):
        _kernels._rhs(flavor, dv, m, points[i], derivs[i])
    gen, con = conserved_logs(sys, points)

    traj = Trajectory(times, points, derivs, gen, con, [], termination)
    traj.events.extend(_well_crossings(traj, x_split))
    if termination == TERMINATION_ESCAPED:
        traj.events.append(_escape_event(traj, cfg.escape_radius))
    return traj


def _run_adaptive(flavor, dv, m, X0, t0, t1, cfg):
    ts_buf = np.empty(_CHUNK)
    xs_buf = np.empty((_CHUNK, 4))
    fs_buf = np.empty((_CHUNK, 4))
    X = X0.copy()
    f = np.empty(4)
    _kernels._rhs(flavor, dv, m, X, f)
    if not np.all(np.isfinite(f)):
        raise UsageError("vector field is non-finite at the initial point")
    s = 1.0 if t1 > t0 else -1.0
    h = s * _initial_step(f, X, cfg.rel_tol, cfg.abs_tol, t1 - t0, cfg.max_step)

    ts_all = [np.array([t0])]
    xs_all = [X.copy()[None, :]]
    t = t0
    while True:
        n, status, t, h = _kernels.dp45_drive(
            flavor, dv, m, X, f, t, t1, h, cfg.rel_tol, cfg.abs_tol,
            cfg.max_step, cfg.min_step, cfg.escape_radius, ts_buf, xs_buf, fs_buf,
        )
        if n:
            ts_all.append(ts_buf[:n].copy())
            xs_all.append(xs_buf[:n].copy())
        if status == _kernels.STATUS_BUFFER_FULL:
            continue
        if status == _kernels.STATUS_DONE:
            return np.concatenate(ts_all), np.concatenate(xs_all), TERMINATION_COMPLETED
        if status == _kernels.STATUS_ESCAPED:
            return np.concatenate(ts_all), np.concatenate(xs_all), TERMINATION_ESCAPED
        return np.concatenate(ts_all), np.concatenate(xs_all), TERMINATION_STEP_UNDERFLOW


def _run_midpoint(flavor, dv, m, X0, t0, t1, cfg):
    h = cfg.fixed_step if t1 > t0 else -cfg.fixed_step
    n_steps = int(math.ceil(abs(t1 - t0) / cfg.fixed_step))
    stride = cfg.sample_stride
    cap = n_steps // stride + 2
    ts_all = [np.array([t0])]
    xs_all = [np.asarray(X0, float)[None, :].copy()]
    X = np.asarray(X0, float).copy()
    done = 0
    while done < n_steps:
        todo = min(n_steps - done, _CHUNK * stride)
        cap = todo // stride + 2
        ts_buf = np.empty(cap)
        xs_buf = np.empty((cap, 4))
        n, status, t_end = _kernels.midpoint_drive(
            flavor, dv, m, X, t0 + done * h, h, todo, stride, cfg.escape_radius,
            ts_buf, xs_buf,
        )
        if n:
            ts_all.append(ts_buf[:n].copy())
            xs_all.append(xs_buf[:n].copy())
        if status == _kernels.STATUS_ESCAPED:
            return np.concatenate(ts_all), np.concatenate(xs_all), TERMINATION_ESCAPED
        if status == _kernels.STATUS_UNDERFLOW:
            raise NumericError(
                f"implicit midpoint stage iteration stalled near t = {t_end!r}; "
                f"reduce fixed_step (currently {cfg.fixed_step!r})"
            )
        done += todo
    ts = np.concatenate(ts_all)
    xs = np.concatenate(xs_all)
    # land exactly on t1 (the loop overshoots by < one step when the span is
    # not a multiple of fixed_step; the last stored node is the last step)
    if (t1 > t0 and ts[-1] > t1) or (t1 < t0 and ts[-1] < t1):
        ts[-1] = t1
    return ts, xs, TERMINATION_COMPLETED


def well_crossings(traj: Trajectory, x_split: float = 0.0) -> list[Event]:
    """Refined x = x_split crossing events, recomputed from the stored nodes.

    integrate() already attaches events for the split it was given; this
    recomputes them for a different split without re-running the flow.
    """
    return _well_crossings(traj, x_split)


def refine_crossing(f: Callable[[float], float], bracket) -> float:
    """Bisection root refinement to |f| < 1e-9 or bracket width < 1e-12."""
    a, b = float(bracket[0]), float(bracket[1])
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise UsageError(f"no sign change on bracket ({a}, {b})")
    while abs(b - a) > 1e-12:
        mid = 0.5 * (a + b)
        fm = f(mid)
        if abs(fm) < 1e-9:
            return mid
        if (fa < 0) == (fm < 0):
            a, fa = mid, fm
        else:
            b, fb = mid, fm
    return 0.5 * (a + b)


def _well_crossings(traj: Trajectory, x_split: float) -> list[Event]:
    xs = traj.points[:, 0] - x_split
    sign_change = xs[:-1] * xs[1:] < 0
    events = []
    for i in np.nonzero(sign_change)[0]:
        ta, tb = traj.times[i], traj.times[i + 1]

        def fx(t):
            return float(traj.sample_dense([t])[0, 0]) - x_split

        tc = refine_crossing(fx, (min(ta, tb), max(ta, tb)))
        point = traj.sample_dense([tc])[0]
        direction = 1 if xs[i + 1] > xs[i] else -1
        events.append(Event("well_crossing", tc, point, direction))
    events.sort(key=lambda e: e.time)
    return events


def _escape_event(traj: Trajectory, radius: float) -> Event:
    t_last = traj.times[-1]
    if len(traj.times) < 2:
        return Event("escape", float(t_last), traj.points[-1].copy())
    ta = traj.times[-2]

    def fr(t):
        return float(np.max(np.abs(traj.sample_dense([t])[0]))) - radius

    if fr(ta) >= 0:
        tc = float(t_last)
    else:
        tc = refine_crossing(fr, (min(ta, t_last), max(ta, t_last)))
    # the stored terminal node (max-norm >= radius) stays the last sample;
    # the event just records the refined crossing time
    return Event("escape", tc, traj.points[-1].copy())


def conservation_report(traj: Trajectory):
    """(generator drift, constraint drift), each max|log - log0| / max(1, |log0|)."""
    if len(traj.times) == 0:
        raise UsageError("empty trajectory")
    g0 = traj.generator_log[0]
    c0 = traj.constraint_log[0]
    gd = float(np.max(np.abs(traj.generator_log - g0)) / max(1.0, abs(g0)))
    cd = float(np.max(np.abs(traj.constraint_log - c0)) / max(1.0, abs(c0)))
    return gd, cd
