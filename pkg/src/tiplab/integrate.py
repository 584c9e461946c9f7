"""Adaptive explicit integration of nonautonomous ODEs.

Thin stepping loop around scipy's embedded Runge-Kutta 4(5) pair, with
dense output kept per accepted step, a state-norm escape threshold for
finite-time blow-up detection, and an explicit step-underflow status for
singularities the norm test does not catch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.integrate import RK45
from scipy.optimize import brentq

__all__ = [
    "COMPLETED",
    "ESCAPED",
    "STEP_UNDERFLOW",
    "VectorFieldHandle",
    "IntegratorConfig",
    "Trajectory",
    "integrate",
    "dense_eval",
]

COMPLETED = "completed"
ESCAPED = "escaped"
STEP_UNDERFLOW = "step_underflow"

# Step budget for the post-escape refinement of a blow-up time.
_REFINE_MAX_STEPS = 8000


@dataclass(frozen=True)
class VectorFieldHandle:
    """A right-hand side f(x, t, params) of fixed state dimension."""

    dimension: int
    rhs: Callable[[np.ndarray, float, Mapping], np.ndarray]
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be a positive integer")

    def __call__(self, x: np.ndarray, t: float) -> np.ndarray:
        out = np.atleast_1d(np.asarray(self.rhs(x, t, self.params), dtype=float))
        if out.shape != (self.dimension,):
            raise ValueError(
                f"rhs returned shape {out.shape}, expected ({self.dimension},)"
            )
        return out


@dataclass(frozen=True)
class IntegratorConfig:
    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    max_step: float = 0.1
    min_step: float = 1e-13
    escape_norm: float = 1e6

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol", "max_step", "min_step", "escape_norm"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and positive, got {v}")
        if not self.min_step < self.max_step:
            raise ValueError("min_step must be smaller than max_step")


@dataclass
class Trajectory:
    """Densely sampled solution path with a termination status.

    ``times`` are strictly increasing for forward integration and strictly
    decreasing for backward integration.  When ``status == ESCAPED`` the
    ``escape_bracket`` is a time interval (in ascending order) that brackets
    the finite-time singularity whenever the norm escape reflects genuine
    blow-up; its lower end is the instant the state norm crossed the
    escape threshold.
    """

    times: np.ndarray
    states: np.ndarray
    status: str
    escape_bracket: tuple[float, float] | None = None
    underflow_time: float | None = None
    segments: list = field(default_factory=list, repr=False)

    @property
    def t0(self) -> float:
        return float(self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def direction(self) -> float:
        return 1.0 if self.times[-1] >= self.times[0] else -1.0

    def eval(self, t):
        """Interpolated state at time(s) t inside the sampled range."""
        if not self.segments:
            raise ValueError("trajectory carries no dense output")
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        lo = min(self.t0, self.t_end)
        hi = max(self.t0, self.t_end)
        if np.any(t_arr < lo - 1e-12) or np.any(t_arr > hi + 1e-12):
            raise ValueError(f"time out of sampled range [{lo}, {hi}]")
        knots = self.times if self.direction > 0 else self.times[::-1]
        out = np.empty((t_arr.size, self.states.shape[1]))
        idx = np.clip(np.searchsorted(knots, t_arr, side="right") - 1, 0, len(self.segments) - 1)
        if self.direction < 0:
            idx = len(self.segments) - 1 - idx
        for i, (ti, k) in enumerate(zip(t_arr, idx)):
            out[i] = self.segments[k](ti)
        return out[0] if np.isscalar(t) or np.ndim(t) == 0 else out


def dense_eval(traj: Trajectory, t):
    """Evaluate a trajectory's dense output at time(s) t."""
    return traj.eval(t)


def _escape_bracket(fun, seg, t_esc, y_esc, t1, cfg, direction):
    """Bracket the blow-up time after the escape norm was crossed.

    The crossing instant inside the accepted step gives the lower end.
    Integration then continues (escape check off) until the step size
    underflows, which pins the singularity from below; a small guard
    extrapolation closes the bracket from above.
    """
    nrm = lambda t: float(np.linalg.norm(np.atleast_1d(seg(t)))) - cfg.escape_norm
    a, b = (seg.t_old, seg.t) if direction > 0 else (seg.t, seg.t_old)
    if nrm(a) >= 0:
        t_cross = a
    elif nrm(b) <= 0:
        t_cross = b
    else:
        t_cross = brentq(nrm, a, b, xtol=1e-14)

    # Loose tolerances here: only the blow-up *time* matters, and step-size
    # control still contracts geometrically toward the singularity.  Tight
    # tolerances would need tens of thousands of steps to reach overflow.
    ext = max(10 * cfg.max_step, 1e3 * abs(t_esc - t_cross))
    solver = RK45(
        fun, t_esc, y_esc, t_bound=t_esc + direction * ext,
        max_step=cfg.max_step, rtol=1e-3, atol=max(1.0, cfg.abs_tol),
    )
    singular = False
    nsteps = 0
    with np.errstate(all="ignore"):
        while solver.status == "running" and nsteps < _REFINE_MAX_STEPS:
            solver.step()
            nsteps += 1
            if solver.status == "failed":
                singular = True
                break
            if not np.all(np.isfinite(solver.y)):
                singular = True
                break
    t_reach = float(solver.t)
    if singular:
        guard = max(100 * abs(np.spacing(t_reach)), 0.01 * abs(t_reach - t_cross), cfg.min_step)
        upper = t_reach + direction * guard
    else:
        # No singularity found within the probe; report the verified extent.
        upper = t_reach
    lo, hi = sorted((float(t_cross), float(upper)))
    return (lo, hi)


def integrate(
    field: VectorFieldHandle,
    x0,
    t0: float,
    t1: float,
    cfg: IntegratorConfig | None = None,
    dense: bool = True,
) -> Trajectory:
    """Integrate dx/dt = f(x, t) from (x0, t0) to t1 (forward or backward).

    Terminates early with status ``escaped`` when the state norm reaches
    ``cfg.escape_norm`` (with a blow-up time bracket) or ``step_underflow``
    when step control drives the step below ``cfg.min_step`` without an
    escape event.
    """
    cfg = cfg or IntegratorConfig()
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.shape != (field.dimension,):
        raise ValueError(f"x0 has shape {x0.shape}, expected ({field.dimension},)")
    if not np.all(np.isfinite(x0)):
        raise ValueError("x0 must be finite")
    if t1 == t0:
        raise ValueError("t1 must differ from t0")
    direction = 1.0 if t1 > t0 else -1.0

    fun = lambda t, y: field(y, t)
    if float(np.linalg.norm(x0)) >= cfg.escape_norm:
        return Trajectory(
            np.array([t0]), x0[None, :], ESCAPED, escape_bracket=(t0, t0)
        )

    solver = RK45(
        fun, t0, x0, t_bound=t1,
        max_step=cfg.max_step, rtol=cfg.rel_tol, atol=cfg.abs_tol,
    )
    times = [float(t0)]
    states = [x0.copy()]
    segments: list = []
    status = COMPLETED
    bracket = None
    underflow_time = None

    while solver.status == "running":
        solver.step()
        if solver.status == "failed":
            status = STEP_UNDERFLOW
            underflow_time = float(solver.t)
            break
        seg = solver.dense_output()
        if dense:
            segments.append(seg)
        times.append(float(solver.t))
        states.append(solver.y.copy())
        norm = float(np.linalg.norm(solver.y))
        if not np.isfinite(norm) or norm >= cfg.escape_norm:
            status = ESCAPED
            bracket = _escape_bracket(fun, seg, solver.t, solver.y, t1, cfg, direction)
            break
        if solver.h_abs < cfg.min_step and abs(solver.t_bound - solver.t) > cfg.min_step:
            status = STEP_UNDERFLOW
            underflow_time = float(solver.t)
            break

    return Trajectory(
        np.asarray(times),
        np.vstack(states),
        status,
        escape_bracket=bracket,
        underflow_time=underflow_time,
        segments=segments,
    )
