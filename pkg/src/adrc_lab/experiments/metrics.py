"""Step-response and disturbance-rejection metrics on trajectories."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..lti import InvalidInput
from ..simulate import Trajectory

SETTLING_BAND = 0.02

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


@dataclass(frozen=True)
class Metrics:
    """Scalar quality measures of one step response.

    settling_time_2pct is inf when the response never stays inside the
    band until the end of the horizon. steady_state_error is signed
    (reference minus the mean output over the final tenth of the window).
    """

    settling_time_2pct: float
    overshoot_pct: float
    iae: float
    steady_state_error: float
    u_max: float


def compute_metrics(traj: Trajectory, step_time: float,
                    step_size: float | None = None) -> Metrics:
    """Evaluate the response to the reference step at step_time.

    Settling is the last instant the clean output leaves the +-2% band
    around the final reference; overshoot is relative to the step size.
    """
    idx0 = int(np.searchsorted(traj.t, step_time - 1e-9))
    if idx0 >= len(traj.t):
        raise InvalidInput("step_time is past the end of the trajectory")
    r_before = traj.r[idx0 - 1] if idx0 > 0 else 0.0
    actual_step = traj.r[idx0] - r_before
    if abs(actual_step) < 1e-12:
        raise InvalidInput(f"reference has no step at t={step_time:g}")
    if step_size is None:
        step_size = float(actual_step)

    t = traj.t[idx0:]
    y = traj.y_clean[idx0:]
    r_final = float(traj.r[-1])
    band = SETTLING_BAND * abs(step_size)
    outside = np.abs(y - r_final) > band
    if outside[-1]:
        settling = math.inf
    elif not outside.any():
        settling = 0.0
    else:
        settling = float(t[np.nonzero(outside)[0][-1]] - step_time)

    direction = 1.0 if step_size > 0 else -1.0
    peak = float(np.max(direction * (y - r_final)))
    overshoot = max(0.0, 100.0 * peak / abs(step_size))

    iae = float(_trapezoid(np.abs(traj.r[idx0:] - y), t))

    tail = max(1, len(y) // 10)
    sse = r_final - float(np.mean(y[-tail:]))
    u_max = float(np.max(np.abs(traj.u_raw[idx0:])))
    return Metrics(settling_time_2pct=settling, overshoot_pct=overshoot,
                   iae=iae, steady_state_error=sse, u_max=u_max)


def iae_between(traj: Trajectory, t_start: float, t_end: float) -> float:
    """Integral of |r - y_clean| over [t_start, t_end] (trapezoid rule)."""
    lo = int(np.searchsorted(traj.t, t_start - 1e-9))
    hi = int(np.searchsorted(traj.t, t_end + 1e-9))
    if hi - lo < 2:
        raise InvalidInput("window contains fewer than two samples")
    err = np.abs(traj.r[lo:hi] - traj.y_clean[lo:hi])
    return float(_trapezoid(err, traj.t[lo:hi]))


def delta_u_std(traj: Trajectory, t_start: float, sample_time: float) -> float:
    """Sample standard deviation of the controller-output increments at
    the controller's own sample instants, from t_start on.

    Quantifies steady-state actuation jitter under measurement noise.
    """
    dt = traj.t[1] - traj.t[0]
    ns = max(1, int(round(sample_time / dt)))
    start = int(np.searchsorted(traj.t, t_start - 1e-9))
    start += (-start) % ns
    samples = traj.u_raw[start::ns]
    if len(samples) < 3:
        raise InvalidInput("not enough samples after t_start")
    return float(np.std(np.diff(samples), ddof=1))
