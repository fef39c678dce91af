"""Method-of-steps integration of ``x'(t) = A x(t) + A_d x(t - h)``.

The step is snapped so that ``h`` is an integer number of steps.  Then the
delayed argument of the classical fourth-order Runge-Kutta stages falls
either on a stored grid point or halfway between two, where a four-point
cubic interpolant supplies it with matching accuracy.
"""

import csv
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

log = logging.getLogger(__name__)

# cubic Lagrange weights at the midpoint of the central, first and last
# interval of four equispaced nodes
_MID = np.array([-1.0, 9.0, 9.0, -1.0]) / 16.0
_MID_LEFT = np.array([5.0, 15.0, -5.0, 1.0]) / 16.0
_MID_RIGHT = _MID_LEFT[::-1].copy()


def _midpoint(x, j, breaks):
    """Cubic estimate of the state halfway between nodes ``j`` and ``j + 1``.

    The stencil never straddles an index in `breaks`, where low-order
    derivatives of the solution jump.
    """
    lo, hi = j - 1, j + 2
    for b in breaks:
        if lo < b <= j:
            return _MID_LEFT @ x[j : j + 4]
        if j + 1 <= b < hi:
            return _MID_RIGHT @ x[j - 2 : j + 2]
    if lo < 0:
        return _MID_LEFT @ x[j : j + 4]
    return _MID @ x[lo : hi + 1]


@dataclass(frozen=True, eq=False)
class HistorySegment:
    """Uniform samples of the initial function on ``[t0, t1] = [-h, 0]``."""

    t0: float
    t1: float
    samples: np.ndarray

    def __post_init__(self):
        s = np.atleast_2d(np.asarray(self.samples, dtype=float))
        if s.shape[0] < 2:
            raise ValueError("a history segment needs at least two samples")
        if not self.t1 > self.t0:
            raise ValueError("history segment must have t1 > t0")
        object.__setattr__(self, "samples", s)

    @classmethod
    def constant(cls, value, h):
        v = np.atleast_1d(np.asarray(value, dtype=float))
        return cls(-h, 0.0, np.vstack([v, v]))

    def __call__(self, t):
        s = self.samples
        ts = np.linspace(self.t0, self.t1, s.shape[0])
        if s.shape[0] < 4:
            return np.array([np.interp(t, ts, s[:, i]) for i in range(s.shape[1])]).T
        return CubicSpline(ts, s, axis=0)(t)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    diverged: bool = False

    def norms(self):
        with np.errstate(over="ignore"):
            return np.linalg.norm(self.states, axis=1)


def integrate(sys, history=None, t_end=10.0, dt=None):
    """Integrate from ``t = 0`` to `t_end`.

    Parameters
    ----------
    sys : TimeDelaySystem
    history : HistorySegment, callable, array_like or None
        Initial function on ``[-h, 0]``; a vector means a constant history,
        None means all ones.
    dt : float, optional
        Step, at most ``h/10``; reduced so that ``h/dt`` is an integer.
        Defaults to ``h/20``.

    Returns
    -------
    Trajectory
        On ``[0, t_end]``.  ``diverged`` is set if the state became non-finite,
        in which case the trajectory stops at the last finite state.
    """
    h = sys.h
    n = sys.n
    if dt is None:
        dt = h / 20.0
    if not dt > 0:
        raise ValueError("dt must be positive")
    if dt > h / 10.0 * (1 + 1e-12):
        raise ValueError(f"dt = {dt} exceeds h/10 = {h / 10.0}")
    N = int(math.ceil(h / dt - 1e-9))
    dt = h / N
    steps = int(math.ceil(t_end / dt - 1e-9))

    if history is None:
        history = np.ones(n)
    if not callable(history):
        history = HistorySegment.constant(history, h)
    t_hist = -h + dt * np.arange(N + 1)
    x = np.empty((N + 1 + steps, n))
    x[: N + 1] = np.asarray([np.broadcast_to(history(t), (n,)) for t in t_hist], dtype=float)

    A, Ad = sys.A, sys.A_d
    diverged = False
    last = steps
    # overflow is detected below and reported through `diverged`
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(steps):
            i = N + k  # index of the current time t_k
            d0 = x[i - N]
            d1 = x[i - N + 1]
            dm = _midpoint(x, i - N, (N, 2 * N))
            xi = x[i]
            k1 = A @ xi + Ad @ d0
            k2 = A @ (xi + 0.5 * dt * k1) + Ad @ dm
            k3 = A @ (xi + 0.5 * dt * k2) + Ad @ dm
            k4 = A @ (xi + dt * k3) + Ad @ d1
            x[i + 1] = xi + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(x[i + 1])):
                log.warning("state became non-finite at t = %.6g; integration halted", (k + 1) * dt)
                diverged = True
                last = k
                break
    times = dt * np.arange(last + 1)
    return Trajectory(times, x[N : N + last + 1].copy(), diverged)


def decay_rate(traj, window, method="lstsq"):
    """Exponential rate of ``||x(t)||`` over ``window = (t0, t1)``.

    ``"lstsq"`` fits a line to ``log ||x||`` at every sample; ``"envelope"``
    fits only the local maxima, which removes the ripple of oscillatory modes.
    """
    t0, t1 = window
    if t0 < traj.times[0] or t1 > traj.times[-1] + 1e-12:
        raise ValueError(f"window {window} is outside the trajectory support")
    mask = (traj.times >= t0) & (traj.times <= t1)
    t = traj.times[mask]
    r = traj.norms()[mask]
    if t.size < 3:
        raise ValueError("window holds fewer than 3 samples")
    if np.any(r <= 0):
        raise ValueError("zero state norm inside the window")
    if method == "envelope":
        peaks = np.nonzero((r[1:-1] >= r[:-2]) & (r[1:-1] > r[2:]))[0] + 1
        if peaks.size < 2:
            raise ValueError("fewer than two peaks in the window")
        t, r = t[peaks], r[peaks]
    elif method != "lstsq":
        raise ValueError(f"unknown method {method!r}")
    return float(np.polyfit(t, np.log(r), 1)[0])


def trajectory_to_csv(traj, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"x{i + 1}" for i in range(traj.states.shape[1])])
        for t, x in zip(traj.times, traj.states):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in x])
