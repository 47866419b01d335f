"""Fixed-step RK4 integration of the aggregated swing/turbine dynamics.

Two states: the CoI deviation ``x`` (p.u.) and the lagged part ``q`` of the
governor response::

    M x' = -dp - (D + F) x - q
    T q' = (R - F) x - q

which realizes ``(R + sTF)/(1 + sT)`` as ``F + (R - F)/(1 + sT)``.  The
system is linear with constant input, so one RK4 step is an affine map; it
is obtained by running the four RK4 stages on the basis vectors and then
applied for every step.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .freq_response import DEFAULT_F_BASE, DEFAULT_TURBINE_T, FrequencyMetrics

MAX_DT = 1e-2


class StepTooLarge(ValueError):
    pass


class NotSettled(RuntimeError):
    pass


@dataclass(frozen=True)
class SimTrace:
    t: np.ndarray
    df: np.ndarray
    dfdt: np.ndarray

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])


def rk4_step(f: Callable[[np.ndarray], np.ndarray], y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _system(p, turbine_t: float, dp: float):
    M, D, R, F = p.inertia, p.damping, p.gov_gain, p.hp_gain
    A = np.array([[-(D + F) / M, -1.0 / M], [(R - F) / turbine_t, -1.0 / turbine_t]])
    g = np.array([-dp / M, 0.0])
    return A, g


def _propagator(A: np.ndarray, g: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    hom = lambda y: A @ y
    P = np.column_stack([rk4_step(hom, e, h) for e in np.eye(2)])
    c = rk4_step(lambda y: A @ y + g, np.zeros(2), h)
    return P, c


def simulate_many(params: Sequence, dps: Sequence[float], turbine_t: float = DEFAULT_TURBINE_T,
                  horizon: float = 30.0, dt: float = 1e-3,
                  f_base: float = DEFAULT_F_BASE) -> list[SimTrace]:
    """Integrate several parameter sets on one shared time grid."""
    if dt > MAX_DT:
        raise StepTooLarge(f"dt={dt} exceeds {MAX_DT}")
    if len(params) != len(dps):
        raise ValueError("params and dps must have the same length")
    n = int(round(horizon / dt))
    B = len(params)
    P = np.empty((B, 2, 2))
    c = np.empty((B, 2))
    A_all = np.empty((B, 2, 2))
    g_all = np.empty((B, 2))
    for k, (p, dp) in enumerate(zip(params, dps)):
        A, g = _system(p, turbine_t, dp)
        A_all[k], g_all[k] = A, g
        P[k], c[k] = _propagator(A, g, dt)

    x = np.zeros((n + 1, B))
    q = np.zeros((n + 1, B))
    p00, p01, p10, p11 = P[:, 0, 0], P[:, 0, 1], P[:, 1, 0], P[:, 1, 1]
    c0, c1 = c[:, 0], c[:, 1]
    xk = np.zeros(B)
    qk = np.zeros(B)
    for i in range(1, n + 1):
        xk, qk = p00 * xk + p01 * qk + c0, p10 * xk + p11 * qk + c1
        x[i] = xk
        q[i] = qk
    xdot = A_all[:, 0, 0] * x + A_all[:, 0, 1] * q + g_all[:, 0]
    t = np.arange(n + 1) * dt
    return [SimTrace(t, f_base * x[:, k].copy(), f_base * xdot[:, k].copy()) for k in range(B)]


def simulate(p, dp: float, turbine_t: float = DEFAULT_TURBINE_T, horizon: float = 30.0,
             dt: float = 1e-3, f_base: float = DEFAULT_F_BASE) -> SimTrace:
    """RK4 trace of the CoI deviation (Hz) after a step ``dp`` (p.u.)."""
    return simulate_many([p], [dp], turbine_t, horizon, dt, f_base)[0]


def settle_horizon(p, turbine_t: float = DEFAULT_TURBINE_T, floor: float = 30.0,
                   decades: float = 9.0) -> float:
    """Horizon long enough for the slowest mode to decay by ``10**-decades``."""
    A, _ = _system(p, turbine_t, 0.0)
    rate = -max(np.linalg.eigvals(A).real)
    return max(floor, decades * np.log(10.0) / rate)


def trace_metrics(trace: SimTrace, settle_tol: float = 1e-5) -> FrequencyMetrics:
    """Empirical nadir, initial RoCoF and final deviation of a trace."""
    n = len(trace.df)
    tail = trace.df[int(0.9 * n):]
    if tail.size == 0 or np.max(np.abs(tail - trace.df[-1])) > settle_tol:
        raise NotSettled("trace has not settled within the horizon")
    k = int(np.argmax(np.abs(trace.df)))
    # steepest secant of the sampled trace, not the model's own derivative
    slope = np.diff(trace.df) / trace.dt
    j = int(np.argmax(np.abs(slope)))
    return FrequencyMetrics(nadir=float(trace.df[k]), rocof=float(slope[j]),
                            qss=float(trace.df[-1]))
