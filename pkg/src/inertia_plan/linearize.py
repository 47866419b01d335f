"""Nadir gain and its first-order Taylor surrogate.

The nadir can be written ``df_max = -f_base * dp / h(D, R, F, M)`` with the
gain ``h = (D + R) / (1 + overshoot)``.  ``h`` is linearized around the
current fleet with central finite differences; the time of the nadir is
recomputed inside every perturbed evaluation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .freq_response import DEFAULT_TURBINE_T, CoiParams, overshoot

# reference synchronous generator on its own base (M=14, D=0.9, K=1, R=0.03, F=0.35)
REF_SG1 = CoiParams(damping=0.9, gov_gain=1.0 / 0.03, hp_gain=0.35 / 0.03, inertia=14.0)


class StepUnderflow(ValueError):
    pass


def _coi(p) -> CoiParams:
    if isinstance(p, CoiParams):
        return p
    return CoiParams(p.damping, p.gov_gain, p.hp_gain, p.inertia)


def nadir_gain(p, turbine_t: float = DEFAULT_TURBINE_T) -> float:
    """``h`` such that the nadir equals ``-f_base * dp / h``."""
    p = _coi(p)
    return (p.damping + p.gov_gain) / (1.0 + overshoot(p, turbine_t))


@dataclass(frozen=True)
class TaylorPoint:
    point: CoiParams
    h0: float
    partials: CoiParams
    turbine_t: float


def gradient(p, turbine_t: float = DEFAULT_TURBINE_T, rel_step: float = 1e-6) -> TaylorPoint:
    """Central-difference gradient of ``h`` in (D, R, F, M)."""
    x = np.array(_coi(p), dtype=float)
    if np.any(np.abs(x) < 1e-12):
        raise StepUnderflow(f"coordinate too small for a relative step: {tuple(x)}")
    partials = []
    for k in range(4):
        step = rel_step * abs(x[k])
        up, dn = x.copy(), x.copy()
        up[k] += step
        dn[k] -= step
        partials.append(float(nadir_gain(CoiParams(*up), turbine_t)
                         - nadir_gain(CoiParams(*dn), turbine_t)) / (2.0 * step))
    point = CoiParams(*x.tolist())
    return TaylorPoint(point, nadir_gain(point, turbine_t), CoiParams(*partials), turbine_t)


def taylor_h(tp: TaylorPoint, query, scale: float = 1.0) -> float:
    """First-order surrogate ``h0 + grad . (query * scale - point)``.

    ``scale`` converts kW-weighted aggregates back to per-unit (pass
    ``1 / P_base`` together with kW-weighted ``query``).
    """
    q = _coi(query)
    return tp.h0 + math.fsum(g * (qi * scale - xi) for g, qi, xi in zip(tp.partials, q, tp.point))


@dataclass(frozen=True)
class ApproxErrorStats:
    """Nadir approximation errors in p.u. frequency; ``rel`` is dimensionless."""

    mean_abs: float
    max_abs: float
    mean_rel: float
    max_rel: float
    count: int

    def as_dict(self) -> dict:
        return {"mean_abs_pu": self.mean_abs, "max_abs_pu": self.max_abs,
                "mean_rel": self.mean_rel, "max_rel": self.max_rel, "count": self.count}


def error_stats(n: int, center=REF_SG1, spread: float = 0.2, dp: float = 0.2,
                turbine_t: float = DEFAULT_TURBINE_T, seed: int = 0) -> ApproxErrorStats:
    """Sampled error of the linearized nadir around ``center``.

    Each of (D, R, F, M) is drawn independently and uniformly within
    ``center * (1 +/- spread)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    tp = gradient(center, turbine_t)
    rng = np.random.default_rng(seed)
    c = np.array(tp.point)
    samples = c * (1.0 + rng.uniform(-spread, spread, size=(n, 4)))
    abs_err = np.empty(n)
    rel_err = np.empty(n)
    for i, s in enumerate(samples):
        q = CoiParams(*s)
        exact = -dp / nadir_gain(q, turbine_t)
        approx = -dp / taylor_h(tp, q)
        abs_err[i] = abs(exact - approx)
        rel_err[i] = abs_err[i] / abs(exact) if exact != 0 else 0.0
    return ApproxErrorStats(float(abs_err.mean()), float(abs_err.max()),
                            float(rel_err.mean()), float(rel_err.max()), n)
