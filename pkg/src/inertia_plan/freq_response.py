"""Centre-of-inertia frequency response of a mixed SG/CIG fleet.

The fleet is reduced to four per-unit parameters on a common system base
(inertia ``M``, damping ``D``, governor gain ``R`` and high-pressure gain
``F``) plus a shared turbine time constant ``T``.  The post-disturbance
deviation then follows the second-order response

    G(s) = (1 + sT) / (M T s^2 + (M + T (D + F)) s + D + R)

from which nadir, maximum RoCoF and quasi-steady-state deviation have closed
forms.  Disturbances are step changes ``dp`` in per-unit of the fleet base;
islanding with grid import ``p`` corresponds to ``dp = -p / P_base``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

DEFAULT_TURBINE_T = 8.0
DEFAULT_F_BASE = 50.0


class FrequencyModelError(ValueError):
    """Base class for invalid inputs to the frequency model."""


class EmptyFleet(FrequencyModelError):
    pass


class Overdamped(FrequencyModelError):
    pass


class NonPositiveStiffness(FrequencyModelError):
    pass


class NegativeRadicand(FrequencyModelError):
    pass


class ZeroInertia(FrequencyModelError):
    pass


# --------------------------------------------------------------------------
# unit and fleet description


@dataclass(frozen=True)
class SyncGenParams:
    inertia: float
    damping: float
    gain: float
    droop: float
    hp_fraction: float
    capacity: float

    def __post_init__(self):
        if self.inertia <= 0 or self.droop <= 0 or self.gain <= 0 or self.capacity <= 0:
            raise FrequencyModelError(f"invalid synchronous generator parameters: {self}")
        if not 0.0 <= self.hp_fraction <= 1.0:
            raise FrequencyModelError(f"turbine fraction outside [0, 1]: {self.hp_fraction}")


@dataclass(frozen=True)
class DroopCigParams:
    gain: float
    droop: float
    capacity: float

    def __post_init__(self):
        if self.droop <= 0 or self.capacity <= 0:
            raise FrequencyModelError(f"invalid droop CIG parameters: {self}")


@dataclass(frozen=True)
class VsmCigParams:
    inertia: float
    damping: float
    capacity: float

    def __post_init__(self):
        if self.inertia < 0 or self.damping < 0 or self.capacity <= 0:
            raise FrequencyModelError(f"invalid VSM CIG parameters: {self}")


@dataclass(frozen=True)
class FleetComposition:
    """Units with their commitment flag, grouped by control type.

    Each entry is a ``(params, committed)`` pair; fixed-output (grid-feeding)
    converters are described by their capacity alone.
    """

    sync: tuple[tuple[SyncGenParams, bool], ...] = ()
    droop: tuple[tuple[DroopCigParams, bool], ...] = ()
    vsm: tuple[tuple[VsmCigParams, bool], ...] = ()
    fixed: tuple[tuple[float, bool], ...] = ()

    def __post_init__(self):
        for name in ("sync", "droop", "vsm", "fixed"):
            object.__setattr__(self, name, tuple((p, bool(c)) for p, c in getattr(self, name)))


# --------------------------------------------------------------------------
# aggregation


class CoiParams(NamedTuple):
    """The four fleet parameters entering the dynamics, in (D, R, F, M) order."""

    damping: float
    gov_gain: float
    hp_gain: float
    inertia: float


@dataclass(frozen=True)
class AggregateParams:
    """Normalized and kW-weighted aggregates of a committed fleet.

    ``sg_*`` values are weighted averages over synchronous units (SG base),
    ``cig_*`` over converters (CIG base).  ``inertia``, ``damping``,
    ``gov_gain`` and ``hp_gain`` are on the system base ``p_base`` and are
    what the dynamics use.  ``*_kw`` values are the non-normalized sums
    (per-unit times kW).
    """

    sg_inertia: float
    sg_damping: float
    sg_gov_gain: float
    sg_hp_gain: float
    cig_inertia: float
    cig_damping: float
    cig_droop_gain: float
    inertia: float
    damping: float
    gov_gain: float
    hp_gain: float
    p_sg: float
    p_cig: float
    p_base: float
    sg_inertia_kw: float
    sg_damping_kw: float
    gov_gain_kw: float
    hp_gain_kw: float
    cig_inertia_kw: float
    cig_damping_kw: float
    cig_droop_kw: float
    inertia_kw: float
    damping_kw: float

    @property
    def coi(self) -> CoiParams:
        return CoiParams(self.damping, self.gov_gain, self.hp_gain, self.inertia)

    @property
    def coi_kw(self) -> CoiParams:
        return CoiParams(self.damping_kw, self.gov_gain_kw, self.hp_gain_kw, self.inertia_kw)

    @property
    def stiffness(self) -> float:
        return self.damping + self.gov_gain


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def aggregate(fleet: FleetComposition) -> AggregateParams:
    """Aggregate committed units into CoI parameters.

    Uncommitted units contribute nothing.  Fixed-output converters only add
    capacity to the CIG base.  A droop converter contributes damping
    ``K_d / R_d`` per unit of its capacity.
    """
    sync = [p for p, c in fleet.sync if c]
    droop = [p for p, c in fleet.droop if c]
    vsm = [p for p, c in fleet.vsm if c]
    fixed = [cap for cap, c in fleet.fixed if c]

    p_sg = math.fsum(g.capacity for g in sync)
    p_cig = math.fsum([d.capacity for d in droop] + [v.capacity for v in vsm] + list(fixed))
    p_base = p_sg + p_cig
    if p_base <= 0:
        raise EmptyFleet("no committed unit: system base power is zero")

    m_s = math.fsum(g.inertia * g.capacity for g in sync)
    d_s = math.fsum(g.damping * g.capacity for g in sync)
    r_s = math.fsum(g.gain / g.droop * g.capacity for g in sync)
    f_s = math.fsum(g.gain * g.hp_fraction / g.droop * g.capacity for g in sync)
    m_c = math.fsum(v.inertia * v.capacity for v in vsm)
    d_c = math.fsum(v.damping * v.capacity for v in vsm)
    r_c = math.fsum(d.gain / d.droop * d.capacity for d in droop)
    m_tot = m_s + m_c
    d_tot = d_s + d_c + r_c

    return AggregateParams(
        sg_inertia=_ratio(m_s, p_sg),
        sg_damping=_ratio(d_s, p_sg),
        sg_gov_gain=_ratio(r_s, p_sg),
        sg_hp_gain=_ratio(f_s, p_sg),
        cig_inertia=_ratio(m_c, p_cig),
        cig_damping=_ratio(d_c, p_cig),
        cig_droop_gain=_ratio(r_c, p_cig),
        inertia=m_tot / p_base,
        damping=d_tot / p_base,
        gov_gain=r_s / p_base,
        hp_gain=f_s / p_base,
        p_sg=p_sg,
        p_cig=p_cig,
        p_base=p_base,
        sg_inertia_kw=m_s,
        sg_damping_kw=d_s,
        gov_gain_kw=r_s,
        hp_gain_kw=f_s,
        cig_inertia_kw=m_c,
        cig_damping_kw=d_c,
        cig_droop_kw=r_c,
        inertia_kw=m_tot,
        damping_kw=d_tot,
    )


# --------------------------------------------------------------------------
# second-order coefficients


@dataclass(frozen=True)
class SecondOrderCoeffs:
    turbine_t: float
    omega_n: float
    zeta: float
    omega_d: float
    phi: float
    t_nadir: float


def _check_stiffness(p) -> None:
    if p.inertia <= 0:
        raise ZeroInertia("aggregate inertia must be positive")
    if p.damping + p.gov_gain <= 0:
        raise NonPositiveStiffness("D + R must be positive")


def _natural(p, turbine_t: float) -> tuple[float, float]:
    """Return (omega_n, zeta) without regime checks."""
    _check_stiffness(p)
    if turbine_t <= 0:
        raise FrequencyModelError("turbine time constant must be positive")
    mt = p.inertia * turbine_t
    stiff = p.damping + p.gov_gain
    omega_n = math.sqrt(stiff / mt)
    zeta = (p.inertia + turbine_t * (p.damping + p.hp_gain)) / (2.0 * math.sqrt(mt * stiff))
    return omega_n, zeta


def coefficients(p, turbine_t: float = DEFAULT_TURBINE_T) -> SecondOrderCoeffs:
    """Underdamped second-order coefficients; raises :class:`Overdamped` for zeta >= 1."""
    omega_n, zeta = _natural(p, turbine_t)
    if zeta >= 1.0:
        raise Overdamped(f"damping ratio {zeta:.6g} >= 1; no oscillatory closed form")
    root = math.sqrt(1.0 - zeta * zeta)
    omega_d = omega_n * root
    phi = math.asin(root)
    # atan2 picks the first extremum also when zeta*omega_n < 1/T
    t_nadir = math.atan2(omega_d, omega_n * zeta - 1.0 / turbine_t) / omega_d
    return SecondOrderCoeffs(turbine_t, omega_n, zeta, omega_d, phi, t_nadir)


def _radicand(p, turbine_t: float) -> float:
    rad = turbine_t * (p.gov_gain - p.hp_gain) / p.inertia
    if rad < 0:
        if rad > -1e-14 * max(1.0, abs(p.gov_gain)):
            return 0.0
        raise NegativeRadicand("governor gain below high-pressure gain (R < F)")
    return rad


def nadir_time(p, turbine_t: float = DEFAULT_TURBINE_T) -> float | None:
    """Time of the first extremum of the step response, any damping regime.

    Returns ``None`` when the response approaches its final value
    monotonically (no interior extremum).
    """
    omega_n, zeta = _natural(p, turbine_t)
    a = zeta * omega_n
    c = a - 1.0 / turbine_t
    disc = omega_n * omega_n - a * a
    scale = omega_n * omega_n
    if disc > 1e-12 * scale:
        wd = math.sqrt(disc)
        return math.atan2(wd, c) / wd
    if disc < -1e-12 * scale:
        w = math.sqrt(-disc)
        if c <= w:
            return None
        return math.atanh(w / c) / w
    return 1.0 / c if c > 0 else None


def overshoot(p, turbine_t: float = DEFAULT_TURBINE_T) -> float:
    """Nadir excess over the quasi-steady-state deviation, as a fraction of it.

    ``sqrt(T (R - F) / M) * exp(-zeta * omega_n * t_m)``; the same expression
    holds for overdamped fleets with a real ``t_m`` and is zero when no
    interior extremum exists.
    """
    rad = _radicand(p, turbine_t)
    t_m = nadir_time(p, turbine_t)
    if t_m is None or rad == 0.0:
        return 0.0
    omega_n, zeta = _natural(p, turbine_t)
    return math.sqrt(rad) * math.exp(-zeta * omega_n * t_m)


# --------------------------------------------------------------------------
# metrics


def nadir(p, coeffs: SecondOrderCoeffs, dp: float, f_base: float = DEFAULT_F_BASE) -> float:
    """Signed frequency nadir in Hz for an underdamped fleet."""
    rad = _radicand(p, coeffs.turbine_t)
    os_ = math.sqrt(rad) * math.exp(-coeffs.zeta * coeffs.omega_n * coeffs.t_nadir)
    return f_base * (-dp / (p.damping + p.gov_gain)) * (1.0 + os_)


def nadir_general(p, dp: float, turbine_t: float = DEFAULT_TURBINE_T,
                  f_base: float = DEFAULT_F_BASE) -> float:
    """Signed frequency nadir in Hz for any damping regime."""
    _check_stiffness(p)
    return f_base * (-dp / (p.damping + p.gov_gain)) * (1.0 + overshoot(p, turbine_t))


def rocof(p, dp: float, f_base: float = DEFAULT_F_BASE) -> float:
    """Maximum (initial) rate of change of frequency in Hz/s."""
    if p.inertia <= 0:
        raise ZeroInertia("aggregate inertia must be positive")
    return f_base * (-dp / p.inertia)


def qss(p, dp: float, f_base: float = DEFAULT_F_BASE) -> float:
    """Quasi-steady-state deviation in Hz."""
    stiff = p.damping + p.gov_gain
    if stiff <= 0:
        raise NonPositiveStiffness("D + R must be positive")
    return f_base * (-dp / stiff)


def trajectory(p, coeffs: SecondOrderCoeffs, dp: float, t, f_base: float = DEFAULT_F_BASE):
    """Closed-form deviation in Hz at time(s) ``t`` (underdamped fleets).

    Uses ``-dp/M * (1/(T wn^2) + exp(-a t)/wd * (sin(wd t) - sin(wd t + phi)/(wn T)))``
    which starts at zero with slope ``-dp/M`` and passes through the nadir at
    ``t_m``.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("time must be non-negative")
    T = coeffs.turbine_t
    wn, wd = coeffs.omega_n, coeffs.omega_d
    a = coeffs.zeta * wn
    env = np.exp(-a * t_arr) / wd
    osc = np.sin(wd * t_arr) - np.sin(wd * t_arr + coeffs.phi) / (wn * T)
    out = f_base * (-dp / p.inertia) * (1.0 / (T * wn * wn) + env * osc)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class FrequencyMetrics:
    nadir: float
    rocof: float
    qss: float


def metrics(p, dp: float, turbine_t: float = DEFAULT_TURBINE_T,
            f_base: float = DEFAULT_F_BASE) -> FrequencyMetrics:
    """All three metrics, valid for any damping regime."""
    return FrequencyMetrics(
        nadir=nadir_general(p, dp, turbine_t, f_base),
        rocof=rocof(p, dp, f_base),
        qss=qss(p, dp, f_base),
    )


# --------------------------------------------------------------------------
# limits


@dataclass(frozen=True)
class SecurityLimits:
    nadir: float = 0.6
    rocof: float = 2.0
    qss: float = 0.2
    f_base: float = DEFAULT_F_BASE

    def __post_init__(self):
        if min(self.nadir, self.rocof, self.qss, self.f_base) <= 0:
            raise ValueError("security limits and f_base must be positive")


@dataclass(frozen=True)
class LimitCheck:
    metric: str
    value: float
    bound: float
    margin: float
    ok: bool


@dataclass(frozen=True)
class LimitReport:
    checks: tuple[LimitCheck, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def __getitem__(self, metric: str) -> LimitCheck:
        for c in self.checks:
            if c.metric == metric:
                return c
        raise KeyError(metric)


def check_limits(m: FrequencyMetrics, limits: SecurityLimits, tol: float = 0.0) -> LimitReport:
    """Symmetric bound check; margin is ``bound - |value|``."""
    checks = []
    for name in ("nadir", "rocof", "qss"):
        value = getattr(m, name)
        bound = getattr(limits, name)
        margin = bound - abs(value)
        checks.append(LimitCheck(name, value, bound, margin, margin >= -tol))
    return LimitReport(tuple(checks))


def fleet_from_rows(rows: Iterable[dict]) -> FleetComposition:
    """Build a fleet from unit dictionaries (``kind``, ``capacity_kw``, ``params``, ``committed``)."""
    sync, droop, vsm, fixed = [], [], [], []
    for row in rows:
        kind = row["kind"]
        cap = float(row["capacity_kw"])
        prm = row.get("params", {})
        committed = bool(row.get("committed", True))
        if kind == "sg":
            sync.append((SyncGenParams(prm["M"], prm["D"], prm["K"], prm["R"], prm["F"], cap), committed))
        elif kind == "droop":
            droop.append((DroopCigParams(prm["K"], prm["R"], cap), committed))
        elif kind == "vsm":
            vsm.append((VsmCigParams(prm["M"], prm["D"], cap), committed))
        elif kind == "fixed":
            fixed.append((cap, committed))
        else:
            raise KeyError(f"unknown unit kind {kind!r}")
    return FleetComposition(tuple(sync), tuple(droop), tuple(vsm), tuple(fixed))


def coi_from_sequence(values: Sequence[float]) -> CoiParams:
    return CoiParams(*(float(v) for v in values))
