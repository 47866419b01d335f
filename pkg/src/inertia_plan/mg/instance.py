"""Planning instance: network, units, representative days, penalties, limits.

All powers are kW, energy prices $/kWh, investment costs $ per year.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from ..freq_response import (DEFAULT_F_BASE, DEFAULT_TURBINE_T, FleetComposition,
                             SecurityLimits, fleet_from_rows)

UNIT_KINDS = ("sg", "vsm", "droop", "fixed")
RESOURCES = ("dispatchable", "pv")
WEIGHT_TOL = 1e-6


class InstanceError(ValueError):
    """Invalid instance data; ``path`` names the offending JSON field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class Line:
    name: str
    from_bus: str
    to_bus: str
    capacity_kw: float


@dataclass(frozen=True)
class GridInterface:
    bus: str
    rating_kw: float
    tariff: tuple[float, ...]  # $/kWh per period of the day


@dataclass(frozen=True)
class Unit:
    name: str
    bus: str
    kind: str
    capacity_kw: float
    existing: bool
    investment_cost: float
    marginal_cost: float
    resource: str
    reserve_fraction: float
    params: Mapping[str, float] = field(default_factory=dict)

    def fleet_row(self, committed: bool) -> dict:
        return {"kind": self.kind, "capacity_kw": self.capacity_kw,
                "params": dict(self.params), "committed": committed}


@dataclass(frozen=True)
class RepresentativeDay:
    weight: float
    demand: Mapping[str, tuple[float, ...]]
    pv: tuple[float, ...]
    name: str = ""

    def __post_init__(self):
        if not self.weight > 0:
            raise ValueError(f"day weight must be positive, got {self.weight}")
        if any(a < 0 or a > 1 for a in self.pv):
            raise ValueError("PV availability must lie in [0, 1]")


@dataclass(frozen=True)
class Penalties:
    shift: float
    disconnection: float
    shift_fraction: float = 0.3


@dataclass(frozen=True)
class PlanningInstance:
    name: str
    buses: tuple[str, ...]
    lines: tuple[Line, ...]
    grid: GridInterface
    units: tuple[Unit, ...]
    days: tuple[RepresentativeDay, ...]
    penalties: Penalties
    limits: SecurityLimits
    period_hours: float = 1.0
    turbine_t: float = DEFAULT_TURBINE_T

    @property
    def f_base(self) -> float:
        return self.limits.f_base

    @property
    def periods(self) -> int:
        return len(self.grid.tariff)

    @property
    def candidates(self) -> tuple[Unit, ...]:
        return tuple(u for u in self.units if not u.existing)

    @property
    def existing(self) -> tuple[Unit, ...]:
        return tuple(u for u in self.units if u.existing)

    def slots(self) -> list[tuple[int, int]]:
        """All (day, period) pairs in a fixed order."""
        return [(o, t) for o in range(len(self.days)) for t in range(self.periods)]

    def availability(self, unit: Unit, day: int, period: int) -> float:
        return self.days[day].pv[period] if unit.resource == "pv" else 1.0

    def demand(self, bus: str, day: int, period: int) -> float:
        prof = self.days[day].demand.get(bus)
        return prof[period] if prof is not None else 0.0

    def fleet(self, built: Mapping[str, bool]) -> FleetComposition:
        """Fleet with existing units plus the candidates flagged in ``built``."""
        rows = [u.fleet_row(u.existing or bool(built.get(u.name, False))) for u in self.units]
        return fleet_from_rows(rows)

    def with_limits(self, **kw) -> "PlanningInstance":
        return replace(self, limits=replace(self.limits, **kw))

    def with_(self, **kw) -> "PlanningInstance":
        return replace(self, **kw)


# --------------------------------------------------------------------------
# loading


def _get(obj: Mapping, key: str, path: str, default: Any = ...):
    if not isinstance(obj, Mapping):
        raise InstanceError(path, "expected an object")
    if key not in obj:
        if default is ...:
            raise InstanceError(f"{path}.{key}" if path else key, "missing field")
        return default
    return obj[key]


def _num(obj: Mapping, key: str, path: str, default: Any = ..., lo: float | None = None,
         positive: bool = False) -> float:
    where = f"{path}.{key}" if path else key
    raw = _get(obj, key, path, default)
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise InstanceError(where, f"expected a number, got {raw!r}")
    val = float(raw)
    if not math.isfinite(val):
        raise InstanceError(where, "must be finite")
    if lo is not None and val < lo:
        raise InstanceError(where, f"must be >= {lo}, got {val}")
    if positive and val <= 0:
        raise InstanceError(where, f"must be > 0, got {val}")
    return val


def _vector(raw, where: str, length: int, lo: float | None = None, hi: float | None = None):
    if not isinstance(raw, list):
        raise InstanceError(where, "expected a list")
    if len(raw) != length:
        raise InstanceError(where, f"expected {length} values, got {len(raw)}")
    out = []
    for k, v in enumerate(raw):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise InstanceError(f"{where}[{k}]", f"expected a number, got {v!r}")
        if lo is not None and v < lo:
            raise InstanceError(f"{where}[{k}]", f"must be >= {lo}, got {v}")
        if hi is not None and v > hi:
            raise InstanceError(f"{where}[{k}]", f"must be <= {hi}, got {v}")
        out.append(float(v))
    return tuple(out)


_PARAM_KEYS = {"sg": ("M", "D", "K", "R", "F"), "vsm": ("M", "D"), "droop": ("K", "R"), "fixed": ()}


def instance_from_dict(doc: Mapping) -> PlanningInstance:
    if not isinstance(doc, Mapping):
        raise InstanceError("$", "top level must be an object")
    period_hours = _num(doc, "period_hours", "", 1.0, positive=True)
    periods = 24.0 / period_hours
    if abs(periods - round(periods)) > 1e-9:
        raise InstanceError("period_hours", "must divide 24")
    periods = int(round(periods))

    buses_raw = _get(doc, "buses", "")
    if not isinstance(buses_raw, list) or not buses_raw:
        raise InstanceError("buses", "expected a non-empty list")
    buses = []
    for i, b in enumerate(buses_raw):
        bid = b if isinstance(b, str) else _get(b, "id", f"buses[{i}]")
        if not isinstance(bid, str) or bid in buses:
            raise InstanceError(f"buses[{i}]", f"bus ids must be unique strings, got {bid!r}")
        buses.append(bid)

    def bus_ref(raw, where):
        if raw not in buses:
            raise InstanceError(where, f"unknown bus {raw!r}")
        return raw

    lines = []
    for i, ln in enumerate(_get(doc, "lines", "", [])):
        p = f"lines[{i}]"
        a = bus_ref(_get(ln, "from", p), f"{p}.from")
        b = bus_ref(_get(ln, "to", p), f"{p}.to")
        if a == b:
            raise InstanceError(p, "line endpoints must differ")
        lines.append(Line(ln.get("name", f"L{i}"), a, b, _num(ln, "capacity_kw", p, lo=0.0)))

    g = _get(doc, "grid", "")
    tariff_raw = _get(g, "tariff", "grid")
    if isinstance(tariff_raw, (int, float)) and not isinstance(tariff_raw, bool):
        tariff = (float(tariff_raw),) * periods
        if tariff[0] < 0:
            raise InstanceError("grid.tariff", "must be >= 0")
    else:
        tariff = _vector(tariff_raw, "grid.tariff", periods, lo=0.0)
    grid = GridInterface(bus_ref(_get(g, "bus", "grid"), "grid.bus"),
                         _num(g, "rating_kw", "grid", lo=0.0), tariff)

    units = []
    names = set()
    for i, u in enumerate(_get(doc, "units", "")):
        p = f"units[{i}]"
        name = _get(u, "name", p)
        if not isinstance(name, str) or name in names:
            raise InstanceError(f"{p}.name", f"unit names must be unique strings, got {name!r}")
        names.add(name)
        kind = _get(u, "kind", p)
        if kind not in UNIT_KINDS:
            raise InstanceError(f"{p}.kind", f"expected one of {UNIT_KINDS}, got {kind!r}")
        resource = _get(u, "resource", p, "pv" if kind != "sg" else "dispatchable")
        if resource not in RESOURCES:
            raise InstanceError(f"{p}.resource", f"expected one of {RESOURCES}, got {resource!r}")
        existing = _get(u, "existing", p, False)
        if not isinstance(existing, bool):
            raise InstanceError(f"{p}.existing", "expected true or false")
        prm_raw = _get(u, "params", p, {})
        prm = {}
        for key in _PARAM_KEYS[kind]:
            prm[key] = _num(prm_raw, key, f"{p}.params", lo=0.0)
        for key in ("R",):
            if key in prm and prm[key] <= 0:
                raise InstanceError(f"{p}.params.{key}", "must be > 0")
        if kind in ("sg",) and prm["M"] <= 0:
            raise InstanceError(f"{p}.params.M", "must be > 0")
        if kind == "sg" and not 0 <= prm["F"] <= 1:
            raise InstanceError(f"{p}.params.F", "must lie in [0, 1]")
        units.append(Unit(
            name=name, bus=bus_ref(_get(u, "bus", p), f"{p}.bus"), kind=kind,
            capacity_kw=_num(u, "capacity_kw", p, positive=True), existing=existing,
            investment_cost=_num(u, "investment_cost", p, 0.0, lo=0.0),
            marginal_cost=_num(u, "marginal_cost", p, 0.0, lo=0.0), resource=resource,
            reserve_fraction=min(1.0, _num(u, "reserve_fraction", p, 1.0, lo=0.0)), params=prm))
    if not units:
        raise InstanceError("units", "at least one unit is required")

    days = []
    for i, d in enumerate(_get(doc, "days", "")):
        p = f"days[{i}]"
        weight = _num(d, "weight", p, positive=True)
        dem_raw = _get(d, "demand_kw", p)
        if not isinstance(dem_raw, Mapping):
            raise InstanceError(f"{p}.demand_kw", "expected an object keyed by bus id")
        demand = {}
        for bus, prof in dem_raw.items():
            bus_ref(bus, f"{p}.demand_kw.{bus}")
            demand[bus] = _vector(prof, f"{p}.demand_kw.{bus}", periods, lo=0.0)
        pv = _vector(_get(d, "pv", p, [0.0] * periods), f"{p}.pv", periods, lo=0.0, hi=1.0)
        days.append(RepresentativeDay(weight, demand, pv, d.get("name", f"day{i}")))
    if not days:
        raise InstanceError("days", "at least one representative day is required")
    total_w = sum(d.weight for d in days)
    if abs(total_w - 365.0) > WEIGHT_TOL * 365.0:
        raise InstanceError("days", f"weights must sum to 365, got {total_w}")

    pen = _get(doc, "penalties", "", {})
    penalties = Penalties(_num(pen, "shift", "penalties", 0.0, lo=0.0),
                          _num(pen, "disconnection", "penalties", 0.0, lo=0.0),
                          _num(pen, "shift_fraction", "penalties", 0.3, lo=0.0))

    lim = _get(doc, "limits", "", {})
    limits = SecurityLimits(nadir=_num(lim, "nadir_hz", "limits", 0.6, positive=True),
                            rocof=_num(lim, "rocof_hz_s", "limits", 2.0, positive=True),
                            qss=_num(lim, "qss_hz", "limits", 0.2, positive=True),
                            f_base=_num(doc, "f_base", "", DEFAULT_F_BASE, positive=True))

    inst = PlanningInstance(
        name=str(doc.get("name", "instance")), buses=tuple(buses), lines=tuple(lines), grid=grid,
        units=tuple(units), days=tuple(days), penalties=penalties, limits=limits,
        period_hours=period_hours, turbine_t=_num(doc, "turbine_t", "", DEFAULT_TURBINE_T, positive=True))
    _check_connected(inst)
    return inst


def _check_connected(inst: PlanningInstance) -> None:
    adj = {b: set() for b in inst.buses}
    for ln in inst.lines:
        adj[ln.from_bus].add(ln.to_bus)
        adj[ln.to_bus].add(ln.from_bus)
    seen = {inst.buses[0]}
    stack = [inst.buses[0]]
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    missing = [b for b in inst.buses if b not in seen]
    if missing:
        raise InstanceError("lines", f"network is not connected; unreachable buses {missing}")


def load_instance(path: str | Path) -> PlanningInstance:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceError("$", f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return instance_from_dict(doc)


def instance_to_dict(inst: PlanningInstance) -> dict:
    return {
        "name": inst.name,
        "period_hours": inst.period_hours,
        "turbine_t": inst.turbine_t,
        "f_base": inst.f_base,
        "buses": list(inst.buses),
        "lines": [{"name": l.name, "from": l.from_bus, "to": l.to_bus, "capacity_kw": l.capacity_kw}
                  for l in inst.lines],
        "grid": {"bus": inst.grid.bus, "rating_kw": inst.grid.rating_kw, "tariff": list(inst.grid.tariff)},
        "units": [{"name": u.name, "bus": u.bus, "kind": u.kind, "capacity_kw": u.capacity_kw,
                   "existing": u.existing, "investment_cost": u.investment_cost,
                   "marginal_cost": u.marginal_cost, "resource": u.resource,
                   "reserve_fraction": u.reserve_fraction, "params": dict(u.params)} for u in inst.units],
        "days": [{"name": d.name, "weight": d.weight, "pv": list(d.pv),
                  "demand_kw": {b: list(v) for b, v in d.demand.items()}} for d in inst.days],
        "penalties": {"shift": inst.penalties.shift, "disconnection": inst.penalties.disconnection,
                      "shift_fraction": inst.penalties.shift_fraction},
        "limits": {"nadir_hz": inst.limits.nadir, "rocof_hz_s": inst.limits.rocof, "qss_hz": inst.limits.qss},
    }
