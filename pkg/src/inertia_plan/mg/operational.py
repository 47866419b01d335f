"""Static operational constraints for one (day, period) slot.

Transport model: per-bus balance, line flows within their rating, unit
output within committed capacity times availability.  Grid mode carries the
exchange ``p`` (positive = import) and the scheduled demand shift; the
islanded block has no exchange and may only deploy reserve around the
grid-mode dispatch, defer demand and disconnect load.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Union

from ..opt import INF, LinExpr, Model, Var, quicksum
from .instance import PlanningInstance

ZLike = Union[Var, float, int]


class InfeasibleStructure(ValueError):
    pass


@dataclass
class GridBlock:
    slot: tuple[int, int]
    dispatch: dict[str, Var]
    p_grid: Var
    flows: dict[str, Var]
    shift_up: dict[str, Var]
    shift_down: dict[str, Var]
    energy_cost: LinExpr = field(default_factory=LinExpr)
    exchange_cost: LinExpr = field(default_factory=LinExpr)
    shift_cost: LinExpr = field(default_factory=LinExpr)

    @property
    def cost(self) -> LinExpr:
        return self.energy_cost + self.exchange_cost + self.shift_cost


@dataclass
class IslandBlock:
    slot: tuple[int, int]
    dispatch: dict[str, Var]
    flows: dict[str, Var]
    disconnect: dict[str, Var]
    defer: dict[str, Var]
    disconnect_cost: LinExpr = field(default_factory=LinExpr)
    defer_cost: LinExpr = field(default_factory=LinExpr)

    @property
    def penalty(self) -> LinExpr:
        return self.disconnect_cost + self.defer_cost


def _tag(slot) -> str:
    return f"d{slot[0]}_t{slot[1]}"


def check_structure(inst: PlanningInstance, islanded: bool) -> None:
    """Every bus with demand must reach some source through the lines."""
    sources = {u.bus for u in inst.units}
    if not islanded:
        sources.add(inst.grid.bus)
    adj = {b: set() for b in inst.buses}
    for ln in inst.lines:
        if ln.capacity_kw > 0:
            adj[ln.from_bus].add(ln.to_bus)
            adj[ln.to_bus].add(ln.from_bus)
    reach = set(sources)
    stack = list(sources)
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in reach:
                reach.add(nb)
                stack.append(nb)
    for day in inst.days:
        for bus, prof in day.demand.items():
            if bus not in reach and max(prof) > 0:
                mode = "islanded" if islanded else "grid"
                raise InfeasibleStructure(f"bus {bus!r} has demand but no path to a source ({mode} mode)")


def _unit_cap(model: Model, unit, z: ZLike, g: Var, limit: float, name: str) -> None:
    if unit.existing:
        g.ub = min(g.ub, limit)
    elif isinstance(z, Var):
        model.add_constr(g - limit * z, "<=", 0.0, name=name)
    else:
        g.ub = min(g.ub, limit * float(z))


def _balance(inst, model, slot, tag, gen, flows, extra):
    """``extra[bus]`` is a LinExpr of the remaining terms on the supply side."""
    rows = {}
    for bus in inst.buses:
        lhs = quicksum(gen[u.name] for u in inst.units if u.bus == bus)
        for ln in inst.lines:
            if ln.to_bus == bus:
                lhs += flows[ln.name]
            if ln.from_bus == bus:
                lhs -= flows[ln.name]
        lhs += extra.get(bus, 0.0)
        rows[bus] = model.add_constr(lhs, "==", inst.demand(bus, *slot), name=f"{tag}_bal_{bus}")
    return rows


def add_grid_block(inst: PlanningInstance, model: Model, slot: tuple[int, int],
                   z: Mapping[str, ZLike]) -> GridBlock:
    o, t = slot
    tag = "g_" + _tag(slot)
    hours = inst.period_hours
    weight = inst.days[o].weight
    gen = {}
    for u in inst.units:
        g = model.add_var(f"{tag}_p_{u.name}", 0.0, INF)
        _unit_cap(model, u, z.get(u.name, 1.0), g, u.capacity_kw * inst.availability(u, o, t),
                  f"{tag}_cap_{u.name}")
        gen[u.name] = g
    rating = inst.grid.rating_kw
    p = model.add_var(f"{tag}_pgrid", -rating, rating)
    flows = {ln.name: model.add_var(f"{tag}_f_{ln.name}", -ln.capacity_kw, ln.capacity_kw)
             for ln in inst.lines}
    sup, sdn = {}, {}
    extra: dict[str, LinExpr] = {inst.grid.bus: LinExpr.of(p)}
    frac = inst.penalties.shift_fraction
    for bus in inst.buses:
        d = inst.demand(bus, o, t)
        if d <= 0:
            continue
        sup[bus] = model.add_var(f"{tag}_su_{bus}", 0.0, frac * d)
        sdn[bus] = model.add_var(f"{tag}_sd_{bus}", 0.0, frac * d)
        extra[bus] = extra.get(bus, LinExpr()) - sup[bus] + sdn[bus]
    _balance(inst, model, slot, tag, gen, flows, extra)
    scale = weight * hours
    blk = GridBlock(slot, gen, p, flows, sup, sdn)
    blk.energy_cost = quicksum(scale * u.marginal_cost * gen[u.name] for u in inst.units if u.marginal_cost)
    blk.exchange_cost = LinExpr.of(p) * (scale * inst.grid.tariff[t])
    blk.shift_cost = quicksum(scale * inst.penalties.shift * v for v in sdn.values())
    return blk


def add_island_block(inst: PlanningInstance, model: Model, slot: tuple[int, int],
                     z: Mapping[str, ZLike], anchor: GridBlock | None = None) -> IslandBlock:
    o, t = slot
    tag = "i_" + _tag(slot)
    hours = inst.period_hours
    gen = {}
    for u in inst.units:
        g = model.add_var(f"{tag}_p_{u.name}", 0.0, INF)
        _unit_cap(model, u, z.get(u.name, 1.0), g, u.capacity_kw * inst.availability(u, o, t),
                  f"{tag}_cap_{u.name}")
        if anchor is not None and u.reserve_fraction < 1.0:
            band = u.reserve_fraction * u.capacity_kw
            model.add_constr(g - anchor.dispatch[u.name], "<=", band, name=f"{tag}_up_{u.name}")
            model.add_constr(anchor.dispatch[u.name] - g, "<=", band, name=f"{tag}_dn_{u.name}")
        gen[u.name] = g
    flows = {ln.name: model.add_var(f"{tag}_f_{ln.name}", -ln.capacity_kw, ln.capacity_kw)
             for ln in inst.lines}
    disc, defer = {}, {}
    extra: dict[str, LinExpr] = {}
    frac = inst.penalties.shift_fraction
    for bus in inst.buses:
        d = inst.demand(bus, o, t)
        if d <= 0:
            continue
        disc[bus] = model.add_var(f"{tag}_disc_{bus}", 0.0, INF)
        defer[bus] = model.add_var(f"{tag}_defer_{bus}", 0.0, frac * d)
        served = LinExpr.of(disc[bus]) + defer[bus]
        rhs = LinExpr.of(d)
        if anchor is not None and bus in anchor.shift_up:
            rhs = rhs + anchor.shift_up[bus] - anchor.shift_down[bus]
            extra[bus] = LinExpr.of(anchor.shift_down[bus]) - anchor.shift_up[bus] + served
        else:
            extra[bus] = served
        model.add_constr(served - rhs, "<=", 0.0, name=f"{tag}_disclim_{bus}")
    _balance(inst, model, slot, tag, gen, flows, extra)
    blk = IslandBlock(slot, gen, flows, disc, defer)
    blk.disconnect_cost = quicksum(hours * inst.penalties.disconnection * v for v in disc.values())
    blk.defer_cost = quicksum(hours * inst.penalties.shift * v for v in defer.values())
    return blk


def add_shift_neutrality(inst: PlanningInstance, model: Model, blocks: Mapping[tuple[int, int], GridBlock]):
    """Shifted energy nets to zero over each day at each bus."""
    for o in range(len(inst.days)):
        for bus in inst.buses:
            terms = [(blocks[(o, t)].shift_up[bus], blocks[(o, t)].shift_down[bus])
                     for t in range(inst.periods) if (o, t) in blocks and bus in blocks[(o, t)].shift_up]
            if terms:
                model.add_constr(quicksum(up - dn for up, dn in terms), "==", 0.0,
                                 name=f"shift_day{o}_{bus}")


def build_operational_constraints(inst: PlanningInstance, mode: str = "grid",
                                  slot: tuple[int, int] | None = None,
                                  built: Mapping[str, float] | None = None) -> tuple[Model, list]:
    """Stand-alone operational fragment under a fixed investment set.

    ``mode`` is ``grid`` (all slots, minimizing operating cost) or
    ``islanded`` (one slot, minimizing the islanded penalty with no grid
    operating point to anchor to).
    """
    if mode not in ("grid", "islanded"):
        raise ValueError(f"unknown mode {mode!r}")
    check_structure(inst, islanded=(mode == "islanded"))
    z = {u.name: float(bool((built or {}).get(u.name, False))) for u in inst.candidates}
    model = Model(f"{inst.name}_{mode}")
    if mode == "grid":
        slots = inst.slots() if slot is None else [slot]
        blocks = {s: add_grid_block(inst, model, s, z) for s in slots}
        if slot is None:
            add_shift_neutrality(inst, model, blocks)
        model.minimize(quicksum(b.cost for b in blocks.values()))
        return model, list(blocks.values())
    slot = slot if slot is not None else (0, 0)
    blk = add_island_block(inst, model, slot, z)
    model.minimize(blk.penalty)
    return model, [blk]
