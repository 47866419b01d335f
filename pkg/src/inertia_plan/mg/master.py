"""Investment-and-operations master problems.

Both masters minimize investment + weighted grid-mode operating cost + the
worst islanded penalty ``gamma``.  The A1 master also carries the fleet
aggregates in kW (``M``, ``D``, ``R``, ``F``) as variables tied to the
investment decisions; the A2 master only carries the base power.  Security
enters exclusively through feasibility cuts, or through hard exchange
bounds for the baseline and the oracle.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from ..freq_response import CoiParams
from ..opt import INF, LinExpr, Model, Solution, Var, quicksum, solve
from .instance import PlanningInstance, Unit
from .operational import (GridBlock, IslandBlock, add_grid_block, add_island_block,
                          add_shift_neutrality, check_structure)

AGG_KEYS = ("inertia", "damping", "gov_gain", "hp_gain")


def unit_contribution(unit: Unit) -> dict[str, float]:
    """kW-weighted contribution of one unit to (M, D, R, F) and the base."""
    p = unit.params
    cap = unit.capacity_kw
    out = {"inertia": 0.0, "damping": 0.0, "gov_gain": 0.0, "hp_gain": 0.0, "p_base": cap}
    if unit.kind == "sg":
        out["inertia"] = p["M"] * cap
        out["damping"] = p["D"] * cap
        out["gov_gain"] = p["K"] / p["R"] * cap
        out["hp_gain"] = p["K"] * p["F"] / p["R"] * cap
    elif unit.kind == "vsm":
        out["inertia"] = p["M"] * cap
        out["damping"] = p["D"] * cap
    elif unit.kind == "droop":
        out["damping"] = p["K"] / p["R"] * cap
    return out


@dataclass
class Master:
    instance: PlanningInstance
    algorithm: str
    model: Model
    z: dict[str, Var]
    grid: dict[tuple[int, int], GridBlock]
    island: dict[tuple[int, int], IslandBlock]
    gamma: Var
    p_base: Var
    breve: dict[str, Var]
    investment: LinExpr
    n_cuts: int = 0

    def p_grid(self, slot) -> Var:
        return self.grid[slot].p_grid


@dataclass(frozen=True)
class MasterSolution:
    objective: float
    z: dict[str, int]
    p_grid: dict[tuple[int, int], float]
    gamma: float
    p_base: float
    breve: dict[str, float]
    dispatch: dict[tuple[int, int], dict[str, float]]
    island_dispatch: dict[tuple[int, int], dict[str, float]]
    shift_up: dict[tuple[int, int], dict[str, float]]
    shift_down: dict[tuple[int, int], dict[str, float]]
    disconnect: dict[tuple[int, int], dict[str, float]]
    defer: dict[tuple[int, int], dict[str, float]]
    penalties: dict[tuple[int, int], float]
    nodes: int = 0
    iterations: int = 0

    @property
    def built(self) -> tuple[str, ...]:
        return tuple(n for n, v in self.z.items() if v)

    def coi_kw(self) -> CoiParams:
        b = self.breve
        return CoiParams(b["damping"], b["gov_gain"], b["hp_gain"], b["inertia"])


def fleet_breve(inst: PlanningInstance, built: Mapping[str, float]) -> dict[str, float]:
    """kW aggregates (and base) of the existing units plus ``built``."""
    total = dict.fromkeys(AGG_KEYS + ("p_base",), 0.0)
    for u in inst.units:
        share = 1.0 if u.existing else float(built.get(u.name, 0.0))
        if share:
            for k, v in unit_contribution(u).items():
                total[k] += share * v
    return total


def _build(inst: PlanningInstance, algorithm: str, grid_bounds: Mapping | None,
           fixed_z: Mapping[str, float] | None) -> Master:
    check_structure(inst, islanded=False)
    check_structure(inst, islanded=True)
    model = Model(f"{inst.name}_master_{algorithm}")
    z: dict[str, Var] = {}
    for u in inst.candidates:
        if fixed_z is not None:
            v = float(bool(fixed_z.get(u.name, 0)))
            z[u.name] = model.add_var(f"z_{u.name}", v, v)
        else:
            z[u.name] = model.add_var(f"z_{u.name}", 0.0, 1.0, kind="binary")
    grid, island = {}, {}
    for slot in inst.slots():
        grid[slot] = add_grid_block(inst, model, slot, z)
    add_shift_neutrality(inst, model, grid)
    gamma = model.add_var("gamma", 0.0, INF)
    for slot in inst.slots():
        blk = add_island_block(inst, model, slot, z, anchor=grid[slot])
        island[slot] = blk
        model.add_constr(gamma - blk.penalty, ">=", 0.0, name=f"gamma_{blk_tag(slot)}")
    if grid_bounds:
        for slot, bound in sorted(grid_bounds.items()):
            p = grid[slot].p_grid
            p.lb = max(p.lb, -bound)
            p.ub = min(p.ub, bound)

    contrib = {u.name: unit_contribution(u) for u in inst.units}
    base0 = fleet_breve(inst, {})
    p_base = model.add_var("P_base", 0.0, INF)
    model.add_constr(p_base - quicksum(contrib[n]["p_base"] * zv for n, zv in z.items()), "==",
                     base0["p_base"], name="def_P_base")
    breve: dict[str, Var] = {}
    if algorithm == "a1":
        for key in AGG_KEYS:
            v = model.add_var(f"breve_{key}", 0.0, INF)
            model.add_constr(v - quicksum(contrib[n][key] * zv for n, zv in z.items()), "==",
                             base0[key], name=f"def_breve_{key}")
            breve[key] = v
    investment = quicksum(u.investment_cost * z[u.name] for u in inst.candidates)
    operating = quicksum(b.cost for b in grid.values())
    model.minimize(investment + operating + gamma)
    return Master(inst, algorithm, model, z, grid, island, gamma, p_base, breve, investment)


def blk_tag(slot) -> str:
    return f"d{slot[0]}_t{slot[1]}"


def build_master_a1(inst: PlanningInstance, cuts: Iterable = (), grid_bounds: Mapping | None = None,
                    fixed_z: Mapping[str, float] | None = None) -> Master:
    m = _build(inst, "a1", grid_bounds, fixed_z)
    for cut in cuts:
        add_cut(m, cut)
    return m


def build_master_a2(inst: PlanningInstance, cuts: Iterable = (), grid_bounds: Mapping | None = None,
                    fixed_z: Mapping[str, float] | None = None) -> Master:
    m = _build(inst, "a2", grid_bounds, fixed_z)
    for cut in cuts:
        add_cut(m, cut)
    return m


def build_master(inst: PlanningInstance, algorithm: str = "a2", **kw) -> Master:
    """Master for a0/exhaustive (no aggregates needed) or for a1/a2."""
    if algorithm == "a1":
        return build_master_a1(inst, **kw)
    return build_master_a2(inst, **kw)


def add_cut(master: Master, cut) -> None:
    """Add ``constant + lam (p - p0) + sum c_k (x_k - x0_k) <= 0``."""
    lhs = LinExpr(constant=cut.constant) + (master.p_grid(cut.slot) - cut.p_grid) * cut.coef_p
    if cut.algorithm == "a1":
        if master.algorithm != "a1":
            raise ValueError("an A1 cut needs the aggregate variables of an A1 master")
        for key, c in sorted(cut.coefs.items()):
            lhs += (master.breve[key] - cut.point[key]) * c
    else:
        for name, c in sorted(cut.coefs.items()):
            lhs += (master.z[name] - cut.point[name]) * c
    master.model.add_constr(lhs, "<=", 0.0, name=f"cut{master.n_cuts}_{blk_tag(cut.slot)}")
    master.n_cuts += 1


def _vals(sol: Solution, vars_: Mapping[str, Var]) -> dict[str, float]:
    return {k: float(sol.x[v.index]) for k, v in vars_.items()}


def solve_master(master: Master, backend: str | None = None) -> MasterSolution | None:
    """Solve; ``None`` if infeasible.  Other failures raise."""
    sol = solve(master.model, backend=backend)
    if sol.status == "infeasible":
        return None
    sol.check()
    x = sol.x
    z = {n: int(round(x[v.index])) for n, v in master.z.items()}
    inst = master.instance
    if master.breve:
        breve = _vals(sol, master.breve)
    else:
        breve = {k: v for k, v in fleet_breve(inst, z).items() if k != "p_base"}
    pen = {s: float(b.penalty.constant + sum(c * x[i] for i, c in b.penalty.terms.items()))
           for s, b in master.island.items()}
    return MasterSolution(
        objective=float(sol.objective), z=z,
        p_grid={s: float(x[b.p_grid.index]) for s, b in master.grid.items()},
        gamma=float(x[master.gamma.index]), p_base=float(x[master.p_base.index]), breve=breve,
        dispatch={s: _vals(sol, b.dispatch) for s, b in master.grid.items()},
        island_dispatch={s: _vals(sol, b.dispatch) for s, b in master.island.items()},
        shift_up={s: _vals(sol, b.shift_up) for s, b in master.grid.items()},
        shift_down={s: _vals(sol, b.shift_down) for s, b in master.grid.items()},
        disconnect={s: _vals(sol, b.disconnect) for s, b in master.island.items()},
        defer={s: _vals(sol, b.defer) for s, b in master.island.items()},
        penalties=pen, nodes=sol.nodes, iterations=sol.iterations)
