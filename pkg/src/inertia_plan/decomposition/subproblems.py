"""Per-slot security sub-problems and the feasibility cuts built from their duals.

For a slot with frozen exchange ``p`` and frozen fleet, the sub-problem
finds the smallest exchange correction ``dp`` that makes the linearized
security rows hold::

    min |dp|
    s.t. +-(p - dp) / P  <= h~(x)  * nadir / f
         +-(p - dp) / P  <= (M / P) * rocof / f
         +-(p - dp) / P  <= ((D + R) / P) * qss / f
         p = p_k, and the fleet fixed to its master value

``P`` is the frozen base power.  The duals of the fixing rows price the
complicating variables and become the cut coefficients.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from ..freq_response import CoiParams, SecurityLimits
from ..linearize import TaylorPoint, gradient, nadir_gain
from ..mg.instance import PlanningInstance
from ..mg.master import AGG_KEYS, MasterSolution, fleet_breve, unit_contribution
from ..opt import INF, LinExpr, Model, add_free_abs, quicksum, solve_lp

# ordering of the fleet aggregates inside a CoiParams (D, R, F, M)
_COI_KEYS = ("damping", "gov_gain", "hp_gain", "inertia")


class ZeroBase(ValueError):
    pass


@dataclass(frozen=True)
class FrozenBounds:
    """Largest exchange magnitude (kW) each metric allows for a fixed fleet."""

    nadir: float
    rocof: float
    qss: float

    @property
    def binding(self) -> float:
        return min(self.nadir, self.rocof, self.qss)

    @property
    def binding_metric(self) -> str:
        vals = {"nadir": self.nadir, "rocof": self.rocof, "qss": self.qss}
        return min(vals, key=vals.get)


def frozen_bounds(breve: Mapping[str, float], limits: SecurityLimits, turbine_t: float) -> FrozenBounds:
    """Exact bounds from kW aggregates; the base power cancels out."""
    f = limits.f_base
    coi = CoiParams(*(breve[k] for k in _COI_KEYS))
    stiff = coi.damping + coi.gov_gain
    h = nadir_gain(coi, turbine_t) if stiff > 0 and coi.inertia > 0 else 0.0
    return FrozenBounds(nadir=h * limits.nadir / f, rocof=coi.inertia * limits.rocof / f,
                        qss=stiff * limits.qss / f)


def taylor_point(sol: MasterSolution, turbine_t: float) -> TaylorPoint:
    """Linearization of ``h`` at the master's fleet, normalized by its base."""
    if sol.p_base <= 0:
        raise ZeroBase("frozen fleet has zero base power")
    x = CoiParams(*(sol.breve[k] / sol.p_base for k in _COI_KEYS))
    return gradient(x, turbine_t)


@dataclass
class SubProblemResult:
    algorithm: str
    slot: tuple[int, int]
    status: str
    slack: float
    lam: float
    duals: dict[str, float]
    p_grid: float
    point: dict[str, float]
    binding: str = ""
    model: Model | None = field(default=None, repr=False)

    @property
    def infeasible(self) -> bool:
        return self.slack > 0


def _security_rows(model: Model, inst: PlanningInstance, tp: TaylorPoint, p_base: float,
                   p, dp, agg: Mapping[str, object]) -> dict[str, tuple]:
    lim = inst.limits
    f = lim.f_base
    net = (LinExpr.of(p) - dp) * (1.0 / p_base)
    # h~ = h0 + grad . (x / P - x0)
    h_lin = LinExpr(constant=tp.h0)
    for g, key, x0 in zip(tp.partials, _COI_KEYS, tp.point):
        h_lin += (LinExpr.of(agg[key]) * (1.0 / p_base) - x0) * g
    i_lin = LinExpr.of(agg["inertia"]) * (1.0 / p_base)
    j_lin = (LinExpr.of(agg["damping"]) + agg["gov_gain"]) * (1.0 / p_base)
    rows = {}
    for name, rhs, bound in (("nadir", h_lin, lim.nadir), ("rocof", i_lin, lim.rocof),
                             ("qss", j_lin, lim.qss)):
        k = bound / f
        up = model.add_constr(net - rhs * k, "<=", 0.0, name=f"{name}_up")
        dn = model.add_constr(-net - rhs * k, "<=", 0.0, name=f"{name}_dn")
        rows[name] = (up, dn)
    return rows


def _binding(sol, rows) -> str:
    best, val = "", 0.0
    for name, (up, dn) in rows.items():
        v = abs(sol.dual(up)) + abs(sol.dual(dn))
        if v > val + 1e-12:
            best, val = name, v
    return best


def build_sub_a1(inst: PlanningInstance, sol: MasterSolution, slot: tuple[int, int],
                 tp: TaylorPoint) -> tuple[Model, dict]:
    """A1 sub-problem: exchange and kW aggregates are the fixed complicating variables."""
    if sol.p_base <= 0:
        raise ZeroBase("frozen fleet has zero base power")
    m = Model(f"sub_a1_d{slot[0]}_t{slot[1]}")
    p = m.add_var("p_grid", -INF, INF)
    dp = m.add_var("slack", -INF, INF)
    agg = {k: m.add_var(f"breve_{k}", -INF, INF) for k in AGG_KEYS}
    fix = {"p_grid": m.add_constr(p, "==", sol.p_grid[slot], name="fix_p_grid")}
    for k in AGG_KEYS:
        fix[k] = m.add_constr(agg[k], "==", sol.breve[k], name=f"fix_{k}")
    rows = _security_rows(m, inst, tp, sol.p_base, p, dp, agg)
    m.minimize(add_free_abs(m, dp))
    return m, {"fix": fix, "rows": rows}


def build_sub_a2(inst: PlanningInstance, sol: MasterSolution, slot: tuple[int, int],
                 tp: TaylorPoint) -> tuple[Model, dict]:
    """A2 sub-problem: exchange and investment status are fixed; aggregates are internal."""
    if sol.p_base <= 0:
        raise ZeroBase("frozen fleet has zero base power")
    m = Model(f"sub_a2_d{slot[0]}_t{slot[1]}")
    p = m.add_var("p_grid", -INF, INF)
    dp = m.add_var("slack", -INF, INF)
    z = {u.name: m.add_var(f"z_{u.name}", -INF, INF) for u in inst.candidates}
    agg = {k: m.add_var(f"agg_{k}", -INF, INF) for k in AGG_KEYS}
    base0 = fleet_breve(inst, {})
    contrib = {u.name: unit_contribution(u) for u in inst.candidates}
    for k in AGG_KEYS:
        m.add_constr(agg[k] - quicksum(contrib[n][k] * z[n] for n in z), "==", base0[k], name=f"agg_{k}")
    fix = {"p_grid": m.add_constr(p, "==", sol.p_grid[slot], name="fix_p_grid")}
    for n in z:
        fix[n] = m.add_constr(z[n], "==", float(sol.z[n]), name=f"fix_z_{n}")
    rows = _security_rows(m, inst, tp, sol.p_base, p, dp, agg)
    m.minimize(add_free_abs(m, dp))
    return m, {"fix": fix, "rows": rows}


def solve_sub(inst: PlanningInstance, algorithm: str, sol: MasterSolution, slot: tuple[int, int],
              tp: TaylorPoint, backend: str | None = None) -> SubProblemResult:
    build = build_sub_a1 if algorithm == "a1" else build_sub_a2
    model, parts = build(inst, sol, slot, tp)
    res = solve_lp(model, backend=backend).check()
    fix = parts["fix"]
    duals = {k: res.dual(c) for k, c in fix.items() if k != "p_grid"}
    if algorithm == "a1":
        point = {k: sol.breve[k] for k in AGG_KEYS}
    else:
        point = {n: float(sol.z[n]) for n in duals}
    slack = max(0.0, res.objective)
    return SubProblemResult(algorithm, slot, res.status, slack, res.dual(fix["p_grid"]), duals,
                            sol.p_grid[slot], point, _binding(res, parts["rows"]) if slack > 0 else "",
                            model)


@dataclass(frozen=True)
class FeasibilityCut:
    """``constant + coef_p (p - p_grid) + sum coefs[k] (x_k - point[k]) <= 0``."""

    algorithm: str
    slot: tuple[int, int]
    constant: float
    p_grid: float
    coef_p: float
    coefs: dict[str, float]
    point: dict[str, float]

    def evaluate(self, p: float, x: Mapping[str, float]) -> float:
        return (self.constant + self.coef_p * (p - self.p_grid)
                + sum(c * (x[k] - self.point[k]) for k, c in sorted(self.coefs.items())))

    def as_dict(self) -> dict:
        return {"algorithm": self.algorithm, "slot": list(self.slot), "constant": self.constant,
                "p_grid": self.p_grid, "coef_p": self.coef_p,
                "coefs": dict(sorted(self.coefs.items())), "point": dict(sorted(self.point.items()))}


def make_cut(res: SubProblemResult) -> FeasibilityCut:
    return FeasibilityCut(res.algorithm, res.slot, res.slack, res.p_grid, res.lam,
                          dict(res.duals), dict(res.point))
