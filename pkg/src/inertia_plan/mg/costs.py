"""Cost accounting of a master solution."""
from __future__ import annotations

from dataclasses import asdict, dataclass

from .instance import PlanningInstance


@dataclass(frozen=True)
class CostBreakdown:
    total: float
    investment: float
    operational: float
    demand_shift: float
    disconnection: float

    def as_dict(self) -> dict:
        return asdict(self)


def cost_breakdown(inst: PlanningInstance, sol) -> CostBreakdown:
    """Split the objective of ``sol`` into its reporting rows.

    ``operational`` is weighted generation cost plus tariff times signed
    exchange.  Shift and disconnection rows hold the scheduled shift penalty
    plus the worst islanded slot's deferral and disconnection penalties,
    which together make up ``gamma``.
    """
    by_name = {u.name: u for u in inst.units}
    investment = sum(by_name[n].investment_cost for n, v in sorted(sol.z.items()) if v)
    hours = inst.period_hours
    operational = 0.0
    shift = 0.0
    for (o, t), disp in sorted(sol.dispatch.items()):
        scale = inst.days[o].weight * hours
        operational += scale * sum(by_name[n].marginal_cost * g for n, g in sorted(disp.items()))
        operational += scale * inst.grid.tariff[t] * sol.p_grid[(o, t)]
        shift += scale * inst.penalties.shift * sum(v for _, v in sorted(sol.shift_down[(o, t)].items()))
    disconnection = 0.0
    if sol.penalties:
        worst = max(sorted(sol.penalties), key=lambda s: sol.penalties[s])
        disconnection = hours * inst.penalties.disconnection * sum(sol.disconnect[worst].values())
        shift += hours * inst.penalties.shift * sum(sol.defer[worst].values())
    total = investment + operational + shift + disconnection
    return CostBreakdown(total, investment, operational, shift, disconnection)
