"""Solve outcomes shared by every backend."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class SolveError(RuntimeError):
    pass


class Infeasible(SolveError):
    pass


class Unbounded(SolveError):
    pass


class IterationLimit(SolveError):
    pass


class NodeLimit(SolveError):
    pass


_ERRORS = {"infeasible": Infeasible, "unbounded": Unbounded,
           "iteration-limit": IterationLimit, "node-limit": NodeLimit}


@dataclass
class Solution:
    status: str
    objective: float | None = None
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    iterations: int = 0
    nodes: int = 0
    names: dict = field(default_factory=dict, repr=False)
    cnames: dict = field(default_factory=dict, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    def check(self) -> "Solution":
        """Return self when optimal, raise the matching error otherwise."""
        if self.status != "optimal":
            raise _ERRORS.get(self.status, SolveError)(f"solve ended with status {self.status}")
        return self

    def value(self, var) -> float:
        idx = var if isinstance(var, int) else var.index
        return float(self.x[idx])

    def dual(self, con) -> float:
        if self.duals is None:
            raise SolveError("no dual values (MIP solves report primal values only)")
        idx = con if isinstance(con, int) else con.index
        return float(self.duals[idx])

    def reduced_cost(self, var) -> float:
        idx = var if isinstance(var, int) else var.index
        return float(self.reduced_costs[idx])
