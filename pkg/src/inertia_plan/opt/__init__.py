"""Linear and binary optimization: modelling layer, simplex, branch-and-bound."""
from __future__ import annotations

from .backends import BACKENDS, get_backend
from .model import INF, LinExpr, Model, Var, quicksum, to_lp_text
from .result import Infeasible, IterationLimit, NodeLimit, SolveError, Solution, Unbounded

DEFAULT_MAX_ITER = 10**6
DEFAULT_NODE_LIMIT = 10**5

__all__ = [
    "INF", "LinExpr", "Model", "Var", "quicksum", "to_lp_text", "Solution", "SolveError",
    "Infeasible", "Unbounded", "IterationLimit", "NodeLimit", "solve_lp", "solve_mip",
    "solve", "add_free_abs", "BACKENDS", "get_backend",
]


def _wrap(model: Model, status: str, res, nodes: int, iterations: int) -> Solution:
    if status != "optimal" or res is None:
        return Solution(status, iterations=iterations, nodes=nodes)
    a = model.arrays()
    return Solution("optimal", objective=float(res.objective + a.c0), x=res.x,
                    duals=res.duals, reduced_costs=res.reduced_costs,
                    iterations=iterations, nodes=nodes)


def solve_lp(model: Model, max_iter: int = DEFAULT_MAX_ITER, backend: str | None = None) -> Solution:
    """Solve a model without binaries; duals are d(objective)/d(rhs) per row."""
    if model.has_binaries:
        raise ValueError("solve_lp expects a model without binary variables; use solve_mip")
    a = model.arrays()
    res = get_backend(backend).lp(a, a.lb, a.ub, max_iter)
    return _wrap(model, res.status, res, 0, res.iterations)


def solve_mip(model: Model, node_limit: int = DEFAULT_NODE_LIMIT, max_iter: int = DEFAULT_MAX_ITER,
              backend: str | None = None) -> Solution:
    """Global optimum over the binaries; ``duals`` is left empty."""
    a = model.arrays()
    status, res, nodes, pivots = get_backend(backend).mip(a, max_iter, node_limit)
    sol = _wrap(model, status, res, nodes, pivots)
    sol.duals = None
    sol.reduced_costs = None
    return sol


def solve(model: Model, backend: str | None = None) -> Solution:
    return solve_mip(model, backend=backend) if model.has_binaries else solve_lp(model, backend=backend)


def add_free_abs(model: Model, x: Var, name: str | None = None) -> LinExpr:
    """Split ``x = x+ - x-`` and return ``x+ + x-`` for use in a minimized objective."""
    base = name or x.name
    xp = model.add_var(f"{base}_pos", 0.0, INF)
    xn = model.add_var(f"{base}_neg", 0.0, INF)
    model.add_constr(x - xp + xn, "==", 0.0, name=f"{base}_abs_split")
    return xp + xn
