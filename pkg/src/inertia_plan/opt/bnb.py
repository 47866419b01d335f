"""Best-first branch-and-bound over binary variables."""
from __future__ import annotations

import heapq
import itertools
from typing import Callable

import numpy as np

from .simplex import LPResult

INT_TOL = 1e-6

LPSolver = Callable[[np.ndarray, np.ndarray], LPResult]


def branch_and_bound(lp: LPSolver, lb: np.ndarray, ub: np.ndarray, binary: np.ndarray,
                     node_limit: int = 10**5) -> tuple[str, LPResult | None, int, int]:
    """``lp(lb, ub)`` solves the relaxation under modified bounds.

    Returns (status, best LP result, branchings, total pivots).  Nodes are
    taken in order of their parent's bound; ties go to the older node.
    """
    bin_idx = np.flatnonzero(binary)
    counter = itertools.count()
    heap = [(-np.inf, next(counter), lb.copy(), ub.copy())]
    best: LPResult | None = None
    best_obj = np.inf
    branchings = 0
    pivots = 0
    explored = 0
    while heap:
        bound, _, nlb, nub = heapq.heappop(heap)
        if bound >= best_obj - 1e-9 * max(1.0, abs(best_obj)):
            continue
        if explored >= node_limit:
            return "node-limit", best, branchings, pivots
        explored += 1
        res = lp(nlb, nub)
        pivots += res.iterations
        if res.status == "infeasible":
            continue
        if res.status != "optimal":
            return res.status, None, branchings, pivots
        if res.objective >= best_obj - 1e-9 * max(1.0, abs(best_obj)):
            continue
        vals = res.x[bin_idx]
        frac = np.abs(vals - np.round(vals))
        if bin_idx.size == 0 or frac.max() <= INT_TOL:
            x = res.x.copy()
            x[bin_idx] = np.round(vals)
            best = LPResult("optimal", x, res.objective, res.duals, res.reduced_costs, res.iterations)
            best_obj = res.objective
            continue
        k = int(bin_idx[np.argmax(frac)])
        branchings += 1
        for v in (np.round(res.x[k]), 1.0 - np.round(res.x[k])):
            clb, cub = nlb.copy(), nub.copy()
            clb[k] = cub[k] = v
            heapq.heappush(heap, (res.objective, next(counter), clb, cub))
    if best is None:
        return "infeasible", None, branchings, pivots
    return "optimal", best, branchings, pivots
