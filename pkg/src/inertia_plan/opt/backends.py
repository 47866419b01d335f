"""Solver backends.  The built-in simplex is the reference; HiGHS (through
scipy) can be swapped in for speed or cross-checking."""
from __future__ import annotations

from typing import Protocol

import numpy as np

from . import simplex
from .bnb import branch_and_bound
from .model import ModelArrays
from .simplex import LPResult


class Backend(Protocol):
    name: str

    def lp(self, a: ModelArrays, lb: np.ndarray, ub: np.ndarray, max_iter: int) -> LPResult: ...

    def mip(self, a: ModelArrays, max_iter: int, node_limit: int) -> tuple[str, LPResult | None, int, int]: ...


class BuiltinBackend:
    name = "builtin"

    def lp(self, a, lb, ub, max_iter):
        return simplex.solve(a.c, a.A, a.senses, a.b, lb, ub, max_iter=max_iter)

    def mip(self, a, max_iter, node_limit):
        return branch_and_bound(lambda lo, hi: self.lp(a, lo, hi, max_iter),
                                a.lb, a.ub, a.binary, node_limit)


class HighsBackend:
    name = "highs"

    @staticmethod
    def _split(a: ModelArrays):
        le = [i for i, s in enumerate(a.senses) if s == "<="]
        ge = [i for i, s in enumerate(a.senses) if s == ">="]
        eq = [i for i, s in enumerate(a.senses) if s == "=="]
        rows = le + ge
        A_ub = np.vstack([a.A[le], -a.A[ge]]) if rows else None
        b_ub = np.concatenate([a.b[le], -a.b[ge]]) if rows else None
        A_eq = a.A[eq] if eq else None
        b_eq = a.b[eq] if eq else None
        return le, ge, eq, A_ub, b_ub, A_eq, b_eq

    def lp(self, a, lb, ub, max_iter):
        from scipy.optimize import linprog

        le, ge, eq, A_ub, b_ub, A_eq, b_eq = self._split(a)
        bounds = list(zip(np.where(np.isfinite(lb), lb, None), np.where(np.isfinite(ub), ub, None)))
        res = linprog(a.c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds,
                      method="highs", options={"maxiter": max_iter})
        status = {0: "optimal", 1: "iteration-limit", 2: "infeasible", 3: "unbounded"}.get(res.status, "infeasible")
        if status != "optimal":
            return LPResult(status, None, None, None, None, int(res.nit or 0))
        y = np.zeros(len(a.senses))
        if A_ub is not None:
            marg = res.ineqlin.marginals
            y[le] = marg[:len(le)]
            y[ge] = -marg[len(le):]
        if A_eq is not None:
            y[eq] = res.eqlin.marginals
        rc = a.c - a.A.T @ y
        return LPResult("optimal", res.x, float(a.c @ res.x), y, rc, int(res.nit))

    def mip(self, a, max_iter, node_limit):
        from scipy.optimize import Bounds, LinearConstraint, milp

        lo = np.where(np.array(a.senses) == "<=", -np.inf, a.b)
        hi = np.where(np.array(a.senses) == ">=", np.inf, a.b)
        cons = [LinearConstraint(a.A, lo, hi)] if len(a.senses) else []
        res = milp(a.c, constraints=cons, integrality=a.binary.astype(int),
                   bounds=Bounds(a.lb, a.ub), options={"node_limit": node_limit})
        if res.status == 0:
            x = res.x.copy()
            x[a.binary] = np.round(x[a.binary])
            return "optimal", LPResult("optimal", x, float(a.c @ x), None, None, 0), 0, 0
        status = {1: "node-limit", 2: "infeasible", 3: "unbounded"}.get(res.status, "infeasible")
        return status, None, 0, 0


BACKENDS = {"builtin": BuiltinBackend(), "highs": HighsBackend()}


def get_backend(name: str | None = None) -> Backend:
    return BACKENDS[name or "builtin"]
