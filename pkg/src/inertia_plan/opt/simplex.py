"""Dense-tableau bounded-variable primal simplex.

Problem form::

    min c.x   s.t.  A x (<=|>=|==) b,   lb <= x <= ub

Every inequality row gets a slack column (``[0, inf)`` for ``<=``,
``(-inf, 0]`` for ``>=``).  Rows whose slack cannot start basic get an
artificial column and phase I minimizes the artificial sum.  Pricing is
Dantzig's rule; after a run of degenerate pivots it switches to Bland's
rule until the objective moves again.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

INF = np.inf

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-9
DEGENERATE_RUN = 50
REFACTOR_EVERY = 100


@dataclass
class LPResult:
    status: str  # optimal | infeasible | unbounded | iteration-limit
    x: np.ndarray | None
    objective: float | None
    duals: np.ndarray | None
    reduced_costs: np.ndarray | None
    iterations: int


class _Tableau:
    def __init__(self, A, b, lb, ub, basis, xval):
        self.A = A  # m x N, original columns (for refactoring)
        self.b = b
        self.lb = lb
        self.ub = ub
        self.basis = basis
        self.x = xval  # full primal vector, nonbasic at bound (or 0 if free)
        self.refactor()

    def refactor(self):
        m = self.A.shape[0]
        B = self.A[:, self.basis]
        self.T = np.linalg.solve(B, self.A) if m else np.zeros_like(self.A)
        nb = np.ones(self.A.shape[1], dtype=bool)
        nb[self.basis] = False
        rhs = self.b - self.A[:, nb] @ self.x[nb]
        self.x[self.basis] = np.linalg.solve(B, rhs) if m else rhs
        self.since_refactor = 0

    def pivot(self, r: int, j: int):
        T = self.T
        row = T[r] / T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, row)
        T[r] = row
        self.basis[r] = j
        self.since_refactor += 1


def _run(tab: _Tableau, cost: np.ndarray, active: np.ndarray, max_iter: int,
         it0: int) -> tuple[str, int]:
    """Primal simplex iterations on ``tab`` for the given cost vector."""
    it = it0
    degenerate = 0
    scale = max(1.0, float(np.max(np.abs(cost)))) if cost.size else 1.0
    dtol = 1e-9 * scale
    lb, ub, x = tab.lb, tab.ub, tab.x
    fixed = lb == ub
    while True:
        if tab.since_refactor >= REFACTOR_EVERY:
            tab.refactor()
        cB = cost[tab.basis]
        d = cost - cB @ tab.T
        in_basis = np.zeros(len(cost), dtype=bool)
        in_basis[tab.basis] = True
        at_lb = np.isfinite(lb) & (np.abs(x - lb) <= FEAS_TOL * (1 + np.abs(lb)))
        at_ub = np.isfinite(ub) & (np.abs(x - ub) <= FEAS_TOL * (1 + np.abs(ub)))
        can_up = (d < -dtol) & ~at_ub & active & ~fixed
        can_dn = (d > dtol) & ~at_lb & active & ~fixed
        can_up &= ~in_basis
        can_dn &= ~in_basis
        elig = can_up | can_dn
        if not elig.any():
            return "optimal", it
        if it >= max_iter:
            return "iteration-limit", it
        if degenerate >= DEGENERATE_RUN:
            j = int(np.flatnonzero(elig)[0])
        else:
            score = np.where(elig, np.abs(d), -1.0)
            j = int(np.argmax(score))
        delta = 1.0 if can_up[j] else -1.0
        alpha = tab.T[:, j] * delta  # x_B decreases by theta * alpha
        xB = x[tab.basis]
        lbB = lb[tab.basis]
        ubB = ub[tab.basis]
        theta = INF
        r = -1
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.full(len(alpha), INF)
            dec = alpha > PIVOT_TOL
            inc = alpha < -PIVOT_TOL
            ratio[dec] = (xB[dec] - lbB[dec]) / alpha[dec]
            ratio[inc] = (ubB[inc] - xB[inc]) / (-alpha[inc])
        ratio = np.maximum(ratio, 0.0)
        if ratio.size:
            tmin = float(np.min(ratio))
            if np.isfinite(tmin):
                ties = np.flatnonzero(ratio <= tmin + 1e-12 * max(1.0, tmin))
                if degenerate >= DEGENERATE_RUN:
                    r = int(ties[np.argmin(np.asarray(tab.basis)[ties])])
                else:
                    mags = np.abs(alpha[ties])
                    best = np.flatnonzero(mags >= mags.max() * (1 - 1e-12))
                    cand = ties[best]
                    r = int(cand[np.argmin(np.asarray(tab.basis)[cand])])
                theta = tmin
        span = ub[j] - lb[j]
        if span < theta:
            # bound flip, no basis change
            theta = span
            r = -1
        if not np.isfinite(theta):
            return "unbounded", it
        it += 1
        degenerate = degenerate + 1 if theta <= 1e-12 else 0
        x[tab.basis] = xB - theta * alpha
        x[j] += delta * theta
        if r >= 0:
            leaving = tab.basis[r]
            hit = alpha[r] > 0
            x[leaving] = lb[leaving] if hit else ub[leaving]
            tab.pivot(r, j)
        else:
            tab.since_refactor += 1
            x[j] = ub[j] if delta > 0 else lb[j]


def solve(c: np.ndarray, A: np.ndarray, senses: Sequence[str], b: np.ndarray,
          lb: np.ndarray, ub: np.ndarray, max_iter: int = 10**6) -> LPResult:
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    if np.any(lb > ub):
        return LPResult("infeasible", None, None, None, None, 0)

    x0 = np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))
    resid = b - A @ x0

    ineq = [r for r in range(m) if senses[r] != "=="]
    cols = [A]
    slack_lb, slack_ub = [], []
    S = np.zeros((m, len(ineq)))
    slack_of = {}
    for k, r in enumerate(ineq):
        S[r, k] = 1.0
        slack_of[r] = n + k
        if senses[r] == "<=":
            slack_lb.append(0.0)
            slack_ub.append(INF)
        else:
            slack_lb.append(-INF)
            slack_ub.append(0.0)
    cols.append(S)
    n_s = len(ineq)

    basis = [0] * m
    xs = np.zeros(n_s)
    art_rows = []
    for r in range(m):
        if r in slack_of:
            k = slack_of[r] - n
            ok = resid[r] >= -FEAS_TOL if senses[r] == "<=" else resid[r] <= FEAS_TOL
            if ok:
                basis[r] = slack_of[r]
                xs[k] = resid[r]
                continue
        art_rows.append(r)
    n_a = len(art_rows)
    Art = np.zeros((m, n_a))
    xa = np.zeros(n_a)
    for k, r in enumerate(art_rows):
        sig = 1.0 if resid[r] >= 0 else -1.0
        Art[r, k] = sig
        xa[k] = abs(resid[r])
        basis[r] = n + n_s + k
    cols.append(Art)
    Afull = np.hstack(cols)
    N = n + n_s + n_a
    LB = np.concatenate([lb, slack_lb, np.zeros(n_a)])
    UB = np.concatenate([ub, slack_ub, np.full(n_a, INF)])
    xfull = np.concatenate([x0, xs, xa])

    tab = _Tableau(Afull, b.copy(), LB, UB, basis, xfull)
    it = 0
    active = np.ones(N, dtype=bool)
    if n_a:
        c1 = np.zeros(N)
        c1[n + n_s:] = 1.0
        status, it = _run(tab, c1, active, max_iter, it)
        if status == "iteration-limit":
            return LPResult(status, None, None, None, None, it)
        tab.refactor()
        infeas = float(np.sum(tab.x[n + n_s:]))
        if infeas > 1e-7 * max(1.0, float(np.max(np.abs(b))) if m else 1.0):
            return LPResult("infeasible", None, None, None, None, it)
        # fix artificials at zero and drive basic ones out where possible
        tab.ub[n + n_s:] = 0.0
        tab.x[n + n_s:] = 0.0
        for r in range(m):
            j = tab.basis[r]
            if j < n + n_s:
                continue
            row = np.abs(tab.T[r, :n + n_s])
            k = int(np.argmax(row)) if row.size else -1
            if k >= 0 and row[k] > 1e-7:
                tab.pivot(r, k)
        keep = np.ones(N, dtype=bool)
        keep[n + n_s:] = False
        keep[[bb for bb in tab.basis if bb >= n + n_s]] = True
        remap = -np.ones(N, dtype=int)
        remap[keep] = np.arange(int(keep.sum()))
        tab.A = tab.A[:, keep]
        tab.lb = tab.lb[keep]
        tab.ub = tab.ub[keep]
        tab.x = tab.x[keep]
        tab.basis = [int(remap[bb]) for bb in tab.basis]
        tab.refactor()
        N = int(keep.sum())
        active = np.ones(N, dtype=bool)

    c2 = np.zeros(N)
    c2[:n] = c
    status, it = _run(tab, c2, active, max_iter, it)
    if status != "optimal":
        return LPResult(status, None, None, None, None, it)
    tab.refactor()
    B = tab.A[:, tab.basis]
    y = np.linalg.solve(B.T, c2[tab.basis]) if m else np.zeros(0)
    x = tab.x[:n].copy()
    # clip roundoff against bounds
    x = np.minimum(np.maximum(x, lb), ub)
    rc = c - A.T @ y
    return LPResult("optimal", x, float(c @ x), y, rc, it)
