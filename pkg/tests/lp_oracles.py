"""Random instance generators and independent checks shared by the solver tests."""
import itertools

import numpy as np
from scipy.optimize import linprog

from inertia_plan.opt import Model, quicksum

SENSE_SET = ("<=", ">=", "==")


def random_lp(rng, n=None, m=None, integral=False):
    """Feasible box-bounded LP; returns (model, vars, constrs)."""
    n = n or int(rng.integers(2, 8))
    m = m or int(rng.integers(1, 7))
    lb = rng.uniform(-5, 0, n).round(2)
    ub = lb + rng.uniform(0.5, 6, n).round(2)
    x0 = rng.uniform(lb, ub)
    A = rng.integers(-4, 5, size=(m, n)).astype(float) if integral else rng.normal(size=(m, n)).round(3)
    c = rng.normal(size=n).round(3)
    model = Model("rand")
    xs = [model.add_var(f"x{j}", lb[j], ub[j]) for j in range(n)]
    rows = []
    for i in range(m):
        sense = SENSE_SET[int(rng.integers(0, 3))] if i else "<="
        act = float(A[i] @ x0)
        rhs = {"<=": act + rng.uniform(0, 2), ">=": act - rng.uniform(0, 2), "==": act}[sense]
        rows.append(model.add_constr(quicksum(A[i, j] * xs[j] for j in range(n)), sense, float(rhs)))
    model.minimize(quicksum(c[j] * xs[j] for j in range(n)))
    return model, xs, rows


def lagrangian_bound(model, y):
    """Dual function value at multipliers ``y`` (valid lower bound if signs are right)."""
    a = model.arrays()
    rc = a.c - a.A.T @ y
    box = np.where(rc >= 0, rc * a.lb, rc * a.ub)
    return float(y @ a.b + box.sum() + a.c0)


def dual_sign_ok(model, y, tol=1e-9):
    a = model.arrays()
    for s, v in zip(a.senses, y):
        if s == "<=" and v > tol:
            return False
        if s == ">=" and v < -tol:
            return False
    return True


def random_milp(rng, n_bin, n_cont=0):
    n = n_bin + n_cont
    m = int(rng.integers(1, 5))
    model = Model("rmip")
    xs = [model.add_var(f"z{j}", 0, 1, kind="binary") for j in range(n_bin)]
    xs += [model.add_var(f"y{j}", 0, float(rng.uniform(1, 4))) for j in range(n_cont)]
    A = rng.integers(-5, 6, size=(m, n)).astype(float)
    # keep the all-zero point feasible so every instance has an optimum
    b = rng.integers(0, 8, size=m).astype(float)
    c = rng.integers(-9, 10, size=n).astype(float)
    for i in range(m):
        model.add_constr(quicksum(A[i, j] * xs[j] for j in range(n)), "<=", b[i])
    model.minimize(quicksum(c[j] * xs[j] for j in range(n)))
    return model, (A, b, c, n_bin, n_cont, [v.ub for v in xs[n_bin:]])


def enumerate_milp(data):
    """Best objective over every binary assignment; the continuous part goes to HiGHS."""
    A, b, c, n_bin, n_cont, cont_ub = data
    Z = np.array(list(itertools.product((0.0, 1.0), repeat=n_bin)))
    if n_cont == 0:
        ok = np.all(Z @ A.T <= b + 1e-9, axis=1)
        return float(np.min(Z[ok] @ c)) if ok.any() else None
    best = None
    for z in Z:
        rhs = b - A[:, :n_bin] @ z
        res = linprog(c[n_bin:], A_ub=A[:, n_bin:], b_ub=rhs, bounds=[(0, u) for u in cont_ub],
                      method="highs")
        if res.status == 0:
            val = float(c[:n_bin] @ z + res.fun)
            best = val if best is None else min(best, val)
    return best
