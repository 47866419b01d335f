"""Small algebraic modelling layer for linear and binary programs."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

import numpy as np

INF = math.inf

Number = Union[int, float]


class Var:
    __slots__ = ("index", "name", "lb", "ub", "kind")

    def __init__(self, index: int, name: str, lb: float, ub: float, kind: str):
        self.index = index
        self.name = name
        self.lb = lb
        self.ub = ub
        self.kind = kind

    def __repr__(self):
        return f"Var({self.name})"

    def __hash__(self):
        return hash(self.index)

    # arithmetic builds expressions
    def _expr(self) -> "LinExpr":
        return LinExpr({self.index: 1.0})

    def __add__(self, other):
        return self._expr() + other

    __radd__ = __add__

    def __sub__(self, other):
        return self._expr() - other

    def __rsub__(self, other):
        return other - self._expr()

    def __mul__(self, k: Number):
        return self._expr() * k

    __rmul__ = __mul__

    def __neg__(self):
        return self._expr() * -1.0

    def __truediv__(self, k: Number):
        return self._expr() * (1.0 / k)


class LinExpr:
    __slots__ = ("terms", "constant")

    def __init__(self, terms: Mapping[int, float] | None = None, constant: float = 0.0):
        self.terms: dict[int, float] = dict(terms) if terms else {}
        self.constant = float(constant)

    @staticmethod
    def of(x) -> "LinExpr":
        if isinstance(x, LinExpr):
            return x
        if isinstance(x, Var):
            return x._expr()
        return LinExpr(constant=float(x))

    def copy(self) -> "LinExpr":
        return LinExpr(self.terms, self.constant)

    def add_term(self, var: Var, coef: float) -> "LinExpr":
        self.terms[var.index] = self.terms.get(var.index, 0.0) + coef
        return self

    def __iadd__(self, other):
        o = LinExpr.of(other)
        for k, v in o.terms.items():
            self.terms[k] = self.terms.get(k, 0.0) + v
        self.constant += o.constant
        return self

    def __add__(self, other):
        out = self.copy()
        out += other
        return out

    __radd__ = __add__

    def __sub__(self, other):
        return self + LinExpr.of(other) * -1.0

    def __rsub__(self, other):
        return LinExpr.of(other) + self * -1.0

    def __mul__(self, k: Number):
        k = float(k)
        return LinExpr({i: v * k for i, v in self.terms.items()}, self.constant * k)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __truediv__(self, k: Number):
        return self * (1.0 / k)

    def __repr__(self):
        return f"LinExpr({self.terms}, {self.constant})"


def quicksum(items: Iterable) -> LinExpr:
    out = LinExpr()
    for it in items:
        out += it
    return out


@dataclass
class Constraint:
    index: int
    name: str
    expr: LinExpr
    sense: str
    rhs: float


SENSES = ("<=", ">=", "==")


@dataclass(frozen=True)
class ModelArrays:
    c: np.ndarray
    c0: float
    A: np.ndarray
    senses: tuple[str, ...]
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    binary: np.ndarray


class Model:
    """Variables, linear rows and a linear objective (always minimized)."""

    def __init__(self, name: str = "model"):
        self.name = name
        self.vars: list[Var] = []
        self.constrs: list[Constraint] = []
        self.objective = LinExpr()
        self._names: dict[str, Var] = {}
        self._cnames: dict[str, Constraint] = {}
        self._arrays: ModelArrays | None = None

    # -- building ------------------------------------------------------
    def add_var(self, name: str, lb: float = 0.0, ub: float = INF, kind: str = "continuous") -> Var:
        if kind not in ("continuous", "binary"):
            raise ValueError(f"unknown variable kind {kind!r}")
        if kind == "binary":
            lb, ub = max(0.0, lb), min(1.0, ub)
        lb = -INF if lb is None else float(lb)
        ub = INF if ub is None else float(ub)
        if lb > ub:
            raise ValueError(f"variable {name}: lower bound {lb} above upper bound {ub}")
        if name in self._names:
            raise ValueError(f"duplicate variable name {name!r}")
        v = Var(len(self.vars), name, lb, ub, kind)
        self.vars.append(v)
        self._names[name] = v
        self._arrays = None
        return v

    def add_constr(self, lhs, sense: str, rhs=0.0, name: str | None = None) -> Constraint:
        if sense not in SENSES:
            raise ValueError(f"unknown sense {sense!r}")
        expr = LinExpr.of(lhs) - LinExpr.of(rhs)
        for idx in expr.terms:
            if idx >= len(self.vars):
                raise ValueError(f"constraint references undeclared variable #{idx}")
        name = name or f"c{len(self.constrs)}"
        if name in self._cnames:
            raise ValueError(f"duplicate constraint name {name!r}")
        con = Constraint(len(self.constrs), name, LinExpr(expr.terms), sense, -expr.constant)
        self.constrs.append(con)
        self._cnames[name] = con
        self._arrays = None
        return con

    def minimize(self, expr) -> None:
        self.objective = LinExpr.of(expr).copy()
        self._arrays = None

    # -- lookup --------------------------------------------------------
    def var(self, name: str) -> Var:
        return self._names[name]

    def constr(self, name: str) -> Constraint:
        return self._cnames[name]

    @property
    def has_binaries(self) -> bool:
        return any(v.kind == "binary" for v in self.vars)

    # -- export --------------------------------------------------------
    def arrays(self) -> ModelArrays:
        if self._arrays is None:
            n, m = len(self.vars), len(self.constrs)
            c = np.zeros(n)
            for i, v in self.objective.terms.items():
                c[i] += v
            A = np.zeros((m, n))
            b = np.empty(m)
            for r, con in enumerate(self.constrs):
                for i, v in con.expr.terms.items():
                    A[r, i] += v
                b[r] = con.rhs
            self._arrays = ModelArrays(
                c=c, c0=self.objective.constant, A=A,
                senses=tuple(con.sense for con in self.constrs), b=b,
                lb=np.array([v.lb for v in self.vars], dtype=float),
                ub=np.array([v.ub for v in self.vars], dtype=float),
                binary=np.array([v.kind == "binary" for v in self.vars], dtype=bool),
            )
        return self._arrays


def _fmt_terms(expr: LinExpr, names: list[str]) -> str:
    parts = []
    for i in sorted(expr.terms):
        v = expr.terms[i]
        if v == 0:
            continue
        sign = "-" if v < 0 else "+"
        mag = abs(v)
        coef = "" if mag == 1 else f"{mag:.12g} "
        parts.append(f"{sign} {coef}{names[i]}")
    if not parts:
        return "0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def to_lp_text(model: Model) -> str:
    """Human-readable dump in CPLEX LP style."""
    names = [v.name for v in model.vars]
    out = [f"\\ {model.name}", "Minimize", f" obj: {_fmt_terms(model.objective, names)}"]
    if model.objective.constant:
        out[-1] += f" + {model.objective.constant:.12g}"
    out.append("Subject To")
    op = {"<=": "<=", ">=": ">=", "==": "="}
    for con in model.constrs:
        out.append(f" {con.name}: {_fmt_terms(con.expr, names)} {op[con.sense]} {con.rhs:.12g}")
    out.append("Bounds")
    for v in model.vars:
        if v.kind == "binary":
            continue
        lo = "-inf" if v.lb == -INF else f"{v.lb:.12g}"
        hi = "+inf" if v.ub == INF else f"{v.ub:.12g}"
        out.append(f" {lo} <= {v.name} <= {hi}")
    bins = [v.name for v in model.vars if v.kind == "binary"]
    if bins:
        out.append("Binaries")
        out.append(" " + " ".join(bins))
    out.append("End")
    return "\n".join(out) + "\n"
