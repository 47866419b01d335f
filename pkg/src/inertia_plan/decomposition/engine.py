"""Iteration engines: cut loops A1/A2, bound-tightening baseline A0, exhaustive oracle."""
from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import Callable

from ..freq_response import FrequencyMetrics, LimitReport, aggregate, check_limits, metrics
from ..mg.costs import CostBreakdown, cost_breakdown
from ..mg.instance import PlanningInstance
from ..mg.master import MasterSolution, add_cut, build_master, fleet_breve, solve_master
from .subproblems import FeasibilityCut, FrozenBounds, frozen_bounds, make_cut, solve_sub, taylor_point

log = logging.getLogger("inertia_plan.decomposition")

DEFAULT_TOL = 1e-3
DEFAULT_MAX_ITER = 25
MAX_CANDIDATES = 12


class NoConvergence(RuntimeError):
    def __init__(self, message: str, log_: "IterationLog", result: "PlanResult | None" = None):
        super().__init__(message)
        self.log = log_
        self.result = result


class MasterInfeasible(RuntimeError):
    pass


class TooManyCandidates(ValueError):
    pass


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    master_objective: float
    infeasible_subproblems: int
    max_slack: float
    cuts_added: int
    built: tuple[str, ...]
    wall_time: float

    def as_dict(self) -> dict:
        return {"iteration": self.iteration, "master_objective": self.master_objective,
                "infeasible_subproblems": self.infeasible_subproblems, "max_slack_kw": self.max_slack,
                "cuts_added": self.cuts_added, "built": list(self.built), "wall_time_s": self.wall_time}


@dataclass
class IterationLog:
    algorithm: str
    records: list[IterationRecord] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class SlotMetrics:
    slot: tuple[int, int]
    p_grid: float
    dp_pu: float
    metrics: FrequencyMetrics
    report: LimitReport


@dataclass
class PlanResult:
    algorithm: str
    converged: bool
    solution: MasterSolution
    costs: CostBreakdown
    slot_metrics: list[SlotMetrics]
    log: IterationLog
    cuts: list[FeasibilityCut] = field(default_factory=list)
    bounds: dict = field(default_factory=dict)

    @property
    def built(self) -> tuple[str, ...]:
        return self.solution.built

    @property
    def iterations(self) -> int:
        return self.log.iterations

    @property
    def total_cost(self) -> float:
        return self.costs.total

    def aggregates(self, inst: PlanningInstance):
        return aggregate(inst.fleet(self.solution.z))


def exact_metrics(inst: PlanningInstance, sol: MasterSolution, tol_hz: float = 0.0) -> list[SlotMetrics]:
    """Closed-form metrics per slot for the islanding event ``dp = -p_grid / P_base``."""
    agg = aggregate(inst.fleet(sol.z))
    out = []
    for slot in inst.slots():
        p = sol.p_grid[slot]
        dp = -p / agg.p_base
        m = metrics(agg.coi, dp, inst.turbine_t, inst.f_base)
        out.append(SlotMetrics(slot, p, dp, m, check_limits(m, inst.limits, tol_hz)))
    return out


def _tol_hz(inst: PlanningInstance, sol: MasterSolution, tol_kw: float) -> float:
    """Frequency margin equivalent to ``2 * tol`` kW of exchange on the frozen fleet."""
    b = fleet_breve(inst, sol.z)
    lim = inst.limits
    fb = frozen_bounds(b, lim, inst.turbine_t)
    ratios = [lim.nadir / fb.nadir, lim.rocof / fb.rocof, lim.qss / fb.qss]
    return 2.0 * tol_kw * max(r for r in ratios if r > 0)


def _finish(inst, algorithm, sol, log_, tol, converged, cuts=(), bounds=None) -> PlanResult:
    return PlanResult(algorithm, converged, sol, cost_breakdown(inst, sol),
                      exact_metrics(inst, sol, _tol_hz(inst, sol, tol)), log_, list(cuts), dict(bounds or {}))


def run(inst: PlanningInstance, algorithm: str = "a1", tol: float = DEFAULT_TOL,
        max_iter: int = DEFAULT_MAX_ITER, backend: str | None = None,
        on_iteration: Callable[[IterationRecord], None] | None = None) -> PlanResult:
    """Cut loop: master, linearize at its fleet, per-slot sub-problems, cuts."""
    if algorithm not in ("a1", "a2"):
        raise ValueError(f"run() handles a1/a2, got {algorithm!r}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    master = build_master(inst, algorithm)
    log_ = IterationLog(algorithm)
    cuts: list[FeasibilityCut] = []
    sol = None
    for k in range(1, max_iter + 1):
        t0 = time.perf_counter()
        sol = solve_master(master, backend)
        if sol is None:
            raise MasterInfeasible(f"{algorithm} master infeasible at iteration {k}")
        tp = taylor_point(sol, inst.turbine_t)
        subs = [solve_sub(inst, algorithm, sol, slot, tp, backend) for slot in inst.slots()]
        violated = [r for r in subs if r.slack > tol]
        max_slack = max((r.slack for r in subs), default=0.0)
        new = [make_cut(r) for r in violated]
        for c in new:
            add_cut(master, c)
        cuts.extend(new)
        rec = IterationRecord(k, sol.objective, len(violated), max_slack, len(new), sol.built,
                              time.perf_counter() - t0)
        log_.records.append(rec)
        log.info("%s iter %d obj=%.6f violated=%d max_slack=%.6g", algorithm, k, sol.objective,
                 len(violated), max_slack)
        if on_iteration:
            on_iteration(rec)
        if not violated:
            return _finish(inst, algorithm, sol, log_, tol, True, cuts)
    result = _finish(inst, algorithm, sol, log_, tol, False, cuts)
    raise NoConvergence(f"{algorithm} did not converge within {max_iter} iterations", log_, result)


def run_a0(inst: PlanningInstance, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
           backend: str | None = None,
           on_iteration: Callable[[IterationRecord], None] | None = None) -> PlanResult:
    """Baseline: no frequency content in the master; violated slots get hard
    exchange bounds from the current fleet.  Bounds only ever tighten."""
    bounds: dict[tuple[int, int], float] = {}
    log_ = IterationLog("a0")
    sol = None
    for k in range(1, max_iter + 1):
        t0 = time.perf_counter()
        sol = solve_master(build_master(inst, "a2", grid_bounds=bounds), backend)
        if sol is None:
            raise MasterInfeasible(f"a0 master infeasible at iteration {k}")
        fb = frozen_bounds(fleet_breve(inst, sol.z), inst.limits, inst.turbine_t).binding
        excess = {s: abs(p) - fb for s, p in sol.p_grid.items()}
        violated = sorted(s for s, e in excess.items() if e > tol)
        for s in violated:
            bounds[s] = min(bounds.get(s, float("inf")), fb)
        max_slack = max(0.0, max(excess.values(), default=0.0))
        rec = IterationRecord(k, sol.objective, len(violated), max_slack, len(violated), sol.built,
                              time.perf_counter() - t0)
        log_.records.append(rec)
        log.info("a0 iter %d obj=%.6f violated=%d", k, sol.objective, len(violated))
        if on_iteration:
            on_iteration(rec)
        if not violated:
            return _finish(inst, "a0", sol, log_, tol, True, bounds=bounds)
    result = _finish(inst, "a0", sol, log_, tol, False, bounds=bounds)
    raise NoConvergence(f"a0 did not converge within {max_iter} iterations", log_, result)


@dataclass(frozen=True)
class OracleEntry:
    built: tuple[str, ...]
    bounds: FrozenBounds
    objective: float | None


class AllInfeasible(RuntimeError):
    def __init__(self, message: str, entries: list[OracleEntry]):
        super().__init__(message)
        self.entries = entries


def run_exhaustive(inst: PlanningInstance, backend: str | None = None,
                   tol: float = DEFAULT_TOL) -> PlanResult:
    """Certified optimum: every investment combination with its exact bound."""
    cands = inst.candidates
    if len(cands) > MAX_CANDIDATES:
        raise TooManyCandidates(f"{len(cands)} candidates exceed the limit of {MAX_CANDIDATES}")
    best = None
    entries = []
    log_ = IterationLog("exhaustive")
    t0 = time.perf_counter()
    for combo in itertools.product((0, 1), repeat=len(cands)):
        built = {u.name: c for u, c in zip(cands, combo)}
        fb = frozen_bounds(fleet_breve(inst, built), inst.limits, inst.turbine_t)
        bmap = {s: fb.binding for s in inst.slots()}
        sol = solve_master(build_master(inst, "a2", grid_bounds=bmap, fixed_z=built), backend)
        names = tuple(n for n, v in built.items() if v)
        entries.append(OracleEntry(names, fb, sol.objective if sol else None))
        # strict improvement keeps the first (fewest-units-first enumeration order) on ties
        if sol is not None and (best is None or sol.objective < best[0].objective - 1e-9 * max(1.0, abs(sol.objective))):
            best = (sol, bmap)
    if best is None:
        raise AllInfeasible("no investment combination admits a feasible plan", entries)
    sol, bmap = best
    log_.records.append(IterationRecord(1, sol.objective, 0, 0.0, 0, sol.built, time.perf_counter() - t0))
    res = _finish(inst, "exhaustive", sol, log_, tol, True, bounds=bmap)
    res.oracle = entries
    return res


def plan(inst: PlanningInstance, algorithm: str, tol: float = DEFAULT_TOL,
         max_iter: int = DEFAULT_MAX_ITER, backend: str | None = None,
         on_iteration: Callable[[IterationRecord], None] | None = None) -> PlanResult:
    if algorithm in ("a1", "a2"):
        return run(inst, algorithm, tol, max_iter, backend, on_iteration)
    if algorithm == "a0":
        return run_a0(inst, tol, max_iter, backend, on_iteration)
    if algorithm == "exhaustive":
        return run_exhaustive(inst, backend, tol)
    raise ValueError(f"unknown algorithm {algorithm!r}")
