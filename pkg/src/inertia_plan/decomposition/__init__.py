"""Security sub-problems, feasibility cuts and the planning loops."""
from .engine import (DEFAULT_MAX_ITER, DEFAULT_TOL, AllInfeasible, IterationLog, IterationRecord,
                     MasterInfeasible, NoConvergence, OracleEntry, PlanResult, SlotMetrics,
                     TooManyCandidates, exact_metrics, plan, run, run_a0, run_exhaustive)
from .subproblems import (FeasibilityCut, FrozenBounds, SubProblemResult, ZeroBase, build_sub_a1,
                          build_sub_a2, frozen_bounds, make_cut, solve_sub, taylor_point)
