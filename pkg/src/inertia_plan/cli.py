"""inertia-plan command line.

Subcommands: plan, metrics, validate, cluster, lin-error, report.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from . import data
from .decomposition import (AllInfeasible, MasterInfeasible, NoConvergence, PlanResult,
                            TooManyCandidates, plan)
from .freq_response import (DEFAULT_F_BASE, DEFAULT_TURBINE_T, FrequencyModelError, aggregate,
                            fleet_from_rows, metrics)
from .linearize import error_stats
from .mg import InstanceError, InfeasibleStructure, build_master, cluster_days, load_instance
from .opt import to_lp_text
from .sim_validate import NotSettled, StepTooLarge, simulate, trace_metrics

log = logging.getLogger("inertia_plan")

LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}

EXIT_OK, EXIT_INPUT, EXIT_NO_CONVERGENCE = 0, 1, 2


class CliError(Exception):
    pass


def _setup_logging() -> str:
    level = os.environ.get("INERTIA_PLAN_LOG", "error").lower()
    if level not in LOG_LEVELS:
        level = "error"
    logging.basicConfig(level=LOG_LEVELS[level], stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    return level


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _resolve_input(raw: str) -> Path:
    if raw.startswith("fixture:"):
        return data.fixture_path(raw.split(":", 1)[1])
    return Path(raw)


# --------------------------------------------------------------------------
# plan


def _solution_doc(inst, res: PlanResult, args) -> dict:
    sol = res.solution
    agg = res.aggregates(inst)
    pg = [[sol.p_grid[(o, t)] for t in range(inst.periods)] for o in range(len(inst.days))]
    return {
        "instance": inst.name,
        "algorithm": res.algorithm,
        "converged": res.converged,
        "iterations": res.iterations,
        "investments": {n: int(v) for n, v in sorted(sol.z.items())},
        "built": sorted(sol.built),
        "master_objective": sol.objective,
        "gamma": sol.gamma,
        "costs": res.costs.as_dict(),
        "p_grid_kw": pg,
        "aggregates": {
            "p_base_kw": agg.p_base, "inertia_s": agg.inertia, "damping_pu": agg.damping,
            "gov_gain_pu": agg.gov_gain, "hp_gain_pu": agg.hp_gain,
            "sg_gov_gain_pu": agg.sg_gov_gain, "sg_hp_gain_pu": agg.sg_hp_gain,
        },
        "config": {"tol_kw": args.tol, "max_iter": args.max_iter, "seed": args.seed,
                   "turbine_t": inst.turbine_t, "f_base": inst.f_base,
                   "limits": {"nadir_hz": inst.limits.nadir, "rocof_hz_s": inst.limits.rocof,
                              "qss_hz": inst.limits.qss}},
    }


def _write_plan_outputs(out: Path, inst, res: PlanResult, args) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "solution.json").write_text(_dump(_solution_doc(inst, res, args)))
    (out / "costs.json").write_text(_dump(res.costs.as_dict()))
    with open(out / "iterations.jsonl", "w") as fh:
        for rec in res.log.records:
            fh.write(json.dumps(rec.as_dict(), sort_keys=True) + "\n")
    with open(out / "metrics.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["day", "period", "p_grid_kw", "dp_pu", "nadir_hz", "rocof_hz_s", "qss_hz",
                    "nadir_ok", "rocof_ok", "qss_ok"])
        for sm in res.slot_metrics:
            m = sm.metrics
            w.writerow([sm.slot[0], sm.slot[1], repr(sm.p_grid), repr(sm.dp_pu), repr(m.nadir),
                        repr(m.rocof), repr(m.qss), int(sm.report["nadir"].ok),
                        int(sm.report["rocof"].ok), int(sm.report["qss"].ok)])
    sol = res.solution
    with open(out / "dispatch.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        names = [u.name for u in inst.units]
        w.writerow(["day", "period", "mode"] + [f"p_{n}_kw" for n in names] + ["p_grid_kw", "penalty"])
        for slot in inst.slots():
            g = sol.dispatch[slot]
            w.writerow([slot[0], slot[1], "grid"] + [repr(g[n]) for n in names] + [repr(sol.p_grid[slot]), ""])
            gi = sol.island_dispatch[slot]
            w.writerow([slot[0], slot[1], "islanded"] + [repr(gi[n]) for n in names] + ["0.0", repr(sol.penalties[slot])])


def _dump_models(out: Path, inst, res: PlanResult) -> None:
    kw = {}
    if res.algorithm in ("a0", "exhaustive"):
        kw["grid_bounds"] = res.bounds
    if res.algorithm == "exhaustive":
        kw["fixed_z"] = res.solution.z
    master = build_master(inst, "a1" if res.algorithm == "a1" else "a2", cuts=res.cuts, **kw)
    mdir = out / "models"
    mdir.mkdir(parents=True, exist_ok=True)
    (mdir / f"master_{res.algorithm}.lp").write_text(to_lp_text(master.model))


def cmd_plan(args) -> int:
    level = _setup_logging()
    if args.tol <= 0:
        raise CliError("--tol must be positive")
    inst = load_instance(_resolve_input(args.input))
    if args.turbine_t is not None:
        inst = inst.with_(turbine_t=args.turbine_t)
    if args.fbase is not None:
        inst = inst.with_limits(f_base=args.fbase)
    out = Path(args.out)
    code = EXIT_OK
    try:
        res = plan(inst, args.algorithm, tol=args.tol, max_iter=args.max_iter)
    except NoConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        res = exc.result
        code = EXIT_NO_CONVERGENCE
    _write_plan_outputs(out, inst, res, args)
    if level == "debug":
        _dump_models(out, inst, res)
    print(json.dumps({"algorithm": res.algorithm, "built": sorted(res.built), "converged": res.converged,
                      "iterations": res.iterations, "total_cost": res.total_cost}, sort_keys=True))
    return code


# --------------------------------------------------------------------------
# fleet commands


def _load_fleet(path: str):
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from exc
    rows = doc.get("units") if isinstance(doc, dict) else doc
    if not isinstance(rows, list):
        raise CliError(f"{path}: expected a list of units or an object with 'units'")
    fixed = []
    for i, row in enumerate(rows):
        if not isinstance(row, dict):
            raise CliError(f"units[{i}]: expected an object")
        for key in ("kind", "capacity_kw"):
            if key not in row:
                raise CliError(f"units[{i}].{key}: missing field")
        r = dict(row)
        if "committed" not in r:
            r["committed"] = True
        fixed.append((i, r))
    out = []
    for i, r in fixed:
        try:
            fleet_from_rows([r])
        except KeyError as exc:
            raise CliError(f"units[{i}].params.{exc.args[0]}: missing field") from exc
        out.append(r)
    return fleet_from_rows(out)


def _metrics_doc(m) -> dict:
    return {"nadir_hz": m.nadir, "qss_hz": m.qss, "rocof_hz_s": m.rocof}


def cmd_metrics(args) -> int:
    _setup_logging()
    agg = aggregate(_load_fleet(args.input))
    m = metrics(agg.coi, args.dp, args.turbine_t, args.fbase)
    doc = _metrics_doc(m)
    doc["aggregates"] = {"damping_pu": agg.damping, "gov_gain_pu": agg.gov_gain,
                         "hp_gain_pu": agg.hp_gain, "inertia_s": agg.inertia, "p_base_kw": agg.p_base}
    sys.stdout.write(_dump(doc))
    return EXIT_OK


def cmd_validate(args) -> int:
    _setup_logging()
    agg = aggregate(_load_fleet(args.input))
    closed = metrics(agg.coi, args.dp, args.turbine_t, args.fbase)
    trace = simulate(agg.coi, args.dp, args.turbine_t, args.horizon, args.dt, args.fbase)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_s", "df_hz", "dfdt_hz_s"])
        for t, df, dd in zip(trace.t, trace.df, trace.dfdt):
            w.writerow([f"{t:.6f}", repr(float(df)), repr(float(dd))])
    sim = trace_metrics(trace)
    print(f"{'metric':<8} {'closed_form':>14} {'rk4':>14} {'abs_diff':>11}")
    for name in ("nadir", "rocof", "qss"):
        a, b = getattr(closed, name), getattr(sim, name)
        print(f"{name:<8} {a:>14.8f} {b:>14.8f} {abs(a - b):>11.3e}")
    return EXIT_OK


# --------------------------------------------------------------------------
# clustering


def _read_profiles(path: str):
    import numpy as np

    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise CliError(f"{path}: no rows")
    cols = rows[0].keys()
    hour_key = "hour" if "hour" in cols else "period"
    for key in ("day", hour_key):
        if key not in cols:
            raise CliError(f"{path}: missing column {key!r}")
    buses = [c[len("demand_"):] for c in cols if c.startswith("demand_")]
    if not buses:
        raise CliError(f"{path}: no demand_<bus> columns")
    days = sorted({int(r["day"]) for r in rows})
    hours = sorted({int(r[hour_key]) for r in rows})
    di = {d: i for i, d in enumerate(days)}
    hi = {h: i for i, h in enumerate(hours)}
    dem = {b: np.zeros((len(days), len(hours))) for b in buses}
    pv = np.zeros((len(days), len(hours))) if "pv" in cols else None
    for k, r in enumerate(rows):
        i, j = di[int(r["day"])], hi[int(r[hour_key])]
        try:
            for b in buses:
                dem[b][i, j] = float(r[f"demand_{b}"])
            if pv is not None:
                pv[i, j] = float(r["pv"])
        except ValueError as exc:
            raise CliError(f"{path}: row {k + 2}: {exc}") from exc
    return dem, pv


def cmd_cluster(args) -> int:
    _setup_logging()
    dem, pv = _read_profiles(args.input)
    days = cluster_days(dem, args.k, args.seed, pv=pv)
    doc = [{"name": d.name, "weight": d.weight, "pv": list(d.pv),
            "demand_kw": {b: list(v) for b, v in sorted(d.demand.items())}} for d in days]
    text = _dump({"days": doc})
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_lin_error(args) -> int:
    _setup_logging()
    st = error_stats(args.n, spread=args.spread, dp=args.dp, turbine_t=args.turbine_t, seed=args.seed)
    sys.stdout.write(_dump(st.as_dict()))
    return EXIT_OK


def cmd_report(args) -> int:
    _setup_logging()
    from .report import render

    written = render(Path(args.input), Path(args.out))
    for p in written:
        print(p)
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="inertia-plan",
                                 description="Frequency-secure microgrid investment planning.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="solve a planning instance")
    p.add_argument("--input", required=True, help="instance JSON (or fixture:<name>)")
    p.add_argument("--algorithm", choices=("a0", "a1", "a2", "exhaustive"), default="a1")
    p.add_argument("--max-iter", type=int, default=25)
    p.add_argument("--tol", type=float, default=1e-3, help="slack tolerance, kW")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--turbine-t", type=float, default=None)
    p.add_argument("--fbase", type=float, default=None)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_plan)

    def fleet_args(q):
        q.add_argument("--input", required=True, help="fleet JSON")
        q.add_argument("--dp", type=float, required=True, help="power step, p.u. of the fleet base")
        q.add_argument("--turbine-t", type=float, default=DEFAULT_TURBINE_T)
        q.add_argument("--fbase", type=float, default=DEFAULT_F_BASE)

    q = sub.add_parser("metrics", help="closed-form nadir, RoCoF and QSS of a fleet")
    fleet_args(q)
    q.set_defaults(func=cmd_metrics)

    q = sub.add_parser("validate", help="RK4 trace against the closed forms")
    fleet_args(q)
    q.add_argument("--horizon", type=float, default=30.0)
    q.add_argument("--dt", type=float, default=1e-3)
    q.add_argument("--out", default="trace.csv")
    q.set_defaults(func=cmd_validate)

    q = sub.add_parser("cluster", help="representative days from daily profiles")
    q.add_argument("--input", required=True, help="CSV with day, hour, demand_<bus>..., pv")
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_cluster)

    q = sub.add_parser("lin-error", help="error of the linearized nadir on sampled fleets")
    q.add_argument("--n", type=int, default=1000)
    q.add_argument("--spread", type=float, default=0.2)
    q.add_argument("--dp", type=float, default=0.2)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--turbine-t", type=float, default=DEFAULT_TURBINE_T)
    q.set_defaults(func=cmd_lin_error)

    q = sub.add_parser("report", help="render figures from a plan output directory")
    q.add_argument("--input", required=True, help="directory written by 'plan'")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InstanceError, CliError, InfeasibleStructure, FrequencyModelError, StepTooLarge,
            NotSettled, TooManyCandidates, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (MasterInfeasible, AllInfeasible) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
