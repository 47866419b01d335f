"""Figures for a plan output directory (needs the ``plot`` extra)."""
from __future__ import annotations

import csv
import json
from pathlib import Path


def _rows(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def render(run_dir: Path, out: Path) -> list[Path]:
    """Write PNG figures for the files found in ``run_dir``; return their paths."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out.mkdir(parents=True, exist_ok=True)
    written = []
    sol = json.loads((run_dir / "solution.json").read_text())
    limits = sol["config"]["limits"]

    rows = _rows(run_dir / "metrics.csv")
    fig, axes = plt.subplots(1, 3, figsize=(9, 3.2))
    for ax, key, lim, unit in zip(axes, ("nadir_hz", "rocof_hz_s", "qss_hz"),
                                  (limits["nadir_hz"], limits["rocof_hz_s"], limits["qss_hz"]),
                                  ("Hz", "Hz/s", "Hz")):
        vals = [abs(float(r[key])) for r in rows]
        ax.boxplot(vals)
        ax.axhline(lim, color="red", linestyle=":")
        ax.set_title(key.split("_")[0])
        ax.set_ylabel(f"|value| ({unit})")
        ax.set_xticks([])
    fig.suptitle(f"{sol['algorithm']}: metrics over all slots")
    fig.tight_layout()
    written.append(out / "metrics_box.png")
    fig.savefig(written[-1], dpi=120)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(7, 3))
    labels = []
    for d, day in enumerate(sol["p_grid_kw"]):
        ax.plot(range(len(day)), day, marker="o", label=f"day {d}")
        labels.append(d)
    ax.axhline(0.0, color="grey", linewidth=0.8)
    ax.set_xlabel("period")
    ax.set_ylabel("grid exchange (kW)")
    ax.legend()
    fig.tight_layout()
    written.append(out / "p_grid.png")
    fig.savefig(written[-1], dpi=120)
    plt.close(fig)

    it_path = run_dir / "iterations.jsonl"
    if it_path.exists():
        recs = [json.loads(line) for line in it_path.read_text().splitlines() if line.strip()]
        fig, ax1 = plt.subplots(figsize=(6, 3))
        ks = [r["iteration"] for r in recs]
        ax1.plot(ks, [r["master_objective"] for r in recs], marker="o")
        ax1.set_xlabel("iteration")
        ax1.set_ylabel("master objective ($)")
        ax2 = ax1.twinx()
        ax2.semilogy(ks, [max(r["max_slack_kw"], 1e-9) for r in recs], color="tab:red", marker="s")
        ax2.set_ylabel("max slack (kW)")
        fig.tight_layout()
        written.append(out / "convergence.png")
        fig.savefig(written[-1], dpi=120)
        plt.close(fig)

    trace_path = run_dir / "trace.csv"
    if trace_path.exists():
        tr = _rows(trace_path)
        fig, ax = plt.subplots(figsize=(6, 3))
        ax.plot([float(r["t_s"]) for r in tr], [float(r["df_hz"]) for r in tr])
        ax.set_xlabel("t (s)")
        ax.set_ylabel("CoI deviation (Hz)")
        fig.tight_layout()
        written.append(out / "trace.png")
        fig.savefig(written[-1], dpi=120)
        plt.close(fig)
    return written
