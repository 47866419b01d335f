import csv
import json

import numpy as np
import pytest

from inertia_plan.cli import main

from conftest import SG1


@pytest.fixture
def sg1_file(tmp_path):
    p = tmp_path / "sg1.json"
    p.write_text(json.dumps({"units": [{"kind": "sg", "capacity_kw": 280, "params": SG1}]}))
    return p


@pytest.fixture(scope="module")
def a1_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("a1")
    assert main(["plan", "--input", "fixture:toy", "--algorithm", "a1", "--out", str(out)]) == 0
    return out


def test_plan_outputs(a1_run):
    for name in ("solution.json", "costs.json", "iterations.jsonl", "metrics.csv", "dispatch.csv"):
        assert (a1_run / name).exists()
    doc = json.loads((a1_run / "solution.json").read_text())
    assert doc["converged"] and doc["algorithm"] == "a1"
    assert len(doc["p_grid_kw"]) == 2 and len(doc["p_grid_kw"][0]) == 6
    recs = [json.loads(l) for l in (a1_run / "iterations.jsonl").read_text().splitlines()]
    assert [r["iteration"] for r in recs] == list(range(1, len(recs) + 1))
    with open(a1_run / "metrics.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 12
    assert all(r["nadir_ok"] == r["rocof_ok"] == r["qss_ok"] == "1" for r in rows)


def test_exhaustive_matches_a1(a1_run, tmp_path):
    assert main(["plan", "--input", "fixture:toy", "--algorithm", "exhaustive", "--out", str(tmp_path)]) == 0
    ex = json.loads((tmp_path / "solution.json").read_text())["costs"]["total"]
    a1 = json.loads((a1_run / "solution.json").read_text())["costs"]["total"]
    assert ex == pytest.approx(a1, rel=1e-6)


def test_plan_bad_input(toy_doc, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["plan", "--input", str(bad), "--out", str(tmp_path / "o")]) == 1
    doc = json.loads(json.dumps(toy_doc))
    del doc["units"][1]["capacity_kw"]
    bad.write_text(json.dumps(doc))
    assert main(["plan", "--input", str(bad), "--out", str(tmp_path / "o")]) == 1
    assert "units[1].capacity_kw" in capsys.readouterr().err


def test_plan_no_convergence(tmp_path):
    assert main(["plan", "--input", "fixture:toy", "--max-iter", "1", "--out", str(tmp_path)]) == 2
    assert not json.loads((tmp_path / "solution.json").read_text())["converged"]


def test_plan_debug_dumps_model(tmp_path, monkeypatch):
    monkeypatch.setenv("INERTIA_PLAN_LOG", "debug")
    assert main(["plan", "--input", "fixture:toy", "--algorithm", "a0", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "models" / "master_a0.lp").read_text()
    assert "Minimize" in text and "Subject To" in text and text.rstrip().endswith("End")


def test_metrics_reference(sg1_file, capsys):
    assert main(["metrics", "--input", str(sg1_file), "--dp", "0.2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["nadir_hz"] == pytest.approx(-0.598, abs=1e-3)
    assert doc["rocof_hz_s"] == pytest.approx(-50 * 0.2 / 14)
    assert doc["qss_hz"] == pytest.approx(-0.292, abs=1e-3)
    assert main(["metrics", "--input", str(sg1_file), "--dp", "0"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["nadir_hz"] == doc["rocof_hz_s"] == doc["qss_hz"] == 0


def test_metrics_missing_field(tmp_path, capsys):
    p = tmp_path / "f.json"
    p.write_text(json.dumps({"units": [{"kind": "sg", "capacity_kw": 1, "params": {"M": 14}}]}))
    assert main(["metrics", "--input", str(p), "--dp", "0.2"]) == 1
    assert "units[0].params" in capsys.readouterr().err
    p.write_text(json.dumps({"units": [{"kind": "sg", "params": SG1}]}))
    assert main(["metrics", "--input", str(p), "--dp", "0.2"]) == 1


def test_validate(sg1_file, tmp_path, capsys):
    out = tmp_path / "trace.csv"
    assert main(["validate", "--input", str(sg1_file), "--dp", "0.2", "--out", str(out)]) == 0
    table = capsys.readouterr().out.splitlines()
    assert table[0].split()[0] == "metric" and len(table) == 4
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert float(rows[0]["df_hz"]) == 0.0
    assert min(float(r["df_hz"]) for r in rows) == pytest.approx(-0.598, abs=1e-3)
    assert main(["validate", "--input", str(sg1_file), "--dp", "0.2", "--horizon", "1",
                 "--out", str(out)]) == 1


def test_cluster(tmp_path, capsys):
    rng = np.random.default_rng(0)
    p = tmp_path / "prof.csv"
    with open(p, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["day", "hour", "demand_b1", "pv"])
        for d in range(365):
            shape = 1.0 if d % 2 else 2.0
            for h in range(24):
                w.writerow([d, h, 50 * shape + h, round(float(rng.uniform(0, 0.01)), 4)])
    assert main(["cluster", "--input", str(p), "--k", "2", "--seed", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert sorted(d["weight"] for d in doc["days"]) == [182, 183]
    assert main(["cluster", "--input", str(p), "--k", "2", "--seed", "1", "--out", str(tmp_path / "c.json")]) == 0
    assert main(["cluster", "--input", str(p), "--k", "0"]) == 1


def test_lin_error(capsys):
    assert main(["lin-error", "--n", "200", "--seed", "3"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["count"] == 200 and doc["mean_rel"] < 0.01


def test_report(a1_run, sg1_file, tmp_path):
    pytest.importorskip("matplotlib")
    assert main(["validate", "--input", str(sg1_file), "--dp", "0.2", "--out", str(a1_run / "trace.csv")]) == 0
    out = tmp_path / "fig"
    assert main(["report", "--input", str(a1_run), "--out", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["convergence.png", "metrics_box.png", "p_grid.png", "trace.png"]
    assert all((out / n).stat().st_size > 1000 for n in names)
