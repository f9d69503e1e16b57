import csv
import json
import math
import os

import numpy as np
import pytest

from vgvalid.cli import main
from vgvalid.garch import FitReport, GjrGarchParams
from vgvalid.timeseries import load_csv
from vgvalid.validation import conditional_volatility_series
from vgvalid.visibility import build_pair

MERVAL_ARGS = ["--alpha0", "0.12", "--alpha1", "0.041", "--beta1", "0.86", "--gamma1", "0.13", "--dof", "5.7"]


def run(*argv):
    return main([str(a) for a in argv])


def body(path):
    """Data lines of an output file, without ``#`` provenance lines."""
    with open(path) as fh:
        return [line for line in fh.read().splitlines() if not line.startswith("#")]


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    null = d / "null.csv"
    assert run("simulate", "--length", 2999, "--seed", 1, "--output", null) == 0
    short = d / "short.csv"
    assert run("simulate", "--length", 800, "--seed", 2, "--output", short) == 0
    params = d / "params.json"
    params.write_text(json.dumps({"alpha0": 0.002, "alpha1": 0.0, "beta1": 0.926, "gamma1": 0.14,
                                  "noise": "t", "dof": 8.9}))
    return {"dir": d, "null": null, "short": short, "params": params}


def test_simulate_output(files, tmp_path):
    lines = (files["short"]).read_text().splitlines()
    prov = json.loads(lines[0][2:])
    assert prov["seed"] == 2 and prov["params"]["beta1"] == 0.926
    assert lines[1] == "index,close,return,volatility"
    assert len(lines) == 2 + 801
    prices = load_csv(files["short"])
    assert len(prices) == 801 and prices.labels is None
    again = tmp_path / "again.csv"
    run("simulate", "--length", 800, "--seed", 2, "--output", again)
    assert again.read_bytes() == files["short"].read_bytes()


def test_fit_merval_persistence(tmp_path, capsys):
    data = tmp_path / "merval.csv"
    assert run("simulate", "--length", 5000, "--seed", 0, "--output", data, *MERVAL_ARGS) == 0
    out = tmp_path / "fit.json"
    assert run("fit", "--input", data, "--json", out) == 0
    table = capsys.readouterr().out
    assert table.splitlines()[0].split() == ["parameter", "estimate", "std.", "error", "t-statistic", "p-value"]
    rep = FitReport.from_json(out.read_text())
    assert abs(rep.params.persistence - 0.966) <= 3 * rep.persistence_std_error()
    assert FitReport.from_json(rep.to_json()) == rep


def test_fit_json_roundtrip(files, tmp_path):
    out = tmp_path / "fit.json"
    assert run("fit", "--input", files["short"], "--json", out, "--quiet") == 0
    rep = FitReport.from_json(out.read_text())
    assert FitReport.from_json(out.read_text()) == rep
    assert rep.nobs == 800


def test_fit_too_short_is_usage_error(tmp_path, capsys):
    data = tmp_path / "tiny.csv"
    run("simulate", "--length", 100, "--output", data)
    assert run("fit", "--input", data) == 2
    assert "at least 250" in capsys.readouterr().err


def test_bad_csv_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("date,close\n2020-01-01,100\n2020-01-02,-3\n")
    assert run("fit", "--input", bad) == 1
    assert "row 2" in capsys.readouterr().err
    assert run("fit", "--input", tmp_path / "missing.csv") == 1
    assert run("fit") == 2


def test_indicator_record_count(files, tmp_path):
    out = tmp_path / "ind.csv"
    assert run("indicator", "--input", files["null"], "--params-json", files["params"],
               "--ensemble-size", 20, "--output", out, "--quiet") == 0
    rows = body(out)
    assert len(rows) - 1 == (3000 - 1 - 500) // 60 + 1
    prov = json.loads(out.read_text().splitlines()[0][2:])
    assert prov["run"]["seed"] == 0 and prov["config"]["ensemble_size"] == 20


def test_indicator_rho_one_counts_every_edge(files, tmp_path):
    out = tmp_path / "ind.csv"
    assert run("indicator", "--input", files["short"], "--params-json", files["params"], "--rho", 1.0,
               "--ensemble-size", 20, "--window", 200, "--shift", 150, "--output", out, "--quiet") == 0
    params = GjrGarchParams.from_dict(json.loads(files["params"].read_text()))
    vol, _, _ = conditional_volatility_series(load_csv(files["short"]), params)
    recs = list(csv.DictReader(body(out)))
    assert len(recs) == 5
    for rec in recs:
        end = int(rec["end_index"])
        vg, ivg = build_pair(vol.values[end - 200:end])
        assert int(rec["n"]) == vg.edge_count
        assert int(rec["n_bar"]) == ivg.edge_count


def test_indicator_deterministic_across_workers(files, tmp_path):
    outs = []
    for k, workers in enumerate((1, 1, 4)):
        out = tmp_path / f"ind{k}.csv"
        assert run("indicator", "--input", files["short"], "--params-json", files["params"], "--seed", 7,
                   "--ensemble-size", 64, "--window", 300, "--shift", 200, "--workers", workers,
                   "--output", out, "--quiet") == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_indicator_json_and_labels(files, tmp_path):
    labels = tmp_path / "events.txt"
    labels.write_text("date\n2008-09-15\n2000-03-10\n")
    out = tmp_path / "ind.json"
    assert run("indicator", "--input", files["short"], "--params-json", files["params"], "--format", "json",
               "--labels", labels, "--ensemble-size", 10, "--window", 400, "--shift", 400,
               "--output", out, "--quiet") == 0
    doc = json.loads(out.read_text())
    assert doc["provenance"]["event_labels"] == ["2008-09-15", "2000-03-10"]
    assert len(doc["records"]) == 2


def test_sweep_outputs(files, tmp_path):
    d = tmp_path / "sweep"
    assert run("sweep", "--input", files["null"], "--params-json", files["params"], "--rho-grid", "0.05,0.1",
               "--window-grid", "250,500", "--shift-grid", "60", "--ensemble-size", 10,
               "--output", d, "--quiet") == 0
    names = sorted(os.listdir(d))
    assert names == sorted(["summary.csv"] + [f"indicator_rho{r}_W{w}_L60.csv"
                                              for r in ("0.05", "0.1") for w in (250, 500)])
    summary = list(csv.DictReader(body(d / "summary.csv")))
    assert len(summary) == 2 and all(-1 <= float(r["spearman_n"]) <= 1 for r in summary)


def test_sweep_single_point_matches_indicator(files, tmp_path):
    common = ["--input", files["short"], "--params-json", files["params"], "--ensemble-size", 16,
              "--window", 300, "--shift", 100, "--rho", 0.2, "--quiet"]
    ind = tmp_path / "ind.csv"
    assert run("indicator", *common, "--output", ind) == 0
    d = tmp_path / "sw"
    assert run("sweep", *common, "--rho-grid", "0.2", "--window-grid", "300", "--shift-grid", "100",
               "--output", d) == 0
    assert (d / "indicator_rho0.2_W300_L100.csv").read_bytes() == ind.read_bytes()


@pytest.mark.parametrize("grid", [["--rho-grid", "0,0.1"], ["--window-grid", "1"], ["--rho-grid", ""]])
def test_sweep_rejects_bad_grids(files, tmp_path, grid):
    assert run("sweep", "--input", files["short"], "--output", tmp_path / "x", *grid) == 2


def test_probe_bundle(files, tmp_path):
    d = tmp_path / "probe"
    assert run("probe", "--input", files["short"], "--params-json", files["params"], "--window", 120,
               "--ensemble-size", 50, "--probe-samples", 20, "--stability-z", "5,20", "--repeats", 3,
               "--output", d, "--quiet") == 0
    assert len(body(d / "distance_profile.csv")) - 1 == 120 - 1
    res = json.loads((d / "rank_sum.json").read_text())
    assert 0 <= res["p_value"] <= 1 and res["n_empirical"] == 800 and res["n_null"] == 20 * 800
    assert res["provenance"]["seed"] == 0
    deg = list(csv.DictReader(body(d / "degree_distribution.csv")))
    assert sum(int(r["empirical_count"]) for r in deg) == 800
    assert len(list(csv.DictReader(body(d / "stability.csv")))) == 2


def test_graph_edge_list(files, capsys):
    assert run("graph", "--input", files["short"], "--series", "close", "--kind", "ivg", "--quiet") == 0
    lines = [x for x in capsys.readouterr().out.splitlines() if not x.startswith("#")]
    _, ivg = build_pair(load_csv(files["short"]).values)
    assert len(lines) - 1 == ivg.edge_count
    i, j = map(int, lines[1].split(","))
    assert ivg.has_edge(i - 1, j - 1)


def test_config_file_and_flag_precedence(files, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nwindow = 300\nshift=200\nensemble-size=8\nquiet=true\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["indicator", "--config", cfg, "--input", files["short"], "--params-json", files["params"]]
    assert run(*base, "--output", a) == 0
    assert run(*base, "--shift", 100, "--output", b) == 0
    pa = json.loads(a.read_text().splitlines()[0][2:])
    pb = json.loads(b.read_text().splitlines()[0][2:])
    assert (pa["config"]["window"], pa["config"]["shift"]) == (300, 200)
    assert pb["config"]["shift"] == 100 and len(body(b)) > len(body(a))
    cfg.write_text("nonsense=1\n")
    assert run(*base, "--output", a) == 2


@pytest.mark.slow
def test_probe_calibration_on_own_fitted_null(tmp_path):
    passed = 0
    for seed in range(100):
        data = tmp_path / f"s{seed}.csv"
        run("simulate", "--length", 500, "--seed", seed, "--output", data)
        d = tmp_path / f"p{seed}"
        assert run("probe", "--input", data, "--seed", seed, "--window", 20, "--ensemble-size", 4,
                   "--stability-z", "2", "--repeats", 2, "--output", d, "--quiet") == 0
        passed += json.loads((d / "rank_sum.json").read_text())["p_value"] > 0.05
    assert passed >= 90, f"rank-sum p > 0.05 in {passed} of 100 repeats"
