import csv
import json

import numpy as np
import pytest

from tsdr.cli import main, smoothing_curve
from tsdr.experiment import MethodSettings, run_scenario
from tsdr.io import DataSet, read_results, write_csv
from tsdr.simulate import ScenarioSpec, generate


def _files(root):
    return {p.relative_to(root): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def _dataset_csv(tmp_path, scenario="Case4", n=200, seed=1):
    g = generate(ScenarioSpec(scenario, n, seed=seed))
    path = tmp_path / "data.csv"
    names = tuple(f"x{j + 1}" for j in range(g.X.shape[1]))
    write_csv(DataSet(g.X, g.y, names, "y"), path)
    return path


# ---------------------------------------------------------------------------
# simulate


def test_simulate_case4_transformed_beats_raw(tmp_path, capsys):
    code = main(
        ["simulate", "--scenario", "Case4", "--method", "SIR,T-SIR", "--n", "400", "--reps", "50", "--seed", "7",
         "--out", str(tmp_path)]
    )
    assert code == 0
    raw = read_results(tmp_path / "Case4" / "SIR.csv").rows[0]
    tsir = read_results(tmp_path / "Case4" / "T-SIR.csv").rows[0]
    assert tsir.vcc_mean > raw.vcc_mean
    assert raw.true_d == 4 and tsir.true_d == 2
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert [r["method"] for r in summary["results"]] == ["SIR", "T-SIR"]
    assert "T-SIR" in capsys.readouterr().out


def test_simulate_is_byte_deterministic(tmp_path):
    args = ["simulate", "--scenario", "Case2,Example2", "--method", "YJ-SIR,T-MAVE", "--reps", "1", "--seed", "3",
            "--n", "60"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    a, b = _files(tmp_path / "a"), _files(tmp_path / "b")
    assert a and a == b


def test_simulate_unknown_scenario_is_usage_error(tmp_path, capsys):
    assert main(["simulate", "--scenario", "Case99", "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "Case99" in err and "Case1" in err and "Example4" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--method", "PCA"],
        ["simulate", "--reps", "0"],
        ["simulate", "--n", "abc"],
        ["frobnicate"],
        ["simulate", "--config", "/nonexistent/config.ini"],
    ],
)
def test_usage_errors(tmp_path, argv):
    assert main(argv + ([] if argv == ["frobnicate"] else ["--out", str(tmp_path)])) in (1, 2)


def test_config_file_and_env_output(tmp_path, monkeypatch):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[experiment]\nscenario = Case8\nmethods = T-SIR\nn = 100\nreplications = 2\nseed = 1\n")
    monkeypatch.setenv("TSDR_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["simulate", "--config", str(cfg)]) == 0
    assert (tmp_path / "env" / "Case8" / "T-SIR.csv").is_file()
    bad = tmp_path / "bad.ini"
    bad.write_text("[experiment]\nreplicates = 2\n")
    assert main(["simulate", "--config", str(bad)]) == 2


def test_threads_match_serial():
    settings = MethodSettings()
    serial = run_scenario("Case3", ["T-SIR", "YJ-SIR"], 150, 6, 2, settings, threads=1)
    parallel = run_scenario("Case3", ["T-SIR", "YJ-SIR"], 150, 6, 2, settings, threads=3)
    assert serial == parallel


def test_mave_rows_carry_rss_counts():
    (row,) = run_scenario("Example2", ["MAVE"], 60, 2, 0, MethodSettings(k_max=2))
    assert row.true_d == 4
    assert row.rss_lt + row.rss_eq + row.rss_gt == 2


# ---------------------------------------------------------------------------
# analyze / plotdata


def test_analyze_t_sir_writes_predictors(tmp_path, capsys):
    data = _dataset_csv(tmp_path)
    out = tmp_path / "res"
    assert main(["analyze", str(data), "--method", "T-SIR", "--slices", "5", "--out", str(out)]) == 0
    report = json.loads((out / "analysis.json").read_text())
    d = report["used_dimension"]
    assert d == report["dimension"]["bic"]
    U = np.loadtxt(out / "predictors.csv", delimiter=",", skiprows=1, ndmin=2)
    assert U.shape == (200, d)
    printed = capsys.readouterr().out
    assert "estimated dimension (test)" in printed and "estimated dimension (bic)" in printed


def test_analyze_mave_reports_rss_dimension(tmp_path, capsys):
    data = _dataset_csv(tmp_path, "Example2", 80)
    out = tmp_path / "res"
    assert main(["analyze", str(data), "--method", "MAVE", "--out", str(out)]) == 0
    report = json.loads((out / "analysis.json").read_text())
    assert set(report["dimension"]) == {"rss"}
    assert "estimated dimension (rss)" in capsys.readouterr().out


def test_analyze_rejects_f_sir_and_bad_file(tmp_path):
    data = _dataset_csv(tmp_path)
    assert main(["analyze", str(data), "--method", "f-SIR", "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("a,y\n1,2\nz,3\n")
    assert main(["analyze", str(bad), "--method", "SIR", "--out", str(tmp_path)]) == 1


@pytest.mark.parametrize("dim", [1, 2])
def test_plotdata_one_file_per_direction(tmp_path, dim):
    data = _dataset_csv(tmp_path)
    out = tmp_path / "res"
    assert main(["analyze", str(data), "--method", "T-SIR", "--dim", str(dim), "--out", str(out)]) == 0
    assert main(["plotdata", "--out", str(out)]) == 0
    files = sorted(out.glob("plot_u*.csv"))
    assert len(files) == dim
    y = np.asarray(json.loads((out / "analysis.json").read_text())["response"]["values"])
    for path in files:
        with path.open() as fh:
            rows = list(csv.reader(fh))
        assert len(rows[0]) == 4
        body = rows[1:]
        assert len(body) == max(200, len(y))
        curve = np.array([[float(r[2]), float(r[3])] for r in body if r[2]])
        assert curve.shape == (200, 2)
        lo, hi = y.min() - 3 * y.std(), y.max() + 3 * y.std()
        assert lo <= curve[0, 1] <= hi and lo <= curve[-1, 1] <= hi


def test_plotdata_missing_artifacts(tmp_path, capsys):
    assert main(["plotdata", "--out", str(tmp_path / "nothing")]) == 1
    assert "analyze" in capsys.readouterr().err


def test_smoothing_curve_handles_ties():
    x = np.repeat(np.linspace(0, 1, 30), 2)
    y = np.sin(3 * x)
    grid, curve = smoothing_curve(x, y)
    assert grid.size == 200 and np.all(np.isfinite(curve))
    assert np.max(np.abs(curve - np.sin(3 * grid))) < 0.05
