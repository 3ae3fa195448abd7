import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tsdr.errors import ConfigError, NonNumericCell, ParseError
from tsdr.io import (
    RESULT_COLUMNS,
    DataSet,
    ExperimentConfig,
    ResultRow,
    ResultTable,
    load_csv,
    parse_config,
    read_results,
    write_csv,
    write_results,
)


def test_load_small_csv(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,b,y\n1,2,3\n4,5,6\n7,8,9\n")
    data = load_csv(path)
    assert (data.n, data.p) == (3, 2)
    assert data.response == "y" and data.predictors == ("a", "b")
    np.testing.assert_array_equal(data.y, [3, 6, 9])


def test_load_named_response(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("H,L,M,W\n1,2,3,4\n5,6,7,8\n")
    data = load_csv(path, response="M")
    assert data.predictors == ("H", "L", "W")
    np.testing.assert_array_equal(data.y, [3, 7])


def test_non_numeric_cell_names_row(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,b,y\n1,2,3\n4,x,6\n")
    with pytest.raises(ParseError) as err:
        load_csv(path)
    assert isinstance(err.value, NonNumericCell)
    assert err.value.row == 2 and err.value.column == "b"
    assert "row 2" in str(err.value)


@pytest.mark.parametrize(
    "text",
    ["", "a,b\n", "a,a\n1,2\n", "a,b\n1,2,3\n", "a,b\n1,\n"],
)
def test_malformed_files(tmp_path, text):
    path = tmp_path / "d.csv"
    path.write_text(text)
    with pytest.raises(ParseError):
        load_csv(path)


def test_unknown_response(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ParseError):
        load_csv(path, response="z")


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(2, 4)), elements=st.floats(-1e300, 1e300)))
def test_csv_round_trip(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("rt") / "d.csv"
    names = tuple(f"x{j}" for j in range(values.shape[1] - 1))
    write_csv(DataSet(values[:, :-1], values[:, -1], names, "y"), path)
    back = load_csv(path)
    np.testing.assert_array_equal(back.X, values[:, :-1])
    np.testing.assert_array_equal(back.y, values[:, -1])


# ---------------------------------------------------------------------------
# configuration


def test_parse_config_sections():
    cfg = parse_config(
        """
        [experiment]
        scenario = Case4, Case8
        methods = SIR, T-SIR
        n = 400
        replications = 5
        seed = 7
        [sir]
        slices = 5
        kappa = 2.5
        [mave]
        lambda = 0.01
        select_dimension = no
        """.replace("        ", "")
    )
    assert cfg.scenarios == ["Case4", "Case8"] and cfg.methods == ["SIR", "T-SIR"]
    assert (cfg.n, cfg.replications, cfg.seed, cfg.slices) == (400, 5, 7, 5)
    assert cfg.kappa_value(100) == 2.5 and cfg.lam == 0.01 and cfg.select_dimension is False


@pytest.mark.parametrize(
    "text",
    [
        "[experiment]\nrepetitions = 3\n",
        "[plots]\nx = 1\n",
        "[experiment]\nn = many\n",
        "[experiment]\nmethods = SIR, PCA\n",
        "[experiment]\nreplications = 0\n",
        "[sir]\nkappa = big\n",
        "no section\n",
    ],
)
def test_config_strictness(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_output_dir_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("TSDR_OUTPUT_DIR", str(tmp_path))
    assert ExperimentConfig().output_dir() == tmp_path
    assert ExperimentConfig(output="elsewhere").output_dir().name == "elsewhere"


# ---------------------------------------------------------------------------
# result tables


def _row(**kw):
    base = dict(scenario="Case4", method="T-SIR", n=400, true_d=2, vccs=[0.5, 0.5], tccs=[0.7, 0.9])
    base.update(kw)
    return ResultRow.from_replications(**base)


def test_empty_table_is_header_only(tmp_path):
    path = tmp_path / "r.csv"
    write_results(ResultTable(), path)
    assert path.read_text() == ",".join(RESULT_COLUMNS) + "\n"


def test_four_decimal_formatting(tmp_path):
    table = ResultTable()
    table.add(_row(dims={"bic": [2, 2]}))
    path = tmp_path / "out" / "r.csv"
    write_results(table, path)
    line = path.read_text().splitlines()[1].split(",")
    rec = dict(zip(RESULT_COLUMNS, line))
    assert rec["vcc_mean"] == "0.5000"
    assert rec["bic_eq"] == "2" and rec["test_eq"] == ""


def test_results_round_trip(tmp_path):
    table = ResultTable()
    table.add(_row(vccs=[0.123456, 0.654321], dims={"test": [1, 2], "bic": [2, 3]}))
    path = tmp_path / "r.csv"
    write_results(table, path)
    write_results(table, path)  # idempotent overwrite
    back = read_results(path).rows[0]
    orig = table.rows[0]
    for c in RESULT_COLUMNS:
        if isinstance(getattr(orig, c), float):
            assert getattr(back, c) == pytest.approx(getattr(orig, c), abs=5e-5)
        else:
            assert getattr(back, c) == getattr(orig, c)


def test_counts_must_sum_to_replications():
    row = _row(dims={"bic": [2, 2]})
    row.bic_eq = 1
    with pytest.raises(ValueError):
        ResultTable().add(row)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 5), min_size=1, max_size=30), st.integers(1, 4))
def test_dimension_counts_partition(dims, true_d):
    row = _row(vccs=[0.5] * len(dims), tccs=[0.5] * len(dims), true_d=true_d, dims={"rss": dims})
    assert row.rss_lt + row.rss_eq + row.rss_gt == row.replications
    row.check()
