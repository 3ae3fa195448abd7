"""Dataset loading, experiment configuration and result tables."""
from __future__ import annotations

import configparser
import csv
import math
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import ConfigError, NonNumericCell, ParseError

METHODS = ("SIR", "f-SIR", "T-SIR", "YJ-SIR", "MAVE", "T-MAVE")
OUTPUT_ENV = "TSDR_OUTPUT_DIR"


@dataclass(frozen=True, eq=False)
class DataSet:
    X: np.ndarray
    y: np.ndarray
    predictors: tuple
    response: str

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


def load_csv(path, response: str | None = None) -> DataSet:
    """Read a numeric CSV with a header row.

    ``response`` names the response column; the last column is used when it
    is omitted. Every other column becomes a predictor.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise ParseError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise ParseError(f"{path}: duplicate column names in header", row=0)
    values = np.empty((len(rows) - 1, len(header)))
    for i, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise ParseError(f"{path}: row {i} has {len(row)} fields, expected {len(header)}", row=i)
        for j, cell in enumerate(row):
            text = cell.strip()
            try:
                values[i - 1, j] = float(text)
            except ValueError:
                raise NonNumericCell(
                    f"{path}: non-numeric value {text!r} at row {i}, column {header[j]!r}", row=i, column=header[j]
                ) from None
            if not math.isfinite(values[i - 1, j]):
                raise NonNumericCell(
                    f"{path}: missing or non-finite value at row {i}, column {header[j]!r}", row=i, column=header[j]
                )
    if values.shape[0] == 0:
        raise ParseError(f"{path}: no data rows")
    response = header[-1] if response is None else response
    if response not in header:
        raise ParseError(f"{path}: response column {response!r} not in header {header}")
    r = header.index(response)
    keep = [j for j in range(len(header)) if j != r]
    return DataSet(values[:, keep], values[:, r], tuple(header[j] for j in keep), response)


def write_csv(dataset: DataSet, path) -> None:
    """Write a DataSet back out with full ``repr`` precision."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(dataset.predictors) + [dataset.response])
        for xi, yi in zip(dataset.X, dataset.y):
            w.writerow([repr(float(v)) for v in xi] + [repr(float(yi))])


# ---------------------------------------------------------------------------
# configuration


@dataclass
class ExperimentConfig:
    """Settings for a simulation sweep or a data analysis.

    File format (INI-style, unknown sections or keys are rejected)::

        [experiment]
        scenario = Case4          ; comma-separated list allowed
        methods = SIR, T-SIR
        n = 400
        replications = 50
        seed = 7
        rho = 0
        k = 5
        output = results
        threads = 1

        [sir]
        slices = 10
        alpha = 0.05
        kappa = log           ; "log" for log(n) or a number

        [mave]
        lambda = 0.001
        bandwidth_scale = 1.0
        n_funcs = 6
        k_max = 4
        select_dimension = true
    """

    scenarios: list = field(default_factory=lambda: ["Case4"])
    methods: list = field(default_factory=lambda: ["SIR", "T-SIR"])
    n: int | None = None
    replications: int = 50
    seed: int = 0
    rho: float = 0.0
    k: int | None = None
    output: str | None = None
    threads: int = 1
    slices: int = 10
    alpha: float = 0.05
    kappa: str = "log"
    lam: float = 1e-3
    bandwidth_scale: float = 1.0
    n_funcs: int = 6
    k_max: int = 4
    select_dimension: bool = True
    dataset: str | None = None
    response: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.replications < 1:
            raise ConfigError("replications must be at least 1")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown method(s) {bad}; valid: {', '.join(METHODS)}")
        if not self.methods:
            raise ConfigError("at least one method is required")
        if self.slices < 2:
            raise ConfigError("slices must be at least 2")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")
        if self.lam < 0:
            raise ConfigError("lambda must be non-negative")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        self.kappa_value(100)

    def kappa_value(self, n: int) -> float:
        if str(self.kappa).strip().lower() == "log":
            return math.log(n)
        try:
            return float(self.kappa)
        except ValueError:
            raise ConfigError(f"kappa must be 'log' or a number, got {self.kappa!r}") from None

    def output_dir(self) -> Path:
        return Path(self.output or os.environ.get(OUTPUT_ENV) or "results")


_SCHEMA = {
    "experiment": {
        "scenario": ("scenarios", "list"),
        "methods": ("methods", "list"),
        "n": ("n", int),
        "replications": ("replications", int),
        "seed": ("seed", int),
        "rho": ("rho", float),
        "k": ("k", int),
        "output": ("output", str),
        "threads": ("threads", int),
        "dataset": ("dataset", str),
        "response": ("response", str),
    },
    "sir": {
        "slices": ("slices", int),
        "alpha": ("alpha", float),
        "kappa": ("kappa", str),
    },
    "mave": {
        "lambda": ("lam", float),
        "bandwidth_scale": ("bandwidth_scale", float),
        "n_funcs": ("n_funcs", int),
        "k_max": ("k_max", int),
        "select_dimension": ("select_dimension", "bool"),
    },
}


def parse_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    kwargs = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]; valid: {', '.join(_SCHEMA)}")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]; valid: {', '.join(_SCHEMA[section])}")
            name, kind = _SCHEMA[section][key]
            try:
                if kind == "list":
                    value = [v.strip() for v in raw.split(",") if v.strip()]
                elif kind == "bool":
                    value = parser.getboolean(section, key)
                else:
                    value = kind(raw)
            except ValueError:
                raise ConfigError(f"bad value {raw!r} for {key!r} in [{section}]") from None
            kwargs[name] = value
    return ExperimentConfig(**kwargs)


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def config_fields() -> list[str]:
    return [f.name for f in fields(ExperimentConfig)]


# ---------------------------------------------------------------------------
# result tables

RESULT_COLUMNS = (
    "scenario",
    "method",
    "n",
    "replications",
    "true_d",
    "vcc_mean",
    "vcc_sd",
    "tcc_mean",
    "tcc_sd",
    "test_lt",
    "test_eq",
    "test_gt",
    "bic_lt",
    "bic_eq",
    "bic_gt",
    "rss_lt",
    "rss_eq",
    "rss_gt",
)
_FLOAT_COLUMNS = {"vcc_mean", "vcc_sd", "tcc_mean", "tcc_sd"}
_INT_COLUMNS = set(RESULT_COLUMNS) - _FLOAT_COLUMNS - {"scenario", "method"}


@dataclass
class ResultRow:
    scenario: str
    method: str
    n: int
    replications: int
    true_d: int
    vcc_mean: float
    vcc_sd: float
    tcc_mean: float
    tcc_sd: float
    test_lt: int | None = None
    test_eq: int | None = None
    test_gt: int | None = None
    bic_lt: int | None = None
    bic_eq: int | None = None
    bic_gt: int | None = None
    rss_lt: int | None = None
    rss_eq: int | None = None
    rss_gt: int | None = None

    @classmethod
    def from_replications(cls, scenario, method, n, true_d, vccs, tccs, dims=None) -> "ResultRow":
        """Aggregate per-replication accuracies and chosen dimensions.

        ``dims`` maps a criterion name (``test``, ``bic``, ``rss``) to the list
        of selected dimensions.
        """
        vccs = np.asarray(vccs, dtype=float)
        tccs = np.asarray(tccs, dtype=float)
        sd = (lambda v: float(v.std(ddof=1)) if v.size > 1 else 0.0)
        row = cls(scenario, method, n, vccs.size, true_d, float(vccs.mean()), sd(vccs), float(tccs.mean()), sd(tccs))
        for crit, chosen in (dims or {}).items():
            chosen = np.asarray(chosen)
            setattr(row, f"{crit}_lt", int(np.sum(chosen < true_d)))
            setattr(row, f"{crit}_eq", int(np.sum(chosen == true_d)))
            setattr(row, f"{crit}_gt", int(np.sum(chosen > true_d)))
        return row

    def check(self):
        for crit in ("test", "bic", "rss"):
            counts = [getattr(self, f"{crit}_{s}") for s in ("lt", "eq", "gt")]
            if any(c is not None for c in counts) and sum(c or 0 for c in counts) != self.replications:
                raise ValueError(f"{crit} counts do not sum to the replication count")
        if not (0 <= self.vcc_mean <= 1 and 0 <= self.tcc_mean <= 1):
            raise ValueError("correlation means must lie in [0, 1]")


@dataclass
class ResultTable:
    rows: list = field(default_factory=list)

    def add(self, row: ResultRow):
        row.check()
        self.rows.append(row)


def _format(name, value):
    if value is None:
        return ""
    if name in _FLOAT_COLUMNS:
        return f"{value:.4f}"
    return str(value)


def write_results(table: ResultTable, path) -> None:
    """CSV with a fixed column order and 4-decimal accuracies; overwrites ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for row in table.rows:
            w.writerow([_format(c, getattr(row, c)) for c in RESULT_COLUMNS])


def read_results(path) -> ResultTable:
    table = ResultTable()
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RESULT_COLUMNS:
            raise ParseError(f"{path}: unexpected result columns {reader.fieldnames}")
        for rec in reader:
            kw = {}
            for c in RESULT_COLUMNS:
                v = rec[c]
                if c in _FLOAT_COLUMNS:
                    kw[c] = float(v)
                elif c in _INT_COLUMNS:
                    kw[c] = int(v) if v != "" else None
                else:
                    kw[c] = v
            table.rows.append(ResultRow(**kw))
    return table
