"""Command-line entry point: ``tsdr simulate | analyze | plotdata``.

Exit codes: 0 success, 1 runtime failure, 2 usage error (bad flags, unknown
scenario or method, invalid configuration).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from dataclasses import asdict
from pathlib import Path

import numpy as np
from scipy.interpolate import make_smoothing_spline

from .errors import ConfigError, MissingArtifacts, TsdrError, UnknownScenario
from .experiment import MethodSettings, default_n, run_scenario
from .io import METHODS, ExperimentConfig, ResultTable, load_config, load_csv, write_results
from .mave import MaveOptions, rss_dimension
from .simulate import SCENARIOS
from .sir import bic_criterion, bic_dimension, sequential_test, sir_fit, transform_predictors

log = logging.getLogger("tsdr")

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2
ANALYSIS_JSON = "analysis.json"
PREDICTORS_CSV = "predictors.csv"
CURVE_POINTS = 200


class UsageError(Exception):
    pass


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tsdr", description="Transformed sufficient dimension reduction.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI configuration file; flags override it")
    common.add_argument("--out", help="output directory (default: $TSDR_OUTPUT_DIR or ./results)")
    common.add_argument("--slices", type=int, help="number of SIR slices H")
    common.add_argument("--alpha", type=float, help="sequential test level")
    common.add_argument("--lambda", dest="lam", type=float, help="T-MAVE roughness penalty")

    sim = sub.add_parser("simulate", parents=[common], help="run a simulation sweep")
    sim.add_argument("--scenario", type=_csv_list, help=f"comma-separated; one of {', '.join(SCENARIOS)}")
    sim.add_argument("--method", type=_csv_list, help=f"comma-separated; any of {', '.join(METHODS)}")
    sim.add_argument("--n", type=int, help="sample size (default 400 for Cases, 200 for Examples)")
    sim.add_argument("--reps", type=int, help="replications")
    sim.add_argument("--seed", type=int, help="base seed")
    sim.add_argument("--rho", type=float, help="predictor correlation for Examples (0 or 0.5)")
    sim.add_argument("--k", type=int, help="degrees of freedom for Case7 (5, 10 or 20)")
    sim.add_argument("--threads", type=int, help="worker threads over replications")

    ana = sub.add_parser("analyze", parents=[common], help="estimate dimension and directions for a CSV")
    ana.add_argument("csv", nargs="?", help="data file (or 'dataset' in the config)")
    ana.add_argument("--response", help="response column (default: last column)")
    ana.add_argument("--method", help="SIR, T-SIR, YJ-SIR, MAVE or T-MAVE")
    ana.add_argument("--dim", type=int, help="override the estimated dimension")

    plot = sub.add_parser("plotdata", help="write scatter and smoothing-curve data for an analysis")
    plot.add_argument("--out", help="directory holding the analyze outputs")
    return parser


def resolve_config(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {
        "scenarios": getattr(args, "scenario", None),
        "n": getattr(args, "n", None),
        "replications": getattr(args, "reps", None),
        "seed": getattr(args, "seed", None),
        "rho": getattr(args, "rho", None),
        "k": getattr(args, "k", None),
        "output": args.out,
        "threads": getattr(args, "threads", None),
        "slices": args.slices,
        "alpha": args.alpha,
        "lam": args.lam,
        "response": getattr(args, "response", None),
    }
    method = getattr(args, "method", None)
    if method is not None:
        overrides["methods"] = method if isinstance(method, list) else [method]
    if getattr(args, "csv", None):
        overrides["dataset"] = args.csv
    values = asdict(config)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(config: ExperimentConfig) -> Path:
    bad = [s for s in config.scenarios if s not in SCENARIOS]
    if bad:
        raise UnknownScenario(f"unknown scenario(s) {bad}; valid scenarios: {', '.join(SCENARIOS)}")
    out = config.output_dir()
    summary = []
    for scenario in config.scenarios:
        n = config.n or default_n(scenario)
        settings = MethodSettings.from_config(config, n)
        for method in config.methods:
            print(f"[simulate] {scenario} {method} n={n} reps={config.replications}", flush=True)
            (row,) = run_scenario(
                scenario,
                [method],
                n,
                config.replications,
                config.seed,
                settings,
                rho=config.rho,
                k=config.k,
                threads=config.threads,
            )
            table = ResultTable()
            table.add(row)
            # written per method so completed work survives a later failure
            write_results(table, out / scenario / f"{method}.csv")
            summary.append(asdict(row))
            print(f"  VCC {row.vcc_mean:.4f} ({row.vcc_sd:.4f})  TCC {row.tcc_mean:.4f} ({row.tcc_sd:.4f})", flush=True)
            _write_json(out / "summary.json", {"config": _config_record(config), "results": summary})
    return out


def _config_record(config: ExperimentConfig) -> dict:
    rec = asdict(config)
    rec.pop("output")
    return rec


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# analyze


def cmd_analyze(config: ExperimentConfig, dim: int | None = None) -> dict:
    if not config.dataset:
        raise UsageError("analyze needs a CSV file (positional argument or 'dataset' in the config)")
    if len(config.methods) != 1:
        raise UsageError("analyze takes exactly one --method")
    method = config.methods[0]
    if method == "f-SIR":
        raise UsageError("f-SIR needs the true transforms and is only available in simulations")
    data = load_csv(config.dataset, config.response)
    report = {"method": method, "dataset": str(config.dataset), "n": data.n, "predictors": list(data.predictors)}

    if method in ("SIR", "T-SIR", "YJ-SIR"):
        Z = transform_predictors(data.X, method)
        fit = sir_fit(Z, data.y, config.slices)
        kappa = config.kappa_value(data.n)
        report["eigenvalues"] = fit.eigenvalues.tolist()
        report["dimension"] = {
            "test": sequential_test(fit, config.alpha),
            "bic": bic_dimension(fit, kappa),
        }
        report["bic_criterion"] = bic_criterion(fit, kappa).tolist()
        d = dim if dim is not None else report["dimension"]["bic"]
        d = max(d, 1)
        directions = fit.basis(d)
        extracted = fit.predictors(Z, d)
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            sel = rss_dimension(
                data.X,
                data.y,
                min(config.k_max, data.p),
                method,
                config.lam,
                config.n_funcs,
                MaveOptions(bandwidth_scale=config.bandwidth_scale),
            )
        report["dimension"] = {"rss": sel.k}
        report["rss_criterion"] = {str(k): v for k, v in sel.criterion.items()}
        d = dim if dim is not None else sel.k
        if d not in sel.fits:
            raise UsageError(f"no fit available at dimension {d}")
        fit = sel.fits[d]
        directions = fit.directions
        extracted = fit.predictors(data.X)

    directions = directions / np.linalg.norm(directions, axis=0)
    report["used_dimension"] = int(d)
    report["directions"] = directions.T.tolist()
    report["response"] = {"name": data.response, "values": data.y.tolist()}

    out = config.output_dir()
    out.mkdir(parents=True, exist_ok=True)
    np.savetxt(
        out / PREDICTORS_CSV,
        extracted,
        delimiter=",",
        header=",".join(f"u{j + 1}" for j in range(d)),
        comments="",
        fmt="%.17g",
    )
    _write_json(out / ANALYSIS_JSON, report)

    for crit, value in report["dimension"].items():
        print(f"{method}: estimated dimension ({crit}) = {value}")
    for j, row in enumerate(report["directions"], start=1):
        coefs = ", ".join(f"{name}={c:+.4f}" for name, c in zip(data.predictors, row))
        print(f"  direction {j}: {coefs}")
    print(f"wrote {out / PREDICTORS_CSV} and {out / ANALYSIS_JSON}")
    return report


# ---------------------------------------------------------------------------
# plotdata


def smoothing_curve(x, y, points: int = CURVE_POINTS):
    """GCV smoothing spline of ``y`` on ``x`` sampled on an even grid.

    Tied ``x`` values are merged into their mean response with a matching
    weight, since the spline needs strictly increasing abscissae.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ux, inverse, counts = np.unique(x, return_inverse=True, return_counts=True)
    uy = np.bincount(inverse, weights=y) / counts
    grid = np.linspace(ux[0], ux[-1], points)
    if ux.size < 5:
        return grid, np.interp(grid, ux, uy)
    spline = make_smoothing_spline(ux, uy, w=counts.astype(float))
    return grid, spline(grid)


def cmd_plotdata(out: Path) -> list[Path]:
    analysis, predictors = out / ANALYSIS_JSON, out / PREDICTORS_CSV
    missing = [str(p) for p in (analysis, predictors) if not p.is_file()]
    if missing:
        raise MissingArtifacts(f"run 'tsdr analyze' first; missing {', '.join(missing)}")
    report = json.loads(analysis.read_text(encoding="utf-8"))
    U = np.loadtxt(predictors, delimiter=",", skiprows=1, ndmin=2)
    y = np.asarray(report["response"]["values"], dtype=float)
    name = report["response"]["name"]
    written = []
    for j in range(U.shape[1]):
        grid, curve = smoothing_curve(U[:, j], y)
        rows = max(len(y), len(grid))
        path = out / f"plot_u{j + 1}.csv"
        with path.open("w", encoding="utf-8") as fh:
            fh.write(f"u{j + 1},{name},curve_u{j + 1},curve_{name}\n")
            for i in range(rows):
                data = f"{float(U[i, j])!r},{float(y[i])!r}" if i < len(y) else ","
                fit = f"{float(grid[i])!r},{float(curve[i])!r}" if i < len(grid) else ","
                fh.write(f"{data},{fit}\n")
        written.append(path)
        print(f"wrote {path}")
    return written


# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "plotdata":
            out = ExperimentConfig(output=args.out).output_dir()
            cmd_plotdata(out)
            return EXIT_OK
        config = resolve_config(args)
        if args.command == "simulate":
            cmd_simulate(config)
        else:
            cmd_analyze(config, args.dim)
    except (UsageError, UnknownScenario, ConfigError) as exc:
        print(f"tsdr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TsdrError, OSError, ArithmeticError, ValueError) as exc:
        print(f"tsdr: failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
