"""Monte Carlo harness: replicate a scenario, fit each method, aggregate.

Each replication is a pure function of ``(scenario, n, rho, k, seed,
replicate)`` and the method settings, so replications may be farmed out to
threads and the aggregate is identical to a serial run.
"""
from __future__ import annotations

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .io import ExperimentConfig, ResultRow
from .mave import MaveOptions, mave_fit, rss_dimension, tmave_fit
from .metrics import tcc, vcc
from .simulate import CASES, GeneratedData, ScenarioSpec, generate
from .sir import SIR_METHODS, bic_dimension, sequential_test, sir_fit, transform_predictors

log = logging.getLogger(__name__)

MAVE_METHODS = ("MAVE", "T-MAVE")


def default_n(scenario: str) -> int:
    return 400 if scenario in CASES else 200


@dataclass(frozen=True)
class MethodSettings:
    """Tuning shared by every replication of one sweep."""

    slices: int = 10
    alpha: float = 0.05
    kappa: float | None = None  # None -> log(n)
    lam: float = 1e-3
    n_funcs: int = 6
    k_max: int = 4
    select_dimension: bool = True
    mave: MaveOptions = field(default_factory=MaveOptions)

    @classmethod
    def from_config(cls, config: ExperimentConfig, n: int) -> "MethodSettings":
        return cls(
            slices=config.slices,
            alpha=config.alpha,
            kappa=config.kappa_value(n),
            lam=config.lam,
            n_funcs=config.n_funcs,
            k_max=config.k_max,
            select_dimension=config.select_dimension,
            mave=MaveOptions(bandwidth_scale=config.bandwidth_scale),
        )


@dataclass(frozen=True)
class Replication:
    vcc: float
    tcc: float
    dims: dict


def target(data: GeneratedData, method: str) -> np.ndarray:
    """Subspace a method is scored against: the raw central subspace for the
    untransformed methods, the transformed one otherwise."""
    return data.raw_basis if method in ("SIR", "MAVE") else data.true_basis


def run_method(data: GeneratedData, method: str, settings: MethodSettings) -> Replication:
    truth = target(data, method)
    d = truth.shape[1]
    if method in SIR_METHODS:
        Z = data.f if method == "f-SIR" else transform_predictors(data.X, method)
        fit = sir_fit(Z, data.y, settings.slices)
        B = fit.basis(d)
        dims = {"test": sequential_test(fit, settings.alpha), "bic": bic_dimension(fit, settings.kappa)}
    elif method in MAVE_METHODS:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            if settings.select_dimension:
                k_max = max(min(settings.k_max, data.X.shape[1]), d)
                sel = rss_dimension(
                    data.X, data.y, k_max, method, settings.lam, settings.n_funcs, settings.mave
                )
                dims = {"rss": sel.k}
                fit = sel.fits[d]
            else:
                dims = {}
                if method == "MAVE":
                    fit = mave_fit(data.X, data.y, d, options=settings.mave)
                else:
                    fit = tmave_fit(
                        data.X, data.y, d, lam=settings.lam, n_funcs=settings.n_funcs, options=settings.mave
                    )
        B = fit.directions
    else:
        raise ValueError(f"unknown method {method!r}")
    return Replication(vcc(B, truth), tcc(B, truth), dims)


def run_replication(spec: ScenarioSpec, methods, settings: MethodSettings) -> dict:
    data = generate(spec)
    return {m: run_method(data, m, settings) for m in methods}


def run_scenario(
    scenario: str,
    methods,
    n: int,
    replications: int,
    seed: int,
    settings: MethodSettings,
    rho: float = 0.0,
    k: int | None = None,
    threads: int = 1,
) -> list[ResultRow]:
    """One aggregated ``ResultRow`` per method, in the order of ``methods``."""
    specs = [ScenarioSpec(scenario, n, rho, k, seed, r) for r in range(replications)]
    job = lambda spec: run_replication(spec, methods, settings)  # noqa: E731
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, specs))
    else:
        results = [job(s) for s in specs]

    example = generate(specs[0])
    rows = []
    for m in methods:
        reps = [r[m] for r in results]
        crits = reps[0].dims.keys()
        rows.append(
            ResultRow.from_replications(
                scenario,
                m,
                n,
                target(example, m).shape[1],
                [r.vcc for r in reps],
                [r.tcc for r in reps],
                {c: [r.dims[c] for r in reps] for c in crits},
            )
        )
    return rows
