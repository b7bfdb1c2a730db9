"""Simulation sweeps: fit every engine over a grid of noise levels and
triplet budgets, with repetitions over independent data draws."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .evaluate import mse_1d, normalize_scale_1d, triplet_error
from .model import DataError, EngineConfig, stimulus_grid
from .mlds import fit_mlds
from .nmds import fit_nmds
from .scaling import (
    NoisyObserver,
    ScalingFunctionSpec,
    derive_seed,
    enumerate_universe,
    eval_scaling,
    sample_triplets,
)
from .ste import fit_ste, fit_tste

DEFAULT_SIGMAS = (0.01, 0.05, 0.1, 0.5)
DEFAULT_RS = (0.2, 0.4, 0.6, 0.8, 1.0)
ALL_ENGINES = ("ste", "tste", "mlds", "nmds")


@dataclass(frozen=True)
class SweepConfig:
    spec: ScalingFunctionSpec
    n: int = 10
    sigma_list: tuple = DEFAULT_SIGMAS
    r_list: tuple = DEFAULT_RS
    engines: tuple = ALL_ENGINES
    repetitions: int = 10
    restarts: int = 10
    seed: int = 0

    def __post_init__(self):
        if not self.sigma_list or not self.r_list or not self.engines:
            raise DataError("sigma_list, r_list and engines must be nonempty")
        if self.repetitions < 1:
            raise DataError("repetitions must be >= 1")
        bad = set(self.engines) - set(ALL_ENGINES)
        if bad:
            raise DataError(f"unknown engines: {sorted(bad)}")


def _run_task(args):
    spec_json, n, engine, sigma, r, rep, restarts, master_seed = args
    spec = ScalingFunctionSpec.from_json(spec_json)
    seed = derive_seed(master_seed, engine, sigma, r, rep)
    stimuli = stimulus_grid(n)
    psi_true = eval_scaling(spec, stimuli)
    dim = spec.dim
    config = EngineConfig(dim=dim, restarts=restarts, seed=derive_seed(seed, "fit"))
    observer = NoisyObserver(spec, sigma=sigma, seed=derive_seed(seed, "observer"))

    if engine == "nmds":
        delta = observer.noisy_dissimilarities(stimuli)
        embedding = fit_nmds(delta, config).embedding
        # score on a same-budget simulated response set
        uni = enumerate_universe(n, "general")
        triplets = sample_triplets(uni, r, seed=derive_seed(seed, "sample"))
        responses = observer.simulate_answers(triplets, stimuli)
        scale_1d = embedding.points.ravel() if dim == 1 else None
    elif engine == "mlds":
        # trains on the monotone-valid triplet family it requires, but is
        # scored on a same-budget general triplet set so its error is
        # comparable with the unrestricted engines
        valid = sample_triplets(enumerate_universe(n, "mlds_valid"), r, seed=derive_seed(seed, "sample_valid"))
        scale = fit_mlds(observer.simulate_answers(valid, stimuli), config, n=n)
        embedding = scale.to_embedding()
        scale_1d = scale.psi
        uni = enumerate_universe(n, "general")
        triplets = sample_triplets(uni, r, seed=derive_seed(seed, "sample"))
        responses = observer.simulate_answers(triplets, stimuli)
    else:
        uni = enumerate_universe(n, "general")
        triplets = sample_triplets(uni, r, seed=derive_seed(seed, "sample"))
        responses = observer.simulate_answers(triplets, stimuli)
        fit = fit_ste if engine == "ste" else fit_tste
        embedding = fit(responses, config, n=n)
        scale_1d = embedding.points.ravel() if dim == 1 else None

    err = triplet_error(embedding, responses)
    if scale_1d is not None and dim == 1:
        mse = mse_1d(normalize_scale_1d(scale_1d, psi_true.ravel()), psi_true.ravel())
    else:
        mse = math.nan
    return {"engine": engine, "sigma": sigma, "r": r, "rep": rep, "mse": mse, "triplet_error": err}


def run_sweep(config: SweepConfig, jobs: int = 1) -> list:
    """One result row per (engine, sigma, r, repetition).  The full-
    matrix NMDS engine only runs at r=1; other r values are skipped.
    Deterministic for a fixed seed regardless of jobs."""
    tasks = []
    spec_json = config.spec.to_json()
    for engine in config.engines:
        for sigma in config.sigma_list:
            for r in config.r_list:
                if engine == "nmds" and r != 1.0:
                    continue
                for rep in range(config.repetitions):
                    tasks.append(
                        (spec_json, config.n, engine, sigma, r, rep, config.restarts, config.seed)
                    )
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_task, tasks))
    else:
        rows = [_run_task(t) for t in tasks]
    rows.sort(key=lambda row: (row["engine"], row["sigma"], row["r"], row["rep"]))
    return rows


def aggregate(rows) -> tuple:
    """Mean and sample-std tables keyed by (engine, sigma, r)."""
    keys = sorted({(row["engine"], row["sigma"], row["r"]) for row in rows})
    mean_rows, std_rows = [], []
    for key in keys:
        sub = [row for row in rows if (row["engine"], row["sigma"], row["r"]) == key]
        mses = np.array([row["mse"] for row in sub])
        errs = np.array([row["triplet_error"] for row in sub])
        ddof = 1 if len(sub) > 1 else 0
        mean_rows.append((*key, float(np.mean(mses)), float(np.mean(errs))))
        std_rows.append((*key, float(np.std(mses, ddof=ddof)), float(np.std(errs, ddof=ddof))))
    return mean_rows, std_rows


def table_to_csv(table) -> str:
    lines = ["engine,sigma,r,mse,triplet_error"]
    for engine, sigma, r, mse, err in table:
        lines.append(f"{engine},{sigma:.10g},{r:.10g},{mse:.10g},{err:.10g}")
    return "\n".join(lines) + "\n"


def rows_to_csv(rows) -> str:
    lines = ["engine,sigma,r,rep,mse,triplet_error"]
    for row in rows:
        lines.append(
            f"{row['engine']},{row['sigma']:.10g},{row['r']:.10g},{row['rep']},"
            f"{row['mse']:.10g},{row['triplet_error']:.10g}"
        )
    return "\n".join(lines) + "\n"
