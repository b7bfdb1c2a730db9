"""Scoring: triplet error, k-fold cross-validated triplet error, 1-D
MSE with normalization, dimension sweeps, repeat-consistency floor."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .model import (
    DataError,
    Embedding,
    EngineConfig,
    TripletResponse,
    answered,
    canonical_triplet_id,
    consistency_sign,
    infer_n,
)
from . import mlds, ste


def triplet_error(embedding: Embedding, responses: Sequence[TripletResponse]) -> float:
    """Fraction of validation responses the embedding contradicts; exact
    distance ties count 0.5 (unbiased under random tie-breaking)."""
    responses = list(responses)
    if not responses:
        raise DataError("empty validation set")
    total = 0.0
    for r in responses:
        s = consistency_sign(embedding, r)
        if s == -1:
            total += 1.0
        elif s == 0:
            total += 0.5
    return total / len(responses)


# ---------------------------------------------------------------------------
# engine registry: name -> fit(responses, config, n) -> Embedding

def _fit_mlds_embedding(responses, config, n):
    return mlds.fit_mlds(responses, config.replace(dim=1), n=n).to_embedding()


ENGINES = {
    "ste": ste.fit_ste,
    "tste": ste.fit_tste,
    "mlds": _fit_mlds_embedding,
}


def fit_engine(name: str, responses, config: EngineConfig, n: Optional[int] = None) -> Embedding:
    if name not in ENGINES:
        raise DataError(f"unknown engine {name!r} (choose from {sorted(ENGINES)}; "
                        "nmds needs a dissimilarity matrix, not responses)")
    return ENGINES[name](responses, config, n=n)


@dataclass(frozen=True)
class CvReport:
    engine: str
    dim: int
    k: int
    fold_errors: tuple
    seed: int = 0

    @property
    def mean(self) -> float:
        return float(np.mean(self.fold_errors))

    @property
    def std(self) -> float:
        return float(np.std(self.fold_errors, ddof=1)) if len(self.fold_errors) > 1 else 0.0

    def to_dict(self) -> dict:
        return {
            "engine": self.engine,
            "dim": self.dim,
            "k": self.k,
            "fold_errors": list(self.fold_errors),
            "mean": self.mean,
            "std": self.std,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def cross_validated_triplet_error(
    responses: Sequence[TripletResponse],
    engine: str,
    config: EngineConfig,
    k: int = 10,
    seed: int = 0,
    n: Optional[int] = None,
) -> CvReport:
    """Shuffle, split into k near-equal folds (sizes differ by at most
    one), fit on k-1 folds and score the held-out fold.

    Splitting is at the response level, so repeated triplets may land in
    both train and validation.
    """
    responses = list(answered(responses))
    if k < 2:
        raise DataError("k must be >= 2")
    if len(responses) < k:
        raise DataError(f"need at least k={k} responses, got {len(responses)}")
    n = infer_n(responses) if n is None else n
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(responses))
    folds = np.array_split(order, k)
    errors = []
    for fold in folds:
        held = set(fold.tolist())
        train = [responses[i] for i in range(len(responses)) if i not in held]
        valid = [responses[i] for i in fold]
        emb = fit_engine(engine, train, config, n=n)
        errors.append(triplet_error(emb, valid))
    return CvReport(engine=engine, dim=config.dim, k=k, fold_errors=tuple(errors), seed=seed)


# ---------------------------------------------------------------------------
# 1-D scale comparison

def normalize_scale_1d(psi_hat, psi_true) -> np.ndarray:
    """Affinely map psi_hat onto [0, 1], then keep it or its reflection
    1 - psi_hat, whichever has the smaller MSE against psi_true (a 1-D
    embedding is only determined up to similarity transforms)."""
    psi_hat = np.asarray(psi_hat, dtype=float).ravel()
    psi_true = np.asarray(psi_true, dtype=float).ravel()
    if psi_hat.size < 2 or psi_hat.size != psi_true.size:
        raise DataError("need equal-length scales with n >= 2")
    span = psi_hat.max() - psi_hat.min()
    if span <= 0:
        raise DataError("constant estimated scale cannot be normalized")
    mapped = (psi_hat - psi_hat.min()) / span
    reflected = 1.0 - mapped
    if mse_1d(reflected, psi_true) < mse_1d(mapped, psi_true):
        return reflected
    return mapped


def mse_1d(psi_hat_normalized, psi_true) -> float:
    a = np.asarray(psi_hat_normalized, dtype=float).ravel()
    b = np.asarray(psi_true, dtype=float).ravel()
    if a.size != b.size:
        raise DataError("length mismatch")
    return float(np.mean((a - b) ** 2))


# ---------------------------------------------------------------------------
# dimension sweep

@dataclass(frozen=True)
class DimensionSweep:
    dims: tuple
    reports: tuple  # CvReport per (engine, applicable dim)
    recommended: dict = field(default_factory=dict)  # engine -> d
    not_applicable: tuple = ()  # (engine, dim) pairs skipped

    def to_dict(self) -> dict:
        return {
            "dims": list(self.dims),
            "reports": [r.to_dict() for r in self.reports],
            "recommended": self.recommended,
            "not_applicable": [list(p) for p in self.not_applicable],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def dimension_sweep(
    responses: Sequence[TripletResponse],
    engines: Sequence[str],
    dims: Sequence[int],
    config: EngineConfig,
    k: int = 10,
    seed: int = 0,
    slack: float = 0.01,
) -> DimensionSweep:
    """CV error per (engine, d); the recommended d per engine is the
    smallest whose mean error is within `slack` of that engine's best.

    The monotone 1-D engine only applies at d=1; other dims are flagged
    rather than evaluated.
    """
    dims = tuple(dims)
    if not dims or any(b <= a for a, b in zip(dims, dims[1:])):
        raise DataError("dims must be nonempty and strictly increasing")
    reports = []
    recommended = {}
    skipped = []
    for engine in engines:
        engine_reports = []
        for d in dims:
            if engine == "mlds" and d != 1:
                skipped.append((engine, d))
                continue
            rep = cross_validated_triplet_error(
                responses, engine, config.replace(dim=d), k=k, seed=seed
            )
            engine_reports.append(rep)
            reports.append(rep)
        if engine_reports:
            best = min(r.mean for r in engine_reports)
            recommended[engine] = min(
                r.dim for r in engine_reports if r.mean <= best + slack
            )
    return DimensionSweep(
        dims=dims, reports=tuple(reports), recommended=recommended, not_applicable=tuple(skipped)
    )


def sweep_to_csv(sweep: DimensionSweep) -> str:
    lines = ["engine,dim,fold,error"]
    for rep in sweep.reports:
        for fold, err in enumerate(rep.fold_errors):
            lines.append(f"{rep.engine},{rep.dim},{fold},{err:.10g}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# repeat-consistency floor

def consistency_floor(responses: Sequence[TripletResponse]) -> tuple:
    """(hard_fraction, floor) from repeated questions.

    A repeated triplet with non-unanimous answers is "hard"; guessing on
    the hard fraction h wins half the time, so the expected best
    achievable triplet error is h/2.
    """
    groups = {}
    for r in answered(responses):
        groups.setdefault(canonical_triplet_id(r.triplet), []).append(r.answer)
    repeated = {key: ans for key, ans in groups.items() if len(ans) >= 2}
    if not repeated:
        raise DataError("no triplet with >= 2 answered repeats")
    hard = sum(1 for ans in repeated.values() if len(set(ans)) > 1)
    hard_fraction = hard / len(repeated)
    return hard_fraction, hard_fraction / 2.0
