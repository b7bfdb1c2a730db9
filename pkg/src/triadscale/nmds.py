"""Kruskal-style non-metric MDS: alternate isotonic regression of the
current distances onto the dissimilarity rank order with gradient
descent on the normalized stress."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .isotonic import isotonic_fit
from .model import DataError, DissimilarityMatrix, Embedding, EngineConfig
from .optimize import minimize

INIT_SCALE = 0.1
INNER_ITERS = 50


class NmdsResult:
    def __init__(self, embedding: Embedding, stress: float, disparities: np.ndarray):
        self.embedding = embedding
        self.stress = float(stress)
        self.disparities = disparities  # fitted monotone values in pair order


def _pair_index(n: int):
    iu = np.triu_indices(n, k=1)
    return iu


def _distances(points: np.ndarray, iu) -> np.ndarray:
    return np.linalg.norm(points[iu[0]] - points[iu[1]], axis=1)


def _stress(points: np.ndarray, disp: np.ndarray, iu):
    """stress = sum (d - g)^2 / sum d^2 and its gradient in the points;
    the denominator keeps the configuration from collapsing."""
    d = _distances(points, iu)
    resid = d - disp
    num = float(np.sum(resid**2))
    den = float(np.sum(d**2))
    if den <= 0:
        return np.inf, np.zeros_like(points)
    s = num / den
    # dS/dd = (2 resid * den - num * 2 d) / den^2
    dsdd = (2.0 * resid * den - num * 2.0 * d) / den**2
    safe_d = np.where(d > 1e-12, d, 1.0)
    coef = np.where(d > 1e-12, dsdd / safe_d, 0.0)
    diff = points[iu[0]] - points[iu[1]]
    contrib = coef[:, None] * diff
    grad = np.zeros_like(points)
    np.add.at(grad, iu[0], contrib)
    np.add.at(grad, iu[1], -contrib)
    return s, grad


def classical_mds(delta: np.ndarray, dim: int) -> np.ndarray:
    """Torgerson's metric solution: double-center the squared
    dissimilarities and take the top eigenvectors.  Used as the first
    restart's start, which avoids degenerate zero-stress local optima
    that random starts can fall into."""
    n = delta.shape[0]
    j = np.eye(n) - np.ones((n, n)) / n
    b = -0.5 * j @ (delta**2) @ j
    vals, vecs = np.linalg.eigh(b)
    order = np.argsort(vals)[::-1][:dim]
    vals = np.clip(vals[order], 0.0, None)
    return vecs[:, order] * np.sqrt(vals)


def _tie_groups(delta_vec: np.ndarray):
    """Positions of the pair vector grouped by increasing delta; equal
    deltas share a group (and will share a fitted value)."""
    order = np.argsort(delta_vec, kind="stable")
    groups = []
    current = [int(order[0])]
    for idx in order[1:]:
        if delta_vec[idx] == delta_vec[current[-1]]:
            current.append(int(idx))
        else:
            groups.append(current)
            current = [int(idx)]
    groups.append(current)
    return groups


def fit_nmds(delta: DissimilarityMatrix, config: EngineConfig) -> NmdsResult:
    """Best-of-restarts two-step minimization of Kruskal stress.

    Each round fits disparities by isotonic regression (distances onto
    the delta rank order, ties pooled) and then moves points downhill on
    the stress with those disparities held fixed, so stress never
    increases within a restart.
    """
    n = delta.n
    iu = _pair_index(n)
    delta_vec = delta.delta[iu]
    if np.all(delta_vec == 0):
        raise DataError("all-zero dissimilarity matrix is degenerate")
    if np.all(delta_vec == delta_vec[0]):
        raise DataError("constant dissimilarities carry no rank information")
    groups = _tie_groups(delta_vec)

    rng = np.random.default_rng(config.seed)
    best = None
    for restart in range(config.restarts):
        if restart == 0:
            points = classical_mds(delta.delta, config.dim)
            points = points + rng.normal(0.0, 1e-6, size=points.shape)
        else:
            points = rng.normal(0.0, INIT_SCALE, size=(n, config.dim))
        # start at a scale comparable to the dissimilarities
        d0 = _distances(points, iu)
        if d0.mean() > 0:
            points *= delta_vec.mean() / d0.mean()
        stress_prev = np.inf
        disp = None
        rounds = 0
        trace = []
        for rounds in range(1, config.max_iters + 1):
            disp = isotonic_fit(groups, _distances(points, iu))

            def fg(flat):
                s, g = _stress(flat.reshape(n, config.dim), disp, iu)
                return s, g.ravel()

            x, stress, _ = minimize(
                fg, points.ravel(), max_iters=INNER_ITERS, tolerance=config.tolerance
            )
            points = x.reshape(n, config.dim)
            trace.append(stress)
            if stress_prev - stress < config.tolerance * max(stress_prev, 1e-30):
                stress_prev = stress
                break
            stress_prev = stress
        if best is None or stress_prev < best[0]:
            best = (stress_prev, points, disp, rounds, restart, trace)
    stress, points, disp, rounds, chosen, trace = best
    emb = Embedding(
        points=points,
        meta={
            "engine": "nmds",
            "seed": config.seed,
            "final_objective": stress,
            "iterations": rounds,
            "chosen_restart": chosen,
            "stress_trace": trace,
        },
    )
    return NmdsResult(embedding=emb, stress=stress, disparities=disp)
