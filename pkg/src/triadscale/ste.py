"""Stochastic triplet embedding with Gaussian and heavy-tailed
(Student-t) response kernels, fit by maximum likelihood."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .model import DataError, Embedding, EngineConfig, infer_n, responses_to_array
from .optimize import minimize

INIT_SCALE = 0.1


def _softplus(x):
    return np.logaddexp(0.0, x)


def _sq_dists(points, arr):
    d_ij = np.sum((points[arr[:, 0]] - points[arr[:, 1]]) ** 2, axis=1)
    d_ik = np.sum((points[arr[:, 0]] - points[arr[:, 2]]) ** 2, axis=1)
    return d_ij, d_ik


def triplet_error_points(points: np.ndarray, arr: np.ndarray) -> float:
    """Fraction of (ref, closer, farther) rows the points get wrong;
    exact distance ties count half."""
    d_ij, d_ik = _sq_dists(points, arr)
    wrong = np.count_nonzero(d_ij > d_ik) + 0.5 * np.count_nonzero(d_ij == d_ik)
    return float(wrong) / len(arr)


def _nll_grad(points, arr, alpha=None):
    """Negative log-likelihood and gradient for answer-normalized
    triplets.  alpha=None selects the Gaussian kernel, else Student-t
    with `alpha` degrees of freedom."""
    d_ij, d_ik = _sq_dists(points, arr)
    if alpha is None:
        z = d_ij - d_ik  # log-odds against the observed answer
        coef_ij = _sigmoid(z)
        coef_ik = -coef_ij
    else:
        u_ij = -(alpha + 1.0) / 2.0 * np.log1p(d_ij / alpha)
        u_ik = -(alpha + 1.0) / 2.0 * np.log1p(d_ik / alpha)
        z = u_ik - u_ij
        q = _sigmoid(z)  # 1 - p
        coef_ij = q * (alpha + 1.0) / (2.0 * (alpha + d_ij))
        coef_ik = -q * (alpha + 1.0) / (2.0 * (alpha + d_ik))
    nll = float(np.sum(_softplus(z)))
    grad = np.zeros_like(points)
    diff_ij = points[arr[:, 0]] - points[arr[:, 1]]
    diff_ik = points[arr[:, 0]] - points[arr[:, 2]]
    term_ij = 2.0 * coef_ij[:, None] * diff_ij
    term_ik = 2.0 * coef_ik[:, None] * diff_ik
    np.add.at(grad, arr[:, 0], term_ij + term_ik)
    np.add.at(grad, arr[:, 1], -term_ij)
    np.add.at(grad, arr[:, 2], -term_ik)
    return nll, grad


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def ste_probability(points: np.ndarray, i: int, j: int, k: int, alpha: Optional[float] = None) -> float:
    """Model probability of answering that j is closer to i than k is."""
    d_ij = float(np.sum((points[i] - points[j]) ** 2))
    d_ik = float(np.sum((points[i] - points[k]) ** 2))
    if alpha is None:
        return float(_sigmoid(d_ik - d_ij))
    u_ij = -(alpha + 1.0) / 2.0 * np.log1p(d_ij / alpha)
    u_ik = -(alpha + 1.0) / 2.0 * np.log1p(d_ik / alpha)
    return float(_sigmoid(u_ij - u_ik))


def ste_negloglik_and_grad(points, responses_or_array, alpha: Optional[float] = None):
    """-log L and its gradient (one row per point coordinate).

    Responses answered -1 contribute (1 - p); this is folded in by
    swapping the two options, since 1 - p_ijk = p_ikj exactly.
    """
    pts = points.points if isinstance(points, Embedding) else np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    arr = responses_or_array if isinstance(responses_or_array, np.ndarray) else responses_to_array(responses_or_array)
    if arr.size == 0:
        raise DataError("empty response set")
    if arr.max() >= len(pts):
        raise DataError("triplet index out of range for the point set")
    return _nll_grad(pts, arr, alpha=alpha)


def tste_negloglik_and_grad(points, responses_or_array, alpha: float = 1.0):
    if alpha <= 0:
        raise DataError("alpha must be positive")
    return ste_negloglik_and_grad(points, responses_or_array, alpha=alpha)


def _fit(responses: Sequence, config: EngineConfig, alpha, engine_name: str, n: Optional[int]) -> Embedding:
    arr = responses_to_array(responses)
    n = infer_n(responses) if n is None else n
    if arr.max() >= n:
        raise DataError("response mentions a stimulus index >= n")
    referenced = np.zeros(n, dtype=bool)
    referenced[arr.ravel()] = True
    rng = np.random.default_rng(config.seed)
    best = None
    restart_objectives = []
    for restart in range(config.restarts):
        x0 = rng.normal(0.0, INIT_SCALE, size=(n, config.dim))

        def fg(flat):
            f, g = _nll_grad(flat.reshape(n, config.dim), arr, alpha=alpha)
            return f, g.ravel()

        x, f, iters = minimize(
            fg, x0.ravel(), max_iters=config.max_iters, tolerance=config.tolerance
        )
        pts = x.reshape(n, config.dim)
        err = triplet_error_points(pts, arr)
        restart_objectives.append(f)
        if best is None or (err, f) < (best[0], best[1]):
            best = (err, f, pts, iters, restart)
    err, f, pts, iters, chosen = best
    if not referenced.all():
        # unconstrained stimuli sit at the centroid of the constrained ones
        centroid = pts[referenced].mean(axis=0)
        pts = pts.copy()
        pts[~referenced] = centroid
    meta = {
        "engine": engine_name,
        "seed": config.seed,
        "final_objective": f,
        "iterations": iters,
        "train_triplet_error": err,
        "restart_objectives": restart_objectives,
        "chosen_restart": chosen,
    }
    if alpha is not None:
        meta["alpha"] = alpha
    if not referenced.all():
        meta["unreferenced_stimuli"] = np.flatnonzero(~referenced).tolist()
    return Embedding(points=pts, meta=meta)


def fit_ste(responses: Sequence, config: EngineConfig, n: Optional[int] = None) -> Embedding:
    """Best-of-restarts Gaussian-kernel embedding; restarts are compared
    by training triplet error, ties broken by the objective."""
    return _fit(responses, config, alpha=None, engine_name="ste", n=n)


def fit_tste(responses: Sequence, config: EngineConfig, n: Optional[int] = None) -> Embedding:
    return _fit(responses, config, alpha=config.alpha, engine_name="tste", n=n)
