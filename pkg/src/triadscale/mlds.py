"""Maximum likelihood difference scaling: Gaussian-noise MLE of a
monotone 1-D perceptual scale from difference judgments.

The model is defined on quadruplets (i,j; k,l): the observer reports
whether |psi_i - psi_j| exceeds |psi_k - psi_l|, corrupted by additive
Gaussian decision noise.  Triplet questions (j; i, k) with i < j < k are
the subset of quadruplets (j,i; j,k) and are the usual input here.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from scipy import optimize as sp_optimize
from scipy import stats

from .model import DataError, Embedding, EngineConfig
from .ste import responses_to_array, triplet_error_points


class MldsScale:
    """Fitted scale: psi nondecreasing with psi[0] = 0, psi[-1] = 1,
    plus the decision-noise estimate and final log-likelihood."""

    def __init__(self, psi: np.ndarray, sigma_hat: float, loglik: float, meta: Optional[dict] = None):
        psi = np.asarray(psi, dtype=float)
        if psi.ndim != 1 or psi.size < 3:
            raise DataError("psi must be a 1-D array of length >= 3")
        if np.any(np.diff(psi) < -1e-12):
            raise DataError("psi must be nondecreasing")
        if abs(psi[0]) > 1e-12 or abs(psi[-1] - 1.0) > 1e-12:
            raise DataError("psi endpoints must be anchored at 0 and 1")
        if sigma_hat <= 0:
            raise DataError("sigma_hat must be positive")
        psi = psi.copy()
        psi[0], psi[-1] = 0.0, 1.0
        np.maximum.accumulate(psi, out=psi)  # scrub roundoff dips
        psi.flags.writeable = False
        self.psi = psi
        self.sigma_hat = float(sigma_hat)
        self.loglik = float(loglik)
        self.meta = meta or {}

    @property
    def n(self) -> int:
        return self.psi.size

    def to_embedding(self) -> Embedding:
        return Embedding(points=self.psi[:, None], meta={"engine": "mlds", **self.meta})


def _validate_triplets(arr: np.ndarray) -> np.ndarray:
    """Map answer-normalized triplet rows (ref, closer, farther) to
    quadruplet rows (i, j, k, l) with R = 1 iff |psi_i-psi_j| judged
    larger, rejecting anything outside the monotone-valid family."""
    quads = np.empty((len(arr), 4), dtype=np.intp)
    resp = np.empty(len(arr), dtype=float)
    for row, (ref, closer, farther) in enumerate(arr):
        lo, hi = min(closer, farther), max(closer, farther)
        if not (lo < ref < hi):
            raise DataError(
                f"triplet (ref={ref}; {closer},{farther}) is not a valid "
                "monotone-scale question (need opt indices straddling ref)"
            )
        # quadruplet (ref,closer ; ref,farther): first pair judged smaller
        quads[row] = (ref, closer, ref, farther)
        resp[row] = 0.0
    return quads, resp


def _negloglik(psi: np.ndarray, sigma: float, quads: np.ndarray, resp: np.ndarray) -> float:
    delta = np.abs(psi[quads[:, 0]] - psi[quads[:, 1]]) - np.abs(psi[quads[:, 2]] - psi[quads[:, 3]])
    z = delta / sigma
    return -float(np.sum(resp * stats.norm.logcdf(z) + (1.0 - resp) * stats.norm.logsf(z)))


def _softplus(x):
    return np.logaddexp(0.0, x)


def fit_mlds_quadruplets(
    quads: np.ndarray,
    resp: np.ndarray,
    config: EngineConfig,
    n: Optional[int] = None,
) -> MldsScale:
    """MLE over (psi, sigma) with psi anchored to [0, 1].

    psi is parameterized by softplus-positive increments normalized to
    sum 1, which enforces monotonicity and the anchors exactly; sigma is
    optimized on the log scale.
    """
    quads = np.asarray(quads, dtype=np.intp)
    resp = np.asarray(resp, dtype=float)
    if quads.ndim != 2 or quads.shape[1] != 4 or len(quads) == 0:
        raise DataError("need a nonempty (m, 4) quadruplet array")
    n = int(quads.max()) + 1 if n is None else n
    if n < 3:
        raise DataError("need at least 3 stimulus levels")
    if quads.max() >= n:
        raise DataError("quadruplet index out of range")

    def unpack(theta):
        inc = _softplus(theta[:-1])
        psi = np.concatenate([[0.0], np.cumsum(inc)])
        psi /= psi[-1]
        sigma = float(np.exp(theta[-1]))
        return psi, sigma

    def objective(theta):
        psi, sigma = unpack(theta)
        return _negloglik(psi, sigma, quads, resp)

    rng = np.random.default_rng(config.seed)
    best = None
    for restart in range(config.restarts):
        theta0 = np.concatenate([rng.normal(0.0, 1.0, size=n - 1), [np.log(0.2)]])
        res = sp_optimize.minimize(
            objective,
            theta0,
            method="L-BFGS-B",
            options={"maxiter": config.max_iters, "ftol": config.tolerance},
        )
        if best is None or res.fun < best.fun:
            best = res
    psi, sigma = unpack(best.x)
    return MldsScale(
        psi=psi,
        sigma_hat=sigma,
        loglik=-float(best.fun),
        meta={"seed": config.seed, "iterations": int(best.nit), "final_objective": float(best.fun)},
    )


def fit_mlds(responses: Sequence, config: EngineConfig, n: Optional[int] = None) -> MldsScale:
    """Fit from monotone-valid triplet responses (j; i, k) with i<j<k.

    Restart selection uses training triplet error (distance-comparison
    consistency of psi), ties broken by likelihood, matching the other
    engines.
    """
    arr = responses_to_array(responses)
    n = int(arr.max()) + 1 if n is None else n
    quads, resp = _validate_triplets(arr)
    rng = np.random.default_rng(config.seed)
    best = None
    for restart in range(config.restarts):
        sub = config.replace(seed=int(rng.integers(2**31 - 1)), restarts=1)
        scale = fit_mlds_quadruplets(quads, resp, sub, n=n)
        err = triplet_error_points(scale.psi[:, None], arr)
        key = (err, -scale.loglik)
        if best is None or key < best[0]:
            best = (key, scale, restart)
    key, scale, chosen = best
    scale.meta.update({"train_triplet_error": key[0], "chosen_restart": chosen, "seed": config.seed})
    return scale
