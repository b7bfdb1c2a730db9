"""Ground-truth scaling functions, noisy simulated observers, triplet
universes, random subsampling, and triplet budgets.

Fixed parameterizations (the reference shapes are only ever shown as
curves, so exact constants are this module's choice):

* ``sigmoid``   1/(1+exp(-gamma*(s-0.5))), gamma=10 by default, affinely
  rescaled so the limits at 0 and 1 map to 0 and 1.
* ``poly2``     4*(s-0.5)**2, a parabola with vertex at s=0.5.
* ``sinusoid``  0.5 + 0.5*sin(2*pi*s).
* ``poly3_conditional``  monotone piecewise cubic through (0,0), (0.5,0.5),
  (1,1) with an inflection at the midpoint.
* ``tabulated_2d``  n points in R^2 keyed by stimulus value, linearly
  interpolated between knots; both output coordinates min-max normalized
  to the unit interval.
"""

from __future__ import annotations

import json
import math
import zlib
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .model import (
    DataError,
    DissimilarityMatrix,
    Triplet,
    TripletResponse,
    stimulus_grid,
)

KINDS_1D = ("sigmoid", "poly2", "sinusoid", "poly3_conditional")


@dataclass(frozen=True)
class ScalingFunctionSpec:
    kind: str
    params: dict = field(default_factory=dict)
    table: Optional[dict] = None  # tabulated_2d: stimulus value -> [x, y]

    def __post_init__(self):
        if self.kind in KINDS_1D:
            if self.table is not None:
                raise DataError(f"{self.kind} takes no table")
        elif self.kind == "tabulated_2d":
            if not self.table or len(self.table) < 3:
                raise DataError("tabulated_2d needs a table of >= 3 points")
        else:
            raise DataError(f"unknown scaling function kind: {self.kind}")

    @property
    def dim(self) -> int:
        return 2 if self.kind == "tabulated_2d" else 1

    def stimulus_values(self, n: Optional[int] = None) -> np.ndarray:
        """The natural stimulus grid: table knots for tabulated_2d,
        otherwise n uniform interior levels."""
        if self.kind == "tabulated_2d":
            return _table_knots(self.table)[0]
        if n is None:
            raise DataError("n required for parametric scaling functions")
        return stimulus_grid(n)

    def to_json(self) -> str:
        obj = {"kind": self.kind, "params": self.params}
        if self.table is not None:
            obj["table"] = {str(k): list(map(float, v)) for k, v in self.table.items()}
        return json.dumps(obj, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ScalingFunctionSpec":
        obj = json.loads(text)
        table = obj.get("table")
        if table is not None:
            table = {float(k): tuple(map(float, v)) for k, v in table.items()}
        return cls(kind=obj["kind"], params=obj.get("params", {}), table=table)


def _table_knots(table: dict):
    keys = np.asarray(sorted(float(k) for k in table), dtype=float)
    pts = np.asarray([table[k] if k in table else table[float(k)] for k in keys], dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DataError("tabulated_2d table entries must be 2-D points")
    span = keys[-1] - keys[0]
    if span <= 0:
        raise DataError("tabulated_2d stimulus values must not be constant")
    n = len(keys)
    # affine map of the raw stimulus range onto the default interior grid
    s = (keys - keys[0]) / span * (n - 1.0) / (n + 1.0) + 1.0 / (n + 1.0)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    if np.any(hi - lo <= 0):
        raise DataError("tabulated_2d points are degenerate along one axis")
    pts = (pts - lo) / (hi - lo)
    return s, pts


def eval_scaling(spec: ScalingFunctionSpec, s) -> np.ndarray:
    """Evaluate the ground-truth perceptual function at stimulus level(s)
    s in the open unit interval.  Returns shape (dim,) for a scalar s,
    (m, dim) for a vector."""
    s_arr = np.asarray(s, dtype=float)
    scalar = s_arr.ndim == 0
    s_arr = np.atleast_1d(s_arr)
    if np.any((s_arr <= 0.0) | (s_arr >= 1.0)):
        raise DataError("stimulus level must lie strictly inside (0, 1)")
    if spec.kind == "sigmoid":
        gamma = float(spec.params.get("gamma", 10.0))
        raw = 1.0 / (1.0 + np.exp(-gamma * (s_arr - 0.5)))
        lo = 1.0 / (1.0 + math.exp(gamma * 0.5))
        hi = 1.0 / (1.0 + math.exp(-gamma * 0.5))
        out = (raw - lo) / (hi - lo)
    elif spec.kind == "poly2":
        out = 4.0 * (s_arr - 0.5) ** 2
    elif spec.kind == "sinusoid":
        out = 0.5 + 0.5 * np.sin(2.0 * math.pi * s_arr)
    elif spec.kind == "poly3_conditional":
        out = np.where(
            s_arr < 0.5,
            0.5 * (2.0 * s_arr) ** 3,
            1.0 - 0.5 * (2.0 * (1.0 - s_arr)) ** 3,
        )
    else:  # tabulated_2d
        knots, pts = _table_knots(spec.table)
        x = np.interp(s_arr, knots, pts[:, 0])
        y = np.interp(s_arr, knots, pts[:, 1])
        out = np.stack([x, y], axis=-1)
    if out.ndim == 1:
        out = out[:, None]
    return out[0] if scalar else out


# ---------------------------------------------------------------------------
# triplet universes

@dataclass(frozen=True)
class TripletUniverse:
    """All admissible triplet questions over n stimuli.

    ``mlds_valid``: one question (j; i, k) per i<j<k, the only question
    informative under a monotone 1-D scale.  ``general``: all three
    questions per unordered trio."""

    mode: str
    n: int
    triplets: tuple

    @property
    def size(self) -> int:
        return len(self.triplets)

    @property
    def trio_count(self) -> int:
        return math.comb(self.n, 3)


def enumerate_universe(n: int, mode: str) -> TripletUniverse:
    if n < 3:
        raise DataError("need at least 3 stimuli")
    if mode not in ("mlds_valid", "general"):
        raise DataError(f"unknown universe mode: {mode}")
    triplets = []
    for i, j, k in combinations(range(n), 3):
        if mode == "mlds_valid":
            triplets.append(Triplet(j, i, k))
        else:
            triplets.append(Triplet(i, j, k))
            triplets.append(Triplet(j, i, k))
            triplets.append(Triplet(k, i, j))
    return TripletUniverse(mode=mode, n=n, triplets=tuple(triplets))


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def sample_triplets(universe: TripletUniverse, r: float, seed: int) -> list:
    """Uniform random subset without replacement of size round(r * C(n,3)).

    The budget scales with the trio count regardless of mode, so every
    engine is fed the same number of questions at a given r."""
    if not 0.0 < r <= 1.0:
        raise DataError("r must be in (0, 1]")
    size = _round_half_up(r * universe.trio_count)
    if size > universe.size:
        raise DataError(f"requested {size} triplets but universe has {universe.size}")
    rng = np.random.default_rng(seed)
    idx = rng.choice(universe.size, size=size, replace=False)
    return [universe.triplets[i] for i in idx]


# ---------------------------------------------------------------------------
# simulated observer

@dataclass
class NoisyObserver:
    """Answers triplet questions from a noisy percept of the ground
    truth: each question draws fresh Gaussian noise per involved
    stimulus, so repeated questions can get inconsistent answers."""

    spec: ScalingFunctionSpec
    sigma: float = 0.0
    seed: int = 0
    tie_policy: str = "random"  # or "fixed_plus"

    def __post_init__(self):
        if self.sigma < 0:
            raise DataError("sigma must be nonnegative")
        if self.tie_policy not in ("random", "fixed_plus"):
            raise DataError(f"unknown tie policy: {self.tie_policy}")
        self._rng = np.random.default_rng(self.seed)

    def simulate_answer(self, t: Triplet, stimuli: Sequence[float]) -> TripletResponse:
        stimuli = np.asarray(stimuli, dtype=float)
        t.validate_for(len(stimuli))
        y = eval_scaling(self.spec, stimuli[[t.ref, t.opt1, t.opt2]])
        y = y + self._rng.normal(0.0, self.sigma, size=y.shape) if self.sigma > 0 else y
        d1 = float(np.linalg.norm(y[0] - y[1]))
        d2 = float(np.linalg.norm(y[0] - y[2]))
        if d1 < d2:
            answer = +1
        elif d1 > d2:
            answer = -1
        elif self.tie_policy == "fixed_plus":
            answer = +1
        else:
            answer = +1 if self._rng.random() < 0.5 else -1
        return TripletResponse(triplet=t, answer=answer)

    def simulate_answers(self, triplets: Sequence[Triplet], stimuli) -> list:
        return [self.simulate_answer(t, stimuli) for t in triplets]

    def noisy_dissimilarities(self, stimuli) -> DissimilarityMatrix:
        """One noisy percept per stimulus, shared across all pairs (the
        construction used to hand a full matrix to NMDS)."""
        stimuli = np.asarray(stimuli, dtype=float)
        y = eval_scaling(self.spec, stimuli)
        if self.sigma > 0:
            y = y + self._rng.normal(0.0, self.sigma, size=y.shape)
        diff = y[:, None, :] - y[None, :, :]
        delta = np.sqrt(np.sum(diff**2, axis=-1))
        return DissimilarityMatrix(delta)


# ---------------------------------------------------------------------------
# budgets

def triplet_budget(n: int, d: int) -> tuple:
    """Recommended starting budget ceil(d*n*log2(n)) and its double."""
    if n < 3 or d < 1:
        raise DataError("need n >= 3 and d >= 1")
    base = math.ceil(d * n * math.log2(n))
    return base, 2 * base


def nmds_sort_budget(n: int) -> int:
    """Comparisons needed to fully order all C(n,2) pairwise distances:
    round(C(n,2) * log2(C(n,2)))."""
    if n < 3:
        raise DataError("need n >= 3")
    pairs = math.comb(n, 2)
    return _round_half_up(pairs * math.log2(pairs))


def derive_seed(master_seed: int, *task_key) -> int:
    """Stable per-task seed for parallel sweeps (crc32 so the value does
    not depend on interpreter hash randomization)."""
    parts = [int(master_seed) & 0xFFFFFFFF]
    parts.extend(zlib.crc32(repr(k).encode()) for k in task_key)
    ss = np.random.SeedSequence(parts)
    return int(ss.generate_state(1)[0])
