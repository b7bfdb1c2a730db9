"""Shared data types: stimuli, triplets, responses, embeddings, configs.

All types are immutable after construction and safe to share across
workers. Stimulus indices are 0-based; external files may use labels and
are mapped through StimulusSet.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

UNANSWERED = None

CSV_HEADER = ["ref", "opt1", "opt2", "answer", "rt_ms", "session_id", "repeat_index"]


class DataError(ValueError):
    """Malformed input data (files, matrices, responses)."""


@dataclass(frozen=True)
class StimulusSet:
    """An ordered set of stimulus levels.

    ``values``, when given, are physical magnitudes rescaled to (0,1)
    before use in simulation.
    """

    labels: tuple
    values: Optional[tuple] = None

    def __post_init__(self):
        if len(self.labels) < 3:
            raise DataError("need at least 3 stimuli")
        if len(set(self.labels)) != len(self.labels):
            raise DataError("stimulus labels must be unique")
        if self.values is not None:
            values = tuple(float(v) for v in self.values)
            if len(values) != len(self.labels):
                raise DataError("values must match labels in length")
            if any(b <= a for a, b in zip(values, values[1:])):
                raise DataError("values must be strictly increasing")
            object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return len(self.labels)

    def index_of(self, label) -> int:
        return self.labels.index(label)


def stimulus_grid(n: int) -> np.ndarray:
    """Default n uniformly spaced stimulus levels inside the open unit
    interval: (i+1)/(n+1)."""
    if n < 3:
        raise DataError("need at least 3 stimuli")
    return (np.arange(n) + 1.0) / (n + 1.0)


@dataclass(frozen=True)
class Triplet:
    """A question (ref; opt1, opt2): is `ref` more similar to `opt1` or
    to `opt2`?  Option order is semantic, not sorted."""

    ref: int
    opt1: int
    opt2: int

    def __post_init__(self):
        if len({self.ref, self.opt1, self.opt2}) != 3:
            raise DataError(f"triplet indices must be distinct: {self}")
        if min(self.ref, self.opt1, self.opt2) < 0:
            raise DataError(f"triplet indices must be nonnegative: {self}")

    def validate_for(self, n: int) -> None:
        if max(self.ref, self.opt1, self.opt2) >= n:
            raise DataError(f"triplet {self} out of range for n={n}")


def canonical_triplet_id(t: Triplet) -> str:
    """Stable string key "ref:opt1:opt2", preserving option order."""
    return f"{t.ref}:{t.opt1}:{t.opt2}"


@dataclass(frozen=True)
class TripletResponse:
    triplet: Triplet
    answer: Optional[int]  # +1 (opt1 closer), -1 (opt2 closer), None = unanswered
    rt_ms: Optional[float] = None
    session_id: Optional[str] = None
    repeat_index: Optional[int] = None

    def __post_init__(self):
        if self.answer not in (+1, -1, None):
            raise DataError(f"answer must be +1, -1 or None, got {self.answer!r}")
        if self.rt_ms is not None and self.rt_ms < 0:
            raise DataError("rt_ms must be nonnegative")

    @property
    def answered(self) -> bool:
        return self.answer is not None


@dataclass(frozen=True)
class Embedding:
    """n points in R^d plus fit metadata (engine, seed, final objective,
    iterations) so best-of-restarts selection is auditable."""

    points: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise DataError("points must be an (n, d) array")
        if not np.all(np.isfinite(pts)):
            raise DataError("embedding coordinates must be finite")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def to_json(self) -> str:
        return json.dumps(
            {"n": self.n, "dim": self.dim, "points": self.points.tolist(), "meta": self.meta},
            indent=2,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "Embedding":
        obj = json.loads(text)
        emb = cls(points=np.asarray(obj["points"], dtype=float), meta=obj.get("meta", {}))
        if emb.n != obj["n"] or emb.dim != obj["dim"]:
            raise DataError("embedding JSON header disagrees with points")
        return emb


@dataclass(frozen=True)
class DissimilarityMatrix:
    """Symmetric nonnegative matrix with zero diagonal."""

    delta: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.delta, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DataError("dissimilarity matrix must be square")
        if not np.all(np.isfinite(m)):
            raise DataError("dissimilarities must be finite")
        if not np.allclose(m, m.T, atol=1e-12):
            raise DataError("dissimilarity matrix must be symmetric")
        if not np.allclose(np.diag(m), 0.0, atol=1e-12):
            raise DataError("dissimilarity diagonal must be zero")
        if np.any(m < -1e-12):
            raise DataError("dissimilarities must be nonnegative")
        m = np.clip((m + m.T) / 2.0, 0.0, None)
        np.fill_diagonal(m, 0.0)
        m.flags.writeable = False
        object.__setattr__(self, "delta", m)

    @property
    def n(self) -> int:
        return self.delta.shape[0]


@dataclass(frozen=True)
class EngineConfig:
    """Optimizer settings shared by all embedding engines."""

    dim: int = 1
    restarts: int = 10
    max_iters: int = 1000
    tolerance: float = 1e-7
    seed: int = 0
    alpha: float = 1.0  # Student-t degrees of freedom, heavy-tail engine only

    def __post_init__(self):
        if self.dim < 1:
            raise DataError("dim must be >= 1")
        if self.restarts < 1:
            raise DataError("restarts must be >= 1")
        if self.tolerance <= 0:
            raise DataError("tolerance must be positive")
        if self.alpha <= 0:
            raise DataError("alpha must be positive")

    def replace(self, **kw) -> "EngineConfig":
        d = {f: getattr(self, f) for f in ("dim", "restarts", "max_iters", "tolerance", "seed", "alpha")}
        d.update(kw)
        return EngineConfig(**d)


def consistency_sign(embedding: Embedding, response: TripletResponse) -> int:
    """+1 if the answered response agrees with the embedding's distance
    comparison, -1 if it disagrees, 0 on an exact distance tie.

    Ties are surfaced rather than broken so callers choose the policy.
    """
    if response.answer is None:
        raise DataError("cannot score an unanswered response")
    t = response.triplet
    t.validate_for(embedding.n)
    y = embedding.points
    d_ij = float(np.sum((y[t.ref] - y[t.opt1]) ** 2))
    d_ik = float(np.sum((y[t.ref] - y[t.opt2]) ** 2))
    s = int(np.sign(d_ij - d_ik))
    # answer +1 claims opt1 is closer, i.e. d_ij < d_ik, i.e. sign -1
    return -response.answer * s


# ---------------------------------------------------------------------------
# response CSV format (lingua franca of all modules)

def _format_row(r: TripletResponse) -> list:
    return [
        r.triplet.ref,
        r.triplet.opt1,
        r.triplet.opt2,
        "NA" if r.answer is None else r.answer,
        "" if r.rt_ms is None else f"{r.rt_ms:g}",
        "" if r.session_id is None else r.session_id,
        "" if r.repeat_index is None else r.repeat_index,
    ]


def write_responses_csv(responses: Sequence[TripletResponse], path_or_file) -> None:
    if hasattr(path_or_file, "write"):
        w = csv.writer(path_or_file, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in responses:
            w.writerow(_format_row(r))
    else:
        with open(path_or_file, "w", newline="") as fh:
            write_responses_csv(responses, fh)


def responses_to_csv_text(responses: Sequence[TripletResponse]) -> str:
    buf = io.StringIO()
    write_responses_csv(responses, buf)
    return buf.getvalue()


def read_responses_csv(path_or_file) -> list:
    if not hasattr(path_or_file, "read"):
        with open(path_or_file, newline="") as fh:
            return read_responses_csv(fh)
    reader = csv.reader(path_or_file)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty response file") from None
    header = [h.strip() for h in header]
    if header[:4] != CSV_HEADER[:4]:
        raise DataError(f"bad response CSV header: {header}")
    out = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        row = row + [""] * (len(CSV_HEADER) - len(row))
        try:
            answer_field = row[3].strip()
            answer = None if answer_field in ("", "NA", "na") else int(answer_field)
            out.append(
                TripletResponse(
                    triplet=Triplet(int(row[0]), int(row[1]), int(row[2])),
                    answer=answer,
                    rt_ms=float(row[4]) if row[4].strip() else None,
                    session_id=row[5].strip() or None,
                    repeat_index=int(row[6]) if row[6].strip() else None,
                )
            )
        except (ValueError, DataError) as exc:
            raise DataError(f"line {lineno}: {exc}") from None
    return out


def answered(responses: Sequence[TripletResponse]) -> list:
    return [r for r in responses if r.answered]


def responses_to_array(responses: Sequence[TripletResponse]) -> np.ndarray:
    """(m, 3) int array with option order normalized so the answer is
    always +1: rows are (ref, closer, farther).  Unanswered rows are
    rejected."""
    rows = []
    for r in responses:
        if not r.answered:
            raise DataError("unanswered response in training data")
        t = r.triplet
        if r.answer == +1:
            rows.append((t.ref, t.opt1, t.opt2))
        else:
            rows.append((t.ref, t.opt2, t.opt1))
    if not rows:
        raise DataError("empty response set")
    return np.asarray(rows, dtype=np.intp)


def infer_n(responses: Sequence[TripletResponse]) -> int:
    return 1 + max(max(r.triplet.ref, r.triplet.opt1, r.triplet.opt2) for r in responses)
