"""Ingestion of a color similarity matrix into a frozen 2-D tabulated
ground-truth scaling function.

The bundled ``data/ekman_1954_similarity.csv`` is the classic 14-color
similarity-judgment matrix (wavelengths 434-674 nm) as reprinted in the
multidimensional-scaling literature.  Ingestion converts similarities to
dissimilarities (delta = 1 - s), embeds them in the plane with NMDS, and
freezes the coordinates keyed by wavelength.
"""

from __future__ import annotations

import csv
import json
from importlib import resources

import numpy as np

from .model import DataError, DissimilarityMatrix, EngineConfig
from .nmds import fit_nmds
from .scaling import ScalingFunctionSpec


def bundled_similarity_path():
    return resources.files("triadscale.data") / "ekman_1954_similarity.csv"


def read_similarity_csv(path_or_file):
    """Read a similarity matrix CSV: header row of wavelengths, then an
    n x n numeric matrix.  Returns (wavelengths, matrix)."""
    if not hasattr(path_or_file, "read"):
        with open(path_or_file, newline="") as fh:
            return read_similarity_csv(fh)
    rows = list(csv.reader(path_or_file))
    if len(rows) < 2:
        raise DataError("similarity CSV needs a header and a matrix")
    try:
        wavelengths = np.asarray([float(x) for x in rows[0]], dtype=float)
        matrix = np.asarray([[float(x) for x in row] for row in rows[1:] if row], dtype=float)
    except ValueError as exc:
        raise DataError(f"non-numeric entry in similarity CSV: {exc}") from None
    n = wavelengths.size
    if matrix.shape != (n, n):
        raise DataError(f"expected a {n}x{n} matrix, got {matrix.shape}")
    if not np.allclose(matrix, matrix.T, atol=1e-9):
        raise DataError("similarity matrix must be symmetric")
    return wavelengths, matrix


def similarity_to_dissimilarity(matrix: np.ndarray) -> DissimilarityMatrix:
    delta = 1.0 - np.asarray(matrix, dtype=float)
    np.fill_diagonal(delta, 0.0)
    off = delta[~np.eye(len(delta), dtype=bool)]
    if np.all(off == off[0]):
        raise DataError("degenerate similarity matrix: all off-diagonal values equal")
    return DissimilarityMatrix(delta)


def ingest_similarity(path_or_file, config: EngineConfig | None = None) -> ScalingFunctionSpec:
    """Build the tabulated 2-D ground truth from a similarity CSV by
    running NMDS at d=2 on the derived dissimilarities."""
    wavelengths, matrix = read_similarity_csv(path_or_file)
    delta = similarity_to_dissimilarity(matrix)
    config = (config or EngineConfig()).replace(dim=2)
    result = fit_nmds(delta, config)
    table = {
        float(w): tuple(map(float, pt))
        for w, pt in zip(wavelengths, result.embedding.points)
    }
    return ScalingFunctionSpec(kind="tabulated_2d", table=table)


def write_table_json(spec: ScalingFunctionSpec, path) -> None:
    if spec.kind != "tabulated_2d":
        raise DataError("only tabulated_2d specs are frozen to JSON tables")
    with open(path, "w") as fh:
        fh.write(spec.to_json())
        fh.write("\n")


def read_table_json(path) -> ScalingFunctionSpec:
    with open(path) as fh:
        return ScalingFunctionSpec.from_json(fh.read())
