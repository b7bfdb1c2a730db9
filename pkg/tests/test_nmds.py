import numpy as np
import pytest

from triadscale import (
    DataError,
    DissimilarityMatrix,
    EngineConfig,
    classical_mds,
    fit_nmds,
)
from tests.conftest import procrustes_residual


def pairwise(points):
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt((diff**2).sum(-1))


def planar_config(n, seed):
    rng = np.random.default_rng(seed)
    return rng.normal(size=(n, 2))


class TestClassicalMds:
    def test_exact_distances_recovered(self):
        pts = planar_config(8, 0)
        rec = classical_mds(pairwise(pts), 2)
        assert procrustes_residual(rec, pts) < 1e-8

    def test_dim_truncation(self):
        pts = planar_config(6, 1)
        rec = classical_mds(pairwise(pts), 1)
        assert rec.shape == (6, 1)


class TestFitNmds:
    def test_exact_planar_distances_zero_stress(self):
        pts = planar_config(7, 2)
        res = fit_nmds(DissimilarityMatrix(pairwise(pts)), EngineConfig(dim=2, restarts=3, seed=0))
        assert res.stress < 1e-6
        assert procrustes_residual(res.embedding.points, pts) < 1e-3

    def test_monotone_distortion_irrelevant(self):
        # NMDS only uses ranks, so a monotone transform of the distances
        # still admits a (near) zero-stress fit, and with enough points
        # the rank constraints pin the shape down up to similarity.
        pts = planar_config(15, 3)
        delta = pairwise(pts) ** 1.7
        res = fit_nmds(DissimilarityMatrix(delta), EngineConfig(dim=2, restarts=3, seed=1))
        assert res.stress < 1e-3
        assert procrustes_residual(res.embedding.points, pts) < 0.05

    def test_triangle_n3(self):
        delta = np.array([[0, 1, 2], [1, 0, 1.5], [2, 1.5, 0]], dtype=float)
        res = fit_nmds(DissimilarityMatrix(delta), EngineConfig(dim=2, restarts=2, seed=0))
        assert res.stress < 1e-8

    def test_stress_trace_nonincreasing(self):
        pts = planar_config(9, 4)
        delta = pairwise(pts) + np.abs(np.random.default_rng(5).normal(0, 0.1, (9, 9)))
        delta = (delta + delta.T) / 2
        np.fill_diagonal(delta, 0.0)
        res = fit_nmds(DissimilarityMatrix(delta), EngineConfig(dim=2, restarts=2, seed=2))
        trace = np.array(res.embedding.meta["stress_trace"])
        assert np.all(np.diff(trace) <= 1e-12)

    def test_stress_range_and_disparities_sorted_with_delta(self):
        pts = planar_config(8, 6)
        delta = pairwise(pts) ** 2
        res = fit_nmds(DissimilarityMatrix(delta), EngineConfig(dim=2, restarts=2, seed=3))
        assert 0.0 <= res.stress
        iu = np.triu_indices(8, k=1)
        order = np.argsort(delta[iu], kind="stable")
        assert np.all(np.diff(res.disparities[order]) >= -1e-12)

    def test_degenerate_inputs_rejected(self):
        with pytest.raises(DataError):
            fit_nmds(DissimilarityMatrix(np.zeros((4, 4))), EngineConfig(dim=2))
        const = np.ones((4, 4)) - np.eye(4)
        with pytest.raises(DataError):
            fit_nmds(DissimilarityMatrix(const), EngineConfig(dim=2))

    def test_determinism(self):
        pts = planar_config(6, 7)
        delta = pairwise(pts)
        cfg = EngineConfig(dim=2, restarts=3, seed=9)
        r1 = fit_nmds(DissimilarityMatrix(delta), cfg)
        r2 = fit_nmds(DissimilarityMatrix(delta), cfg)
        assert np.array_equal(r1.embedding.points, r2.embedding.points)
        assert r1.stress == r2.stress

    def test_dim1_line_recovery(self):
        x = np.array([0.0, 0.1, 0.35, 0.6, 1.0])[:, None]
        res = fit_nmds(DissimilarityMatrix(pairwise(x)), EngineConfig(dim=1, restarts=3, seed=0))
        assert res.stress < 1e-6
        rec = np.argsort(res.embedding.points.ravel())
        assert list(rec) == [0, 1, 2, 3, 4] or list(rec) == [4, 3, 2, 1, 0]
