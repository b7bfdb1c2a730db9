import json

import numpy as np
import pytest

from triadscale import (
    DataError,
    Embedding,
    EngineConfig,
    NoisyObserver,
    Triplet,
    TripletResponse,
    consistency_floor,
    cross_validated_triplet_error,
    dimension_sweep,
    enumerate_universe,
    eval_scaling,
    fit_engine,
    mse_1d,
    normalize_scale_1d,
    sample_triplets,
    stimulus_grid,
    sweep_to_csv,
    triplet_error,
)
from tests.conftest import noiseless_responses


class TestTripletError:
    def test_all_consistent_zero(self):
        pts = np.array([[0.0], [0.3], [1.0]])
        emb = Embedding(points=pts)
        resp = noiseless_responses(pts, enumerate_universe(3, "general").triplets)
        assert triplet_error(emb, resp) == 0.0

    def test_all_flipped_one(self):
        pts = np.array([[0.0], [0.3], [1.0]])
        emb = Embedding(points=pts)
        resp = [
            TripletResponse(r.triplet, -r.answer)
            for r in noiseless_responses(pts, enumerate_universe(3, "general").triplets)
        ]
        assert triplet_error(emb, resp) == 1.0

    def test_tie_counts_half(self):
        emb = Embedding(points=np.array([[0.0], [1.0], [-1.0]]))
        assert triplet_error(emb, [TripletResponse(Triplet(0, 1, 2), +1)]) == 0.5

    def test_random_embedding_near_half(self):
        # against answers uncorrelated with geometry the error is a
        # binomial proportion around 1/2
        rng = np.random.default_rng(0)
        pts = rng.normal(size=(12, 2))
        emb = Embedding(points=pts)
        universe = enumerate_universe(12, "general").triplets
        triplets = [universe[i] for i in rng.integers(len(universe), size=4000)]
        resp = [TripletResponse(t, int(rng.choice([-1, 1]))) for t in triplets]
        err = triplet_error(emb, resp)
        assert abs(err - 0.5) < 4 * 0.5 / np.sqrt(4000)

    def test_unanswered_rejected(self):
        emb = Embedding(points=np.array([[0.0], [0.2], [1.0]]))
        resp = [
            TripletResponse(Triplet(0, 1, 2), +1),
            TripletResponse(Triplet(0, 1, 2), None),
        ]
        with pytest.raises(DataError):
            triplet_error(emb, resp)

    def test_empty_raises(self):
        emb = Embedding(points=np.array([[0.0], [0.2], [1.0]]))
        with pytest.raises(DataError):
            triplet_error(emb, [])


class TestFitEngine:
    def test_registry_names(self):
        resp = noiseless_responses(
            stimulus_grid(6)[:, None], enumerate_universe(6, "mlds_valid").triplets
        )
        for name in ("ste", "tste", "mlds"):
            emb = fit_engine(name, resp, EngineConfig(restarts=2, seed=0))
            assert emb.n == 6 and emb.dim == 1

    def test_unknown_engine(self):
        with pytest.raises(DataError, match="unknown engine"):
            fit_engine("pca", [], EngineConfig())


class TestCrossValidation:
    def _responses(self, n=9, count=220, sigma=0.1, seed=0):
        from triadscale import ScalingFunctionSpec

        spec = ScalingFunctionSpec(kind="sigmoid")
        obs = NoisyObserver(spec, sigma=sigma, seed=seed)
        universe = enumerate_universe(n, "general").triplets
        rng = np.random.default_rng(seed)
        triplets = [universe[i] for i in rng.choice(len(universe), size=count, replace=False)]
        return obs.simulate_answers(triplets, stimulus_grid(n))

    def test_fold_sizes_and_report(self):
        resp = self._responses(count=103)
        rep = cross_validated_triplet_error(resp, "ste", EngineConfig(restarts=2, seed=0), k=5, seed=3)
        assert rep.k == 5 and len(rep.fold_errors) == 5
        assert all(0.0 <= e <= 1.0 for e in rep.fold_errors)
        # sizes 21,21,21,20,20 -> std over folds is the ddof=1 std
        assert rep.std == pytest.approx(float(np.std(rep.fold_errors, ddof=1)))
        blob = json.loads(rep.to_json())
        assert blob["engine"] == "ste" and blob["mean"] == pytest.approx(rep.mean)

    def test_determinism(self):
        resp = self._responses()
        a = cross_validated_triplet_error(resp, "tste", EngineConfig(restarts=2, seed=1), k=4, seed=7)
        b = cross_validated_triplet_error(resp, "tste", EngineConfig(restarts=2, seed=1), k=4, seed=7)
        assert a.fold_errors == b.fold_errors

    def test_seed_changes_partition(self):
        resp = self._responses()
        a = cross_validated_triplet_error(resp, "ste", EngineConfig(restarts=2, seed=1), k=4, seed=1)
        b = cross_validated_triplet_error(resp, "ste", EngineConfig(restarts=2, seed=1), k=4, seed=2)
        assert a.fold_errors != b.fold_errors

    def test_k_validation(self):
        resp = self._responses(count=60)
        with pytest.raises(DataError):
            cross_validated_triplet_error(resp, "ste", EngineConfig(), k=1)
        with pytest.raises(DataError):
            cross_validated_triplet_error(resp[:3], "ste", EngineConfig(), k=10)


class TestScaleComparison:
    def test_affine_and_reflection_invariance(self):
        psi_true = np.array([0.0, 0.2, 0.5, 0.9, 1.0])
        for transform in (lambda x: 3.0 * x + 2.0, lambda x: -1.5 * x + 4.0):
            out = normalize_scale_1d(transform(psi_true), psi_true)
            assert mse_1d(out, psi_true) < 1e-24

    def test_reflection_choice_by_mse(self):
        psi_true = np.array([0.0, 0.1, 0.9, 1.0])
        out = normalize_scale_1d(np.array([1.0, 0.9, 0.1, 0.0]), psi_true)
        assert np.allclose(out, psi_true)

    def test_constant_scale_rejected(self):
        with pytest.raises(DataError):
            normalize_scale_1d(np.ones(4), np.linspace(0, 1, 4))

    def test_mse_example(self):
        assert mse_1d([0.0, 0.5], [0.0, 0.0]) == pytest.approx(0.125)


class TestDimensionSweep:
    def _responses(self):
        # monotone 1-D ground truth over in-between triplets so every
        # engine (including the 1-D-only one) can consume the same data
        pts = stimulus_grid(9)[:, None]
        return noiseless_responses(pts, enumerate_universe(9, "mlds_valid").triplets)

    def test_sweep_shape_and_recommendation(self):
        resp = self._responses()
        sweep = dimension_sweep(
            resp, ["ste", "mlds"], [1, 2], EngineConfig(restarts=2, seed=0), k=4, seed=0
        )
        assert ("mlds", 2) in sweep.not_applicable
        engines_dims = {(r.engine, r.dim) for r in sweep.reports}
        assert engines_dims == {("ste", 1), ("ste", 2), ("mlds", 1)}
        assert sweep.recommended["mlds"] == 1
        assert sweep.recommended["ste"] in (1, 2)
        csv = sweep_to_csv(sweep)
        assert csv.splitlines()[0] == "engine,dim,fold,error"
        assert len(csv.splitlines()) == 1 + 3 * 4
        blob = json.loads(sweep.to_json())
        assert blob["dims"] == [1, 2]

    def test_recommends_smallest_within_slack(self):
        resp = self._responses()
        sweep = dimension_sweep(
            resp, ["ste"], [1, 2], EngineConfig(restarts=2, seed=0), k=4, seed=0, slack=1.0
        )
        assert sweep.recommended["ste"] == 1

    def test_dims_validation(self):
        with pytest.raises(DataError):
            dimension_sweep([], ["ste"], [2, 1], EngineConfig())


class TestConsistencyFloor:
    def test_worked_example(self):
        t1, t2 = Triplet(0, 1, 2), Triplet(1, 0, 2)
        resp = [
            TripletResponse(t1, +1),
            TripletResponse(t1, +1),
            TripletResponse(t1, +1),  # unanimous
            TripletResponse(t2, +1),
            TripletResponse(t2, -1),  # hard
        ]
        hard, floor = consistency_floor(resp)
        assert hard == pytest.approx(0.5)
        assert floor == pytest.approx(0.25)

    def test_singletons_and_unanswered_ignored(self):
        t1, t2 = Triplet(0, 1, 2), Triplet(1, 0, 2)
        resp = [
            TripletResponse(t1, +1),
            TripletResponse(t1, -1),
            TripletResponse(t1, None),
            TripletResponse(t2, +1),  # only once: not a repeat
        ]
        hard, floor = consistency_floor(resp)
        assert hard == 1.0 and floor == 0.5

    def test_no_repeats_raises(self):
        with pytest.raises(DataError):
            consistency_floor([TripletResponse(Triplet(0, 1, 2), +1)])
