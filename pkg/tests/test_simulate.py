import math

import pytest

from triadscale import DataError, ScalingFunctionSpec
from triadscale.simulate import SweepConfig, aggregate, rows_to_csv, run_sweep, table_to_csv


@pytest.fixture(scope="module")
def small_config():
    return SweepConfig(
        spec=ScalingFunctionSpec(kind="sigmoid"),
        n=6,
        sigma_list=(0.1,),
        r_list=(0.5, 1.0),
        engines=("ste", "mlds", "nmds"),
        repetitions=2,
        restarts=2,
        seed=0,
    )


class TestRunSweep:
    def test_row_count_and_nmds_restriction(self, small_config):
        rows = run_sweep(small_config)
        # ste and mlds at both r, nmds only at r=1
        assert len(rows) == (2 * 2 + 2 * 2 + 1 * 2)
        assert all(row["r"] == 1.0 for row in rows if row["engine"] == "nmds")

    def test_parallel_matches_serial(self, small_config):
        assert run_sweep(small_config, jobs=1) == run_sweep(small_config, jobs=2)

    def test_mse_only_for_1d(self, small_config):
        rows = run_sweep(small_config)
        for row in rows:
            if row["engine"] in ("ste", "mlds"):
                assert math.isfinite(row["mse"])
            assert 0.0 <= row["triplet_error"] <= 1.0

    def test_config_validation(self):
        with pytest.raises(DataError):
            SweepConfig(spec=ScalingFunctionSpec(kind="sigmoid"), engines=())
        with pytest.raises(DataError):
            SweepConfig(spec=ScalingFunctionSpec(kind="sigmoid"), repetitions=0)
        with pytest.raises(DataError):
            SweepConfig(spec=ScalingFunctionSpec(kind="sigmoid"), engines=("pca",))


class TestAggregate:
    def test_tables_and_csv(self, small_config):
        rows = run_sweep(small_config)
        mean_rows, std_rows = aggregate(rows)
        assert len(mean_rows) == len(std_rows) == 5  # (engine, sigma, r) groups
        mean_csv = table_to_csv(mean_rows)
        assert mean_csv.splitlines()[0] == "engine,sigma,r,mse,triplet_error"
        assert len(mean_csv.splitlines()) == 6
        raw_csv = rows_to_csv(rows)
        assert raw_csv.splitlines()[0] == "engine,sigma,r,rep,mse,triplet_error"
        assert len(raw_csv.splitlines()) == 1 + len(rows)
