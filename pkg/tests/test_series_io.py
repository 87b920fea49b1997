import numpy as np
import pytest

from hhtforecast.errors import DataError
from hhtforecast.series_io import (
    NormParams,
    TimeSeries,
    apply_norm,
    denormalize,
    load_csv,
    normalize,
    split_holdout,
)


def write_csv(path, rows, header="t,value"):
    path.write_text(header + "\n" + "\n".join(rows) + "\n")
    return path


class TestLoadCsv:
    def test_plain_three_rows(self, tmp_path):
        p = write_csv(tmp_path / "a.csv", ["0,1.0", "60,2.0", "120,3.0"])
        ts = load_csv(p, "value")
        assert len(ts) == 3
        assert ts.step == 60.0
        assert np.array_equal(ts.values, [1.0, 2.0, 3.0])

    def test_interpolates_single_gap(self, tmp_path):
        p = write_csv(tmp_path / "a.csv", ["0,1.0", "1,", "2,3.0"])
        ts = load_csv(p, "value", "interpolate_max3")
        assert np.allclose(ts.values, [1.0, 2.0, 3.0])

    def test_interpolates_three_sample_gap(self, tmp_path):
        rows = ["0,0.0", "1,", "2,nan", "3,", "4,4.0"]
        ts = load_csv(write_csv(tmp_path / "a.csv", rows), "value")
        assert np.allclose(ts.values, [0, 1, 2, 3, 4])

    def test_gap_longer_than_three_fails(self, tmp_path):
        rows = ["0,0.0", "1,", "2,", "3,", "4,", "5,5.0"]
        with pytest.raises(DataError, match="gap of 4"):
            load_csv(write_csv(tmp_path / "a.csv", rows), "value")

    def test_fail_policy_rejects_any_gap(self, tmp_path):
        p = write_csv(tmp_path / "a.csv", ["0,1.0", "1,", "2,3.0"])
        with pytest.raises(DataError, match="policy 'fail'"):
            load_csv(p, "value", "fail")

    def test_boundary_gap_fails(self, tmp_path):
        p = write_csv(tmp_path / "a.csv", ["0,", "1,1.0", "2,2.0"])
        with pytest.raises(DataError, match="boundary"):
            load_csv(p, "value")

    def test_non_uniform_sampling_fails(self, tmp_path):
        p = write_csv(tmp_path / "a.csv", ["0,1.0", "60,2.0", "180,3.0"])
        with pytest.raises(DataError, match="non-uniform"):
            load_csv(p, "value")

    def test_missing_column_fails(self, tmp_path):
        p = write_csv(tmp_path / "a.csv", ["0,1.0"])
        with pytest.raises(DataError, match="'power' not found"):
            load_csv(p, "power")

    def test_iso_timestamps(self, tmp_path):
        rows = [
            "2020-01-01T00:00:00,1.0",
            "2020-01-01T01:00:00,2.0",
            "2020-01-01T02:00:00,3.0",
        ]
        ts = load_csv(write_csv(tmp_path / "a.csv", rows), "value")
        assert ts.step == 3600.0

    def test_named_column_extraction(self, tmp_path):
        p = write_csv(tmp_path / "a.csv", ["0,1.0,10.0", "1,2.0,20.0"], header="t,u,v")
        ts = load_csv(p, "v")
        assert np.array_equal(ts.values, [10.0, 20.0])
        assert ts.name == "v"

    def test_decreasing_timestamps_fail(self, tmp_path):
        p = write_csv(tmp_path / "a.csv", ["2,1.0", "1,2.0", "0,3.0"])
        with pytest.raises(DataError, match="strictly increasing"):
            load_csv(p, "value")

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="cannot open"):
            load_csv(tmp_path / "nope.csv", "value")


def series(values, step=1.0, name="x"):
    return TimeSeries(np.asarray(values, dtype=float), 0.0, step, name)


class TestNormalize:
    def test_minmax_spans_unit_interval(self):
        out, params = normalize(series([1.0, 2.0, 3.0]), "minmax")
        assert np.array_equal(out.values, [0.0, 0.5, 1.0])
        assert params.offset == 1.0 and params.scale == 2.0

    def test_constant_series_degenerate(self):
        with pytest.raises(DataError, match="degenerate"):
            normalize(series([5.0, 5.0, 5.0]), "minmax")
        with pytest.raises(DataError, match="degenerate"):
            normalize(series([5.0, 5.0, 5.0]), "zscore")

    def test_zscore_moments(self):
        rng = np.random.default_rng(0)
        out, _ = normalize(series(rng.normal(3, 7, size=500)), "zscore")
        assert abs(out.values.mean()) < 1e-10
        assert abs(out.values.std() - 1.0) < 1e-10

    @pytest.mark.parametrize("kind", ["minmax", "zscore"])
    def test_roundtrip_identity(self, kind):
        rng = np.random.default_rng(42)
        for _ in range(20):
            x = rng.normal(0, rng.uniform(0.1, 100), size=rng.integers(2, 200))
            if x.max() == x.min():
                continue
            out, params = normalize(series(x), kind)
            back = denormalize(out.values, params)
            assert np.max(np.abs(back - x)) <= 1e-12 * max(1.0, np.max(np.abs(x)))

    def test_norm_params_validation(self):
        with pytest.raises(DataError):
            NormParams(kind="minmax", offset=0.0, scale=0.0)
        with pytest.raises(DataError):
            NormParams(kind="other", offset=0.0, scale=1.0)

    def test_apply_norm_matches_normalize(self):
        x = np.array([2.0, 4.0, 6.0])
        out, params = normalize(series(x), "minmax")
        assert np.array_equal(apply_norm(x, params), out.values)


class TestSplitHoldout:
    def test_holdout_48_of_100(self):
        tr, te = split_holdout(series(np.arange(100.0)), 48)
        assert len(tr) == 52 and len(te) == 48

    def test_zero_holdout_rejected(self):
        with pytest.raises(DataError):
            split_holdout(series(np.arange(10.0)), 0)
        with pytest.raises(DataError):
            split_holdout(series(np.arange(10.0)), 10)

    def test_counting(self):
        tr, te = split_holdout(series([0.0, 1.0, 2.0, 3.0, 4.0]), 2)
        assert np.array_equal(tr.values, [0, 1, 2])
        assert np.array_equal(te.values, [3, 4])

    def test_concatenation_reproduces_input(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            x = rng.normal(size=rng.integers(5, 100))
            h = int(rng.integers(1, x.size))
            tr, te = split_holdout(series(x, step=60.0), h)
            assert np.array_equal(np.concatenate([tr.values, te.values]), x)
            assert te.start_time == tr.start_time + len(tr) * 60.0


class TestTimeSeries:
    def test_rejects_empty_and_nonfinite(self):
        with pytest.raises(DataError):
            TimeSeries(np.array([]), 0.0, 1.0, "x")
        with pytest.raises(DataError):
            TimeSeries(np.array([1.0, np.nan]), 0.0, 1.0, "x")
        with pytest.raises(DataError):
            TimeSeries(np.array([1.0]), 0.0, 0.0, "x")

    def test_ingest_normalize_roundtrip_from_file(self, tmp_path):
        rng = np.random.default_rng(3)
        x = rng.uniform(1, 9, size=50)
        rows = [f"{i},{float(v)!r}" for i, v in enumerate(x)]
        ts = load_csv(write_csv(tmp_path / "a.csv", rows), "value")
        out, params = normalize(ts, "minmax")
        back = denormalize(out.values, params)
        assert np.max(np.abs(back - x)) <= 1e-10 * np.max(np.abs(x))
