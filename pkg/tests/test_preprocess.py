import json

import numpy as np
import pytest

from promine.dataset import BINNED, CATEGORICAL, NUMERIC, Column, Dataset
from promine.preprocess import (
    BinaryTarget,
    ConstantColumnError,
    FittedPipeline,
    apply_cuts,
    binarize_target,
    caim_discretize,
    fit_pipeline,
    variance_filter,
    zscore_apply,
    zscore_fit,
    zscore_fit_apply,
)


class TestZScore:
    def test_fit_apply_identity(self):
        out, (mean, sd) = zscore_fit_apply(np.array([1.0, 2.0, 3.0]), np.array([1.0, 2.0, 3.0]))
        assert out.tolist() == [-1.0, 0.0, 1.0]
        assert (mean, sd) == (2.0, 1.0)

    def test_apply_uses_train_statistics(self):
        out, _ = zscore_fit_apply(np.array([1.0, 2.0, 3.0]), np.array([4.0]))
        assert out.tolist() == [2.0]

    def test_constant_column_flagged(self):
        with pytest.raises(ConstantColumnError):
            zscore_fit(np.array([5.0, 5.0, 5.0]))

    def test_affine_reexpression_of_raw_column_is_transparent(self):
        rng = np.random.default_rng(0)
        train = rng.normal(10, 3, 50)
        test = rng.normal(10, 3, 20)
        base, stats = zscore_fit_apply(train, test)
        for a, b in [(2.5, -7.0), (0.1, 3.0)]:
            scaled, _ = zscore_fit_apply(a * train + b, a * test + b)
            assert np.allclose(scaled, base, atol=1e-10)

    def test_apply_never_consults_apply_side_data(self):
        mean, sd = zscore_fit(np.array([1.0, 2.0, 3.0]))
        poisoned = np.array([1e9, -1e9, 42.0])
        out = zscore_apply(poisoned, mean, sd)
        assert out.tolist() == [(1e9 - 2.0), (-1e9 - 2.0), 40.0]


class TestBinarizeTarget:
    def test_mean_split(self):
        target, labels = binarize_target([2.0, 4.0, 9.0])
        assert target.threshold == pytest.approx(5.0)
        assert labels.tolist() == [0, 0, 1]

    def test_all_equal_degenerate(self, caplog):
        target, labels = binarize_target([3.0, 3.0, 3.0])
        assert labels.tolist() == [0, 0, 0]
        assert target.degenerate

    def test_symmetric(self):
        target, labels = binarize_target([-10.0, 10.0])
        assert target.threshold == 0.0
        assert labels.tolist() == [0, 1]

    def test_threshold_recorded_for_audit(self):
        target, _ = binarize_target([1.0, 2.0, 3.0, 10.0])
        assert isinstance(target, BinaryTarget)
        assert target.threshold == pytest.approx(4.0)


class TestVarianceFilter:
    def _dataset(self):
        cols = (
            Column("steady", NUMERIC, np.array([1.0, 1.0, 1.0])),
            Column("varies", NUMERIC, np.array([1.0, 2.0, 3.0])),
            Column("flag", CATEGORICAL, np.array(["1", "1", "1"], dtype=object)),
        )
        return Dataset(cols, np.array([0, 1, 0]))

    def test_removes_constants_and_logs_names(self):
        filtered, removed = variance_filter(self._dataset())
        assert removed == ["steady", "flag"]
        assert filtered.feature_names == ("varies",)

    def test_identity_when_nothing_constant(self):
        cols = (Column("a", NUMERIC, np.array([1.0, 2.0, 3.0])),)
        ds = Dataset(cols, np.array([0, 1, 0]))
        filtered, removed = variance_filter(ds)
        assert removed == [] and filtered.feature_names == ("a",)

    def test_column_constant_in_train_dropped_from_apply_side(self):
        train = self._dataset()
        labels = train.target
        pipeline = fit_pipeline(train, labels, "bin_target", target_threshold=0.0)
        test_cols = (
            Column("steady", NUMERIC, np.array([9.0, 8.0])),  # varies at apply time
            Column("varies", NUMERIC, np.array([1.0, 2.0])),
            Column("flag", CATEGORICAL, np.array(["0", "1"], dtype=object)),
        )
        test = Dataset(test_cols, np.array([0, 1]))
        out = pipeline.apply(test)
        assert out.feature_names == ("varies",)


class TestApplyCuts:
    def test_value_equal_to_cut_falls_low(self):
        cuts = (3.5, 7.0)
        values = np.array([3.5, 3.6, 7.0, 7.1, 0.0])
        assert apply_cuts(values, cuts).tolist() == [0, 1, 1, 2, 0]


class TestPipeline:
    def _raw(self):
        rng = np.random.default_rng(1)
        x = rng.normal(0, 1, 40)
        labels = (x > 0).astype(int)
        cols = (
            Column("num", NUMERIC, x * 3.0 + 2.0),
            Column("cat", CATEGORICAL, np.array(["a", "b"] * 20, dtype=object)),
        )
        return Dataset(cols, labels), labels

    def test_caim_mode_bins_numeric(self):
        ds, labels = self._raw()
        pipeline = fit_pipeline(ds, labels, "caim", target_threshold=1.5)
        out = pipeline.apply(ds)
        assert out.column("num").kind == BINNED
        assert out.column("cat").kind == CATEGORICAL

    def test_bin_target_mode_keeps_numeric(self):
        ds, labels = self._raw()
        pipeline = fit_pipeline(ds, labels, "bin_target", target_threshold=1.5)
        out = pipeline.apply(ds)
        assert out.column("num").kind == NUMERIC
        z = out.column("num").values
        assert abs(z.mean()) < 1e-12 and z.std(ddof=1) == pytest.approx(1.0)

    def test_json_round_trip_bit_exact(self):
        ds, labels = self._raw()
        pipeline = fit_pipeline(ds, labels, "caim", target_threshold=1.2345678901234567)
        text = pipeline.to_json()
        restored = FittedPipeline.from_json(text)
        assert restored == pipeline
        assert restored.to_json() == text
        a = pipeline.apply(ds)
        b = restored.apply(ds)
        assert np.array_equal(a.column("num").values, b.column("num").values)

    def test_unknown_mode_rejected(self):
        ds, labels = self._raw()
        with pytest.raises(ValueError, match="binning"):
            fit_pipeline(ds, labels, "equal_width", target_threshold=0.0)
