import math

import numpy as np
import pytest

from promine.dataset import CATEGORICAL, NUMERIC, Column, Dataset
from promine.featsel import (
    FeatureSelectionError,
    chi2_rank,
    dichotomize,
    make_selector,
    nb_wrapper_select,
    odds_ratio,
    odds_ratio_report_text,
    odds_ratio_table,
    relief_f,
    selection_trace_csv,
)


def discrete_dataset(columns: dict, labels) -> Dataset:
    cols = tuple(
        Column(name, CATEGORICAL, np.asarray([str(v) for v in values], dtype=object))
        for name, values in columns.items()
    )
    return Dataset(cols, np.asarray(labels, dtype=int))


class TestChi2Rank:
    def test_feature_identical_to_target_scores_n(self):
        labels = [0, 1] * 20
        ds = discrete_dataset({"copy": labels, "noise": [0, 0, 1, 1] * 10}, labels)
        scores = {s.feature: s.score for s in chi2_rank(ds)}
        assert scores["copy"] == pytest.approx(len(labels))
        ranked = chi2_rank(ds)
        assert ranked[0].feature == "copy" and ranked[0].rank == 1

    def test_hand_contingency_arithmetic(self):
        # 2x2 table a,b,c,d = 30,10,10,30: every cell deviates 10 from E=20,
        # so chi2 = 4 * 10^2 / 20 = 20
        feature = [1] * 40 + [0] * 40
        target = [1] * 30 + [0] * 10 + [1] * 10 + [0] * 30
        ds = discrete_dataset({"f": feature}, target)
        score = chi2_rank(ds)[0].score
        # explicit oracle: sum (O-E)^2 / E over the 4 cells
        table = np.array([[30.0, 10.0], [10.0, 30.0]])
        expected = table.sum(1, keepdims=True) @ table.sum(0, keepdims=True) / table.sum()
        assert score == pytest.approx(((table - expected) ** 2 / expected).sum())
        assert score == pytest.approx(20.0)

    def test_single_level_feature_scores_zero(self):
        labels = [0, 1] * 5
        ds = discrete_dataset({"const": ["x"] * 10}, labels)
        assert chi2_rank(ds)[0].score == 0.0

    def test_independent_feature_rarely_significant(self):
        from promine.special import chi2_sf

        rng = np.random.default_rng(0)
        significant = 0
        trials = 40
        for _ in range(trials):
            labels = rng.integers(0, 2, 10_000)
            feature = rng.integers(0, 3, 10_000)
            ds = discrete_dataset({"f": feature}, labels)
            score = chi2_rank(ds)[0].score
            if chi2_sf(score, 2) < 0.05:
                significant += 1
        assert significant <= trials * 0.1

    def test_numeric_feature_rejected(self):
        ds = Dataset((Column("x", NUMERIC, np.arange(4.0)),), np.array([0, 1, 0, 1]))
        with pytest.raises(FeatureSelectionError, match="discrete"):
            chi2_rank(ds)

    def test_invariant_under_category_relabeling(self):
        rng = np.random.default_rng(5)
        labels = rng.integers(0, 2, 200)
        raw = rng.integers(0, 4, 200)
        ds1 = discrete_dataset({"f": raw}, labels)
        relabel = {0: "d", 1: "c", 2: "b", 3: "a"}
        ds2 = discrete_dataset({"f": [relabel[v] for v in raw]}, labels)
        assert chi2_rank(ds1)[0].score == pytest.approx(chi2_rank(ds2)[0].score)


class TestReliefF:
    def _separable(self, n=60, seed=2):
        rng = np.random.default_rng(seed)
        labels = np.array([0, 1] * (n // 2))
        informative = labels * 1.0
        noise = rng.random(n)
        cols = (
            Column("signal", NUMERIC, informative),
            Column("noise", NUMERIC, noise),
            Column("signal_twin", NUMERIC, informative.copy()),
        )
        return Dataset(cols, labels)

    def test_feature_equal_to_target_weight_near_one(self):
        ds = self._separable()
        weights = {s.feature: s.score for s in relief_f(ds, k=5)}
        assert weights["signal"] > 0.9

    def test_pure_noise_weight_near_zero(self):
        rng = np.random.default_rng(0)
        deviations = []
        for seed in range(8):
            n = 300
            labels = np.array([0, 1] * (n // 2))
            cols = (
                Column("signal", NUMERIC, labels + rng.normal(0, 0.2, n)),
                Column("noise", NUMERIC, rng.random(n)),
            )
            ds = Dataset(cols, labels)
            weights = {s.feature: s.score for s in relief_f(ds, k=10)}
            deviations.append(abs(weights["noise"]))
        assert np.mean(deviations) < 0.05

    def test_duplicated_feature_identical_weight(self):
        ds = self._separable()
        weights = {s.feature: s.score for s in relief_f(ds, k=5)}
        assert weights["signal"] == pytest.approx(weights["signal_twin"])

    def test_k_clamped_with_warning(self, caplog):
        labels = np.array([0, 0, 0, 0, 0, 0, 1, 1])
        cols = (Column("x", NUMERIC, np.arange(8.0)),)
        ds = Dataset(cols, labels)
        with caplog.at_level("WARNING"):
            relief_f(ds, k=10)
        assert any("clamped" in r.message for r in caplog.records)

    def test_relabeling_invariance_for_categorical(self):
        rng = np.random.default_rng(9)
        labels = rng.integers(0, 2, 80)
        raw = rng.integers(0, 3, 80)
        ds1 = discrete_dataset({"f": raw, "g": rng.integers(0, 2, 80)}, labels)
        relabel = {0: "z", 1: "y", 2: "x"}
        ds2 = discrete_dataset(
            {"f": [relabel[v] for v in raw], "g": ds1.column("g").values}, labels
        )
        w1 = {s.feature: s.score for s in relief_f(ds1, k=4)}
        w2 = {s.feature: s.score for s in relief_f(ds2, k=4)}
        assert w1["f"] == pytest.approx(w2["f"])


class TestWrapper:
    def _with_perfect_feature(self, n=80, seed=4):
        rng = np.random.default_rng(seed)
        labels = np.array([0, 1] * (n // 2))
        cols = (
            Column("noise1", CATEGORICAL, np.asarray(rng.integers(0, 2, n).astype(str), dtype=object)),
            Column("perfect", CATEGORICAL, np.asarray(labels.astype(str), dtype=object)),
            Column("noise2", CATEGORICAL, np.asarray(rng.integers(0, 3, n).astype(str), dtype=object)),
        )
        return Dataset(cols, labels)

    def test_perfect_feature_selected_first_auc_reaches_one(self):
        result = nb_wrapper_select(self._with_perfect_feature(), seed=1)
        assert result.selected[0] == "perfect"
        assert result.trace[0].auc == pytest.approx(1.0)

    def test_redundant_copy_not_selected_twice(self):
        n = 100
        rng = np.random.default_rng(7)
        signal = rng.integers(0, 2, n)
        labels = (signal ^ (rng.random(n) < 0.1)).astype(int)  # noisy copy of signal
        cols = (
            Column("sig_a", CATEGORICAL, np.asarray(signal.astype(str), dtype=object)),
            Column("sig_b", CATEGORICAL, np.asarray(signal.astype(str), dtype=object)),
            Column("other", CATEGORICAL, np.asarray(rng.integers(0, 2, n).astype(str), dtype=object)),
        )
        ds = Dataset(cols, labels)
        result = nb_wrapper_select(ds, seed=3)
        assert sum(1 for f in result.selected if f.startswith("sig_")) == 1

    def test_all_noise_stays_at_chance(self):
        # Chance improvements above epsilon let a couple of noise features
        # chain in, but the achieved inner AUC never leaves chance level.
        rng = np.random.default_rng(0)
        sizes = []
        for seed in range(20):
            n = 1000
            labels = rng.integers(0, 2, n)
            cols = tuple(
                Column(f"n{i}", CATEGORICAL, np.asarray(rng.integers(0, 2, n).astype(str), dtype=object))
                for i in range(4)
            )
            ds = Dataset(cols, labels.astype(int))
            result = nb_wrapper_select(ds, seed=seed)
            final_auc = result.trace[-1].auc if result.trace else 0.5
            assert final_auc <= 0.55
            sizes.append(len(result.selected))
        assert np.median(sizes) <= 2

    def test_deterministic_given_seed(self):
        ds = self._with_perfect_feature()
        a = nb_wrapper_select(ds, seed=11)
        b = nb_wrapper_select(ds, seed=11)
        assert a == b

    def test_degenerate_target_rejected(self):
        cols = (Column("x", CATEGORICAL, np.asarray(["a", "b"] * 5, dtype=object)),)
        ds = Dataset(cols, np.zeros(10, dtype=int))
        with pytest.raises(FeatureSelectionError):
            nb_wrapper_select(ds)


class TestOddsRatio:
    @staticmethod
    def _arrays(a, b, c, d):
        feature = np.array([1] * (a + b) + [0] * (c + d))
        target = np.array([1] * a + [0] * b + [1] * c + [0] * d)
        return feature, target

    def test_hand_derived_wald_interval(self):
        feature, target = self._arrays(30, 10, 10, 30)
        report = odds_ratio(feature, target)
        assert report.odds_ratio == pytest.approx(9.0)
        assert report.se_log_or == pytest.approx(math.sqrt(1 / 30 + 1 / 10 + 1 / 10 + 1 / 30))
        assert report.ci_low == pytest.approx(3.27, rel=0.01)
        assert report.ci_high == pytest.approx(24.8, rel=0.01)

    def test_independence(self):
        feature, target = self._arrays(10, 10, 10, 10)
        assert odds_ratio(feature, target).odds_ratio == pytest.approx(1.0)

    def test_haldane_correction(self):
        feature, target = self._arrays(10, 0, 5, 5)
        report = odds_ratio(feature, target)
        assert report.corrected
        assert report.odds_ratio == pytest.approx((10.5 * 5.5) / (0.5 * 5.5))

    def test_reciprocal_complement_identity_exact(self):
        rng = np.random.default_rng(2)
        for _ in range(25):
            feature = rng.integers(0, 2, 60)
            target = rng.integers(0, 2, 60)
            if min(feature.min(), target.min()) == max(feature.max(), target.max()):
                continue
            if feature.min() == feature.max() or target.min() == target.max():
                continue
            direct = odds_ratio(feature, target)
            flipped = odds_ratio(1 - feature, target)
            assert direct.odds_ratio * flipped.odds_ratio == pytest.approx(1.0, rel=1e-12)

    def test_swapping_target_inverts_or_and_negates_log_interval(self):
        feature, target = self._arrays(28, 12, 9, 31)
        direct = odds_ratio(feature, target)
        swapped = odds_ratio(feature, 1 - target)
        assert swapped.odds_ratio == pytest.approx(1.0 / direct.odds_ratio, rel=1e-12)
        assert math.log(swapped.ci_low) == pytest.approx(-math.log(direct.ci_high), rel=1e-9)
        assert math.log(swapped.ci_high) == pytest.approx(-math.log(direct.ci_low), rel=1e-9)

    def test_constant_inputs_rejected(self):
        with pytest.raises(FeatureSelectionError):
            odds_ratio(np.ones(10, dtype=int), np.array([0, 1] * 5))
        with pytest.raises(FeatureSelectionError):
            odds_ratio(np.array([0, 1] * 5), np.ones(10, dtype=int))

    def test_dichotomize_median_split(self):
        values = np.array([1.0, 2.0, 3.0, 4.0])
        assert dichotomize(values).tolist() == [0, 0, 1, 1]

    def test_table_and_text_render(self):
        rng = np.random.default_rng(4)
        n = 200
        labels = rng.integers(0, 2, n)
        cols = (
            Column("score", NUMERIC, labels + rng.normal(0, 0.8, n)),
            Column("grp", CATEGORICAL, np.asarray(rng.choice(["a", "b", "c"], n), dtype=object)),
        )
        ds = Dataset(cols, labels)
        reports = odds_ratio_table(ds)
        assert {r.feature for r in reports} == {"score", "grp"}
        text = odds_ratio_report_text(reports)
        assert "Odds Ratio" in text and "score" in text


def test_out_of_scope_selector_errors():
    with pytest.raises(NotImplementedError, match="out of scope"):
        make_selector("consistency_bfs")


def test_selection_trace_csv_shape():
    ds_labels = [0, 1] * 30
    ds = discrete_dataset({"perfect": ds_labels, "noise": [0, 1, 1, 0] * 15}, ds_labels)
    result = nb_wrapper_select(ds, seed=2)
    text = selection_trace_csv({0: result})
    assert text.splitlines()[0] == "fold,step,feature,inner_auc"
    assert ",perfect," in text
