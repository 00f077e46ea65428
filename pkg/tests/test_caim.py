import numpy as np
import pytest

from oracles import caim_greedy_reference, caim_value
from promine.preprocess import ConstantColumnError, caim_discretize


class TestHandExamples:
    def test_two_blocks_single_cut(self):
        values = [1, 2, 3, 4, 5, 6]
        labels = ["A", "A", "A", "B", "B", "B"]
        result = caim_discretize(values, labels)
        assert result.cuts == (3.5,)
        assert result.criterion == pytest.approx(3.0)
        # one interval scores 1.5, the accepted cut doubles it
        assert caim_value([], values, labels) == pytest.approx(1.5)
        assert caim_value([3.5], values, labels) == pytest.approx(3.0)

    def test_interleaved_classes_still_enough_intervals(self):
        values = [1, 2, 3, 4]
        labels = ["A", "B", "A", "B"]
        result = caim_discretize(values, labels)
        assert len(result.cuts) + 1 >= 2
        ref_cuts, ref_value = caim_greedy_reference(values, labels)
        assert result.cuts == ref_cuts
        assert result.criterion == pytest.approx(ref_value)

    def test_two_value_column_recovers_separating_cut(self):
        values = [0, 0, 0, 1, 1, 1]
        labels = ["A", "A", "A", "B", "B", "B"]
        assert caim_discretize(values, labels).cuts == (0.5,)

    def test_constant_column_rejected(self):
        with pytest.raises(ConstantColumnError):
            caim_discretize([2, 2, 2], ["A", "B", "A"])

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            caim_discretize([1, 2, 3], ["A", "A", "A"])


def _random_corpus(n_datasets=250, seed=0):
    rng = np.random.default_rng(seed)
    corpus = []
    while len(corpus) < n_datasets:
        n = int(rng.integers(4, 13))
        n_classes = int(rng.integers(2, 4))
        values = rng.integers(0, rng.integers(2, 8), size=n).astype(float)
        if rng.random() < 0.5:
            values = values + rng.normal(0, 0.01, size=n).round(3)
        labels = [chr(65 + c) for c in rng.integers(0, n_classes, size=n)]
        if len(set(values)) < 2 or len(set(labels)) < 2:
            continue
        from oracles import caim_candidate_cuts

        n_candidates = len(caim_candidate_cuts(values.tolist(), labels))
        if not 1 <= n_candidates <= 8:
            continue
        corpus.append((values.tolist(), labels))
    return corpus


class TestOracleEquivalence:
    def test_matches_brute_force_greedy_on_corpus(self):
        for values, labels in _random_corpus():
            ref_cuts, ref_value = caim_greedy_reference(values, labels)
            result = caim_discretize(values, labels)
            assert result.cuts == pytest.approx(ref_cuts), (values, labels)
            assert result.criterion == pytest.approx(ref_value), (values, labels)

    def test_interval_count_at_least_class_count(self):
        from oracles import caim_candidate_cuts

        for values, labels in _random_corpus(seed=7):
            n_classes = len(set(labels))
            result = caim_discretize(values, labels)
            attainable = min(n_classes, len(caim_candidate_cuts(values, labels)) + 1)
            assert len(result.cuts) + 1 >= attainable

    def test_criterion_nondecreasing_over_unforced_steps(self):
        from oracles import caim_greedy_trajectory

        rng = np.random.default_rng(3)
        checked = 0
        while checked < 40:
            n = int(rng.integers(6, 13))
            values = rng.integers(0, 6, size=n).astype(float).tolist()
            labels = [chr(65 + c) for c in rng.integers(0, 2, size=n)]
            if len(set(values)) < 2 or len(set(labels)) < 2:
                continue
            cuts, value, steps = caim_greedy_trajectory(values, labels)
            assert caim_discretize(values, labels).cuts == pytest.approx(cuts)
            previous = caim_value([], values, labels)
            for after, forced in steps:
                if not forced:
                    assert after > previous
                previous = after
            checked += 1
