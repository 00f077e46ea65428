import numpy as np
import pytest

from promine.dataset import CATEGORICAL, NUMERIC, Column, Dataset, SchemaError
from promine.learners import (
    ALGORITHMS,
    ClassifierSpec,
    NaiveBayes,
    make_classifier,
    model_from_json,
    model_to_json,
)
from promine.metrics import auc


def cat_column(name, values) -> Column:
    return Column(name, CATEGORICAL, np.asarray([str(v) for v in values], dtype=object))


def planted_numeric(n=200, seed=0, noise=0.6):
    rng = np.random.default_rng(seed)
    x1 = rng.normal(0, 1, n)
    x2 = rng.normal(0, 1, n)
    y = ((x1 + 0.5 * x2 + rng.normal(0, noise, n)) > 0).astype(int)
    cols = (
        Column("x1", NUMERIC, x1),
        Column("x2", NUMERIC, x2),
        cat_column("grp", rng.integers(0, 3, n)),
    )
    return Dataset(cols, y)


class TestNaiveBayes:
    def test_hand_posterior(self):
        # 8 rows: x=1,y=1 x3; x=0,y=1 x1; x=1,y=0 x1; x=0,y=0 x3
        x = [1, 1, 1, 0, 1, 0, 0, 0]
        y = [1, 1, 1, 1, 0, 0, 0, 0]
        ds = Dataset((cat_column("x", x),), np.asarray(y))
        model = make_classifier(ClassifierSpec("naive_bayes")).fit(ds)
        query = Dataset((cat_column("x", [1]),), np.asarray([0]))
        probs = model.predict_proba(query)
        assert probs[0, 1] == pytest.approx(2 / 3)

    def test_posterior_invariant_under_dataset_duplication(self):
        ds = planted_numeric(n=60, seed=1)
        doubled = ds.take(np.concatenate([np.arange(60), np.arange(60)]))
        a = make_classifier(ClassifierSpec("naive_bayes")).fit(ds).predict_proba(ds)
        b = make_classifier(ClassifierSpec("naive_bayes")).fit(doubled).predict_proba(ds)
        # counts scale but the smoothed ratios shift slightly; Gaussian parts match
        assert np.allclose(a, b, atol=0.02)

    def test_single_class_training_prior_only(self):
        ds = Dataset((cat_column("x", [0, 1, 0]),), np.zeros(3, dtype=int))
        model = make_classifier(ClassifierSpec("naive_bayes")).fit(ds)
        probs = model.predict_proba(ds)
        assert np.allclose(probs, [[1.0, 0.0]] * 3)

    def test_unseen_level_prior_only_contribution(self):
        x = [0, 0, 1, 1]
        y = [0, 0, 1, 1]
        ds = Dataset((cat_column("x", x),), np.asarray(y))
        model = make_classifier(ClassifierSpec("naive_bayes")).fit(ds)
        query = Dataset((cat_column("x", ["9"]),), np.asarray([0]))
        probs = model.predict_proba(query)
        assert probs[0].tolist() == pytest.approx([0.5, 0.5])


class TestAode:
    def test_single_feature_degenerates_to_naive_bayes(self):
        rng = np.random.default_rng(3)
        x = rng.integers(0, 3, 50)
        y = rng.integers(0, 2, 50)
        ds = Dataset((cat_column("x", x),), y)
        nb = make_classifier(ClassifierSpec("naive_bayes")).fit(ds)
        aode = make_classifier(ClassifierSpec("aode")).fit(ds)
        assert np.allclose(nb.predict_proba(ds), aode.predict_proba(ds), atol=1e-12)

    def test_numeric_features_binned_on_the_fly(self):
        ds = planted_numeric(n=120, seed=2)
        model = make_classifier(ClassifierSpec("aode")).fit(ds)
        probs = model.predict_proba(ds)
        assert auc(probs[:, 1], ds.target) > 0.7


class TestLogistic:
    def test_zero_weight_model_is_uninformative(self):
        ds = planted_numeric(n=40, seed=4)
        model = make_classifier(ClassifierSpec("logistic")).fit(ds)
        model.weights_ = np.zeros_like(model.weights_)
        probs = model.predict_proba(ds)
        assert np.allclose(probs, 0.5)

    def test_separable_data_training_accuracy_one(self):
        rng = np.random.default_rng(5)
        x = rng.normal(0, 1, 80)
        y = (x > 0).astype(int)
        ds = Dataset((Column("x", NUMERIC, x),), y)
        model = make_classifier(ClassifierSpec("logistic")).fit(ds)
        assert (model.predict(ds) == y).all()


class TestLinReg:
    def test_probability_is_clipped_fit(self):
        rng = np.random.default_rng(6)
        x = np.linspace(-3, 3, 50)
        y = (x > 0).astype(int)
        ds = Dataset((Column("x", NUMERIC, x),), y)
        model = make_classifier(ClassifierSpec("linreg_classifier")).fit(ds)
        probs = model.predict_proba(ds)
        assert probs.min() >= 0.0 and probs.max() <= 1.0
        assert (np.diff(probs[:, 1]) >= -1e-12).all()  # monotone in x


class TestKnn:
    def test_equidistant_vote_splits_fractionally(self):
        # three training points all at distance 1 from the query, labels 0,0,1
        x = np.array([1.0, 1.0, 1.0])
        grp = ["a", "b", "c"]
        y = np.array([0, 0, 1])
        ds = Dataset((Column("x", NUMERIC, x), cat_column("grp", grp)), y)
        model = make_classifier(ClassifierSpec("knn", params={"k": 3})).fit(ds)
        query = Dataset((Column("x", NUMERIC, np.array([1.0])), cat_column("grp", ["z"])), np.array([0]))
        probs = model.predict_proba(query)
        assert probs[0, 1] == pytest.approx(1 / 3)

    def test_k_larger_than_train_clamped(self):
        ds = planted_numeric(n=5, seed=7)
        model = make_classifier(ClassifierSpec("knn", params={"k": 50})).fit(ds)
        probs = model.predict_proba(ds)
        assert probs.shape == (5, 2)


class TestTree:
    def test_training_accuracy_one_on_consistent_data_when_unbounded(self):
        rng = np.random.default_rng(8)
        n = 60
        x = rng.normal(0, 1, n)
        grp = rng.integers(0, 3, n)
        y = ((x > 0) ^ (grp == 1)).astype(int)
        ds = Dataset((Column("x", NUMERIC, x), cat_column("grp", grp)), y)
        spec = ClassifierSpec("c45_tree", params={"prune": False, "min_instances": 1})
        model = make_classifier(spec).fit(ds)
        assert (model.predict(ds) == y).all()

    def test_pruning_shrinks_or_keeps_tree(self):
        ds = planted_numeric(n=150, seed=9, noise=1.5)

        def count_nodes(node):
            if node.is_leaf:
                return 1
            return 1 + sum(count_nodes(c) for c in node.children)

        grown = make_classifier(ClassifierSpec("c45_tree", params={"prune": False})).fit(ds)
        pruned = make_classifier(ClassifierSpec("c45_tree", params={"prune": True})).fit(ds)
        assert count_nodes(pruned.root_) <= count_nodes(grown.root_)


class TestForest:
    def test_forest_not_worse_than_single_tree_on_holdout(self):
        train = planted_numeric(n=250, seed=10)
        test = planted_numeric(n=250, seed=11)
        tree = make_classifier(ClassifierSpec("c45_tree", seed=1)).fit(train)
        forest = make_classifier(ClassifierSpec("random_forest", seed=1)).fit(train)
        tree_auc = auc(tree.predict_proba(test)[:, 1], test.target)
        forest_auc = auc(forest.predict_proba(test)[:, 1], test.target)
        assert forest_auc >= tree_auc - 0.02

    def test_same_seed_restores_identity(self):
        ds = planted_numeric(n=100, seed=12)
        a = make_classifier(ClassifierSpec("random_forest", seed=3)).fit(ds)
        b = make_classifier(ClassifierSpec("random_forest", seed=3)).fit(ds)
        assert np.array_equal(a.predict_proba(ds), b.predict_proba(ds))


ORDER_INVARIANT = ["naive_bayes", "aode", "logistic", "linreg_classifier", "knn", "c45_tree"]


@pytest.mark.parametrize("algorithm", ORDER_INVARIANT)
def test_training_row_order_is_irrelevant(algorithm):
    ds = planted_numeric(n=90, seed=13)
    rng = np.random.default_rng(0)
    perm = rng.permutation(ds.n_rows)
    base = make_classifier(ClassifierSpec(algorithm, seed=5)).fit(ds)
    shuffled = make_classifier(ClassifierSpec(algorithm, seed=5)).fit(ds.take(perm))
    assert np.allclose(base.predict_proba(ds), shuffled.predict_proba(ds), atol=1e-9)


@pytest.mark.parametrize("algorithm", ["mlp", "random_forest"])
def test_seeded_learners_reproducible(algorithm):
    ds = planted_numeric(n=80, seed=14)
    a = make_classifier(ClassifierSpec(algorithm, seed=21)).fit(ds)
    b = make_classifier(ClassifierSpec(algorithm, seed=21)).fit(ds)
    assert np.array_equal(a.predict_proba(ds), b.predict_proba(ds))


@pytest.mark.parametrize("algorithm", sorted(set(ALGORITHMS) - {"ensemble", "vote"}))
def test_serialization_round_trip(algorithm):
    ds = planted_numeric(n=70, seed=15)
    params = {"epochs": 50} if algorithm == "mlp" else {}
    if algorithm == "random_forest":
        params = {"n_trees": 5}
    model = make_classifier(ClassifierSpec(algorithm, params=params, seed=2)).fit(ds)
    restored = model_from_json(model_to_json(model))
    assert np.allclose(model.predict_proba(ds), restored.predict_proba(ds), atol=1e-12)


def test_schema_mismatch_rejected():
    ds = planted_numeric(n=30, seed=16)
    model = make_classifier(ClassifierSpec("naive_bayes")).fit(ds)
    other = Dataset((Column("zzz", NUMERIC, np.zeros(3)),), np.array([0, 1, 0]))
    with pytest.raises(SchemaError):
        model.predict_proba(other)


def test_out_of_scope_algorithms_error():
    for name in ("hnb", "lbr", "bayes_net_k2", "bayes_net_tan"):
        with pytest.raises(NotImplementedError, match="out of scope"):
            make_classifier(ClassifierSpec(name))


def test_unknown_algorithm_lists_valid_names():
    with pytest.raises(ValueError, match="naive_bayes"):
        make_classifier(ClassifierSpec("gradient_boost"))


def test_spec_round_trip():
    spec = ClassifierSpec("knn", params={"k": 7}, seed=9)
    assert ClassifierSpec.from_dict(spec.to_dict()) == spec


def test_probability_tie_breaks_negative_and_logs(caplog):
    ds = planted_numeric(n=40, seed=17)
    model = make_classifier(ClassifierSpec("logistic")).fit(ds)
    model.weights_ = np.zeros_like(model.weights_)
    with caplog.at_level("INFO"):
        preds = model.predict(ds)
    assert (preds == 0).all()
    assert any("tie" in r.message for r in caplog.records)
