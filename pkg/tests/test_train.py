"""Optimizer, metrics, training loop, and k-fold machinery."""

import numpy as np
import pytest

from stancegraph.gnn import GnnConfig, init_params
from stancegraph.metrics import compute_metrics, metrics_from_confusion
from stancegraph.train import (
    TrainConfig,
    adam_step,
    evaluate,
    fit,
    fold_plan,
    init_adam_state,
    kfold,
    predict,
    split_indices,
)

from helpers import random_news_graph


def tiny_gnn_config(**kwargs):
    defaults = dict(layers=1, hidden=6, classes=2, dropout=0.0)
    defaults.update(kwargs)
    return GnnConfig(**defaults)


def make_labeled_graphs(rng, n, d_text=5, d_e=4):
    return [
        random_news_graph(rng, s=int(rng.integers(1, 4)), n_ent=int(rng.integers(1, 3)),
                          d_text=d_text, d_e=d_e, doc_id=f"g{i}", label=i % 2)
        for i in range(n)
    ]


class TestAdamStep:
    def test_zero_gradient_leaves_params_fixed(self):
        config = tiny_gnn_config()
        params = init_params(config, 5, 4, seed=0)
        before = {name: arr.copy() for name, arr in params.named_arrays()}
        grads = params.zeros_like()
        state = init_adam_state(params)
        for _ in range(3):
            adam_step(params, grads, state, TrainConfig())
        for name, arr in params.named_arrays():
            np.testing.assert_array_equal(arr, before[name], err_msg=name)

    def test_first_step_hand_value(self):
        # w = 0, g = 1: bias-corrected m-hat = v-hat = 1, step = -lr / (1 + eps)
        config = tiny_gnn_config()
        params = init_params(config, 5, 4, seed=0)
        for _, arr in params.named_arrays():
            arr[...] = 0.0
        grads = params.zeros_like()
        grads.w_out[0, 0] = 1.0
        state = init_adam_state(params)
        adam_step(params, grads, state, TrainConfig(learning_rate=0.001))
        assert params.w_out[0, 0] == pytest.approx(-0.001, rel=1e-6)
        params.w_out[0, 0] = 0.0
        for name, arr in params.named_arrays():
            np.testing.assert_array_equal(arr, 0.0, err_msg=name)

    def test_shape_mismatch_rejected(self):
        config = tiny_gnn_config()
        params = init_params(config, 5, 4, seed=0)
        grads = params.zeros_like()
        state = init_adam_state(params)
        state.m["w_out"] = np.zeros((1, 1))
        with pytest.raises(ValueError, match="shape mismatch"):
            adam_step(params, grads, state, TrainConfig())


class TestFit:
    def test_zero_learning_rate_keeps_params(self):
        rng = np.random.default_rng(0)
        graphs = make_labeled_graphs(rng, 6)
        config = tiny_gnn_config()
        params, _ = fit(graphs, TrainConfig(learning_rate=0.0, max_epochs=3, seed=1), config)
        fresh = init_params(config, 5, 4, seed=1)
        for (name, a), (_, b) in zip(params.named_arrays(), fresh.named_arrays()):
            np.testing.assert_array_equal(a, b, err_msg=name)

    def test_bitwise_reproducible(self):
        rng = np.random.default_rng(1)
        graphs = make_labeled_graphs(rng, 8)
        config = tiny_gnn_config(dropout=0.3)
        tc = TrainConfig(max_epochs=4, batch_size=3, seed=7)
        a, curve_a = fit(graphs, tc, config)
        b, curve_b = fit(graphs, tc, config)
        assert curve_a == curve_b
        for (name, x), (_, y) in zip(a.named_arrays(), b.named_arrays()):
            np.testing.assert_array_equal(x, y, err_msg=name)

    def test_memorizes_single_graph(self):
        rng = np.random.default_rng(2)
        graphs = make_labeled_graphs(rng, 1)
        config = tiny_gnn_config(hidden=8)
        tc = TrainConfig(max_epochs=400, lam=0.0, learning_rate=0.01, seed=0)
        _, curve = fit(graphs, tc, config)
        assert curve[-1] < 0.01

    def test_unlabeled_graph_rejected(self):
        rng = np.random.default_rng(3)
        graphs = make_labeled_graphs(rng, 2)
        graphs[1].label = None
        with pytest.raises(ValueError, match="no label"):
            fit(graphs, TrainConfig(max_epochs=1), tiny_gnn_config())

    def test_loss_curve_length(self):
        rng = np.random.default_rng(4)
        graphs = make_labeled_graphs(rng, 4)
        _, curve = fit(graphs, TrainConfig(max_epochs=5), tiny_gnn_config())
        assert len(curve) == 5


class TestMetrics:
    def test_perfect_predictions(self):
        m = compute_metrics([0, 1, 0, 1], [0, 1, 0, 1], 2)
        assert m.accuracy == 1.0
        assert m.macro_f1 == 1.0

    def test_hand_confusion_case(self):
        # actual (0,0,1), predicted (0,1,1)
        m = compute_metrics([0, 0, 1], [0, 1, 1], 2)
        assert m.accuracy == 2 / 3
        assert m.f1[0] == 2 / 3
        assert m.f1[1] == 2 / 3
        assert m.macro_f1 == 2 / 3

    def test_constant_predictor_on_balanced_data(self):
        y_true = [0, 1] * 10
        y_pred = [0] * 20
        m = compute_metrics(y_true, y_pred, 2)
        assert m.accuracy == 0.5
        assert m.f1[0] == 2 / 3
        assert m.f1[1] == 0.0
        assert m.macro_f1 == 1 / 3

    def test_identities_from_confusion(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            n_classes = int(rng.integers(2, 5))
            y_true = rng.integers(0, n_classes, size=50)
            y_pred = rng.integers(0, n_classes, size=50)
            m = compute_metrics(y_true, y_pred, n_classes)
            cm = m.confusion
            assert m.accuracy == np.trace(cm) / cm.sum()
            np.testing.assert_array_equal(cm.sum(axis=1), m.support)
            assert m.macro_f1 == pytest.approx(m.f1.mean())

    def test_matches_sklearn(self):
        from sklearn.metrics import accuracy_score, f1_score, precision_score, recall_score

        rng = np.random.default_rng(6)
        for _ in range(10):
            n_classes = int(rng.integers(2, 5))
            y_true = rng.integers(0, n_classes, size=40)
            y_pred = rng.integers(0, n_classes, size=40)
            m = compute_metrics(y_true, y_pred, n_classes)
            assert m.accuracy == pytest.approx(accuracy_score(y_true, y_pred))
            assert m.macro_f1 == pytest.approx(
                f1_score(y_true, y_pred, average="macro", zero_division=0)
            )
            np.testing.assert_allclose(
                m.precision,
                precision_score(y_true, y_pred, average=None, zero_division=0,
                                labels=range(n_classes)),
            )
            np.testing.assert_allclose(
                m.recall,
                recall_score(y_true, y_pred, average=None, zero_division=0,
                             labels=range(n_classes)),
            )

    def test_zero_prediction_and_actual_class_contributes_zero(self):
        # class 2 never appears: F1 contribution 0, macro over all 3 classes
        m = compute_metrics([0, 1, 0, 1], [0, 1, 0, 1], 3)
        assert m.f1[2] == 0.0
        assert m.macro_f1 == pytest.approx(2 / 3)

    def test_evaluate_constant_predictor_integration(self):
        rng = np.random.default_rng(7)
        graphs = make_labeled_graphs(rng, 10)  # labels alternate, balanced
        config = tiny_gnn_config()
        params = init_params(config, 5, 4, seed=0)
        for _, arr in params.named_arrays():
            arr[...] = 0.0  # logits all zero -> argmax class 0 everywhere
        preds = predict(params, graphs, config)
        np.testing.assert_array_equal(preds, 0)
        m = evaluate(params, graphs, config)
        assert m.accuracy == 0.5
        assert m.macro_f1 == 1 / 3


class TestFoldPlan:
    def test_semeval_sized_folds(self):
        plan = fold_plan(645, 10, seed=0)
        sizes = sorted(len(f) for f in plan)
        assert sizes == [64] * 5 + [65] * 5

    def test_partition_exact(self):
        plan = fold_plan(37, 5, seed=3)
        combined = np.sort(np.concatenate(plan))
        np.testing.assert_array_equal(combined, np.arange(37))

    def test_leave_one_out_boundary(self):
        plan = fold_plan(6, 6, seed=0)
        assert all(len(f) == 1 for f in plan)

    def test_deterministic(self):
        a = fold_plan(50, 7, seed=11)
        b = fold_plan(50, 7, seed=11)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)

    def test_k_larger_than_corpus_rejected(self):
        with pytest.raises(ValueError, match="exceeds corpus size"):
            fold_plan(3, 5, seed=0)

    def test_k_below_two_rejected(self):
        with pytest.raises(ValueError, match="k must be"):
            fold_plan(10, 1, seed=0)


class TestKfold:
    def test_end_to_end_tiny(self):
        rng = np.random.default_rng(8)
        graphs = make_labeled_graphs(rng, 8)
        result = kfold(graphs, k=2, seed=0,
                       config=TrainConfig(max_epochs=2), gnn_config=tiny_gnn_config())
        assert len(result.folds) == 2
        assert 0.0 <= result.mean_accuracy <= 1.0
        assert result.std_accuracy >= 0.0
        d = result.to_dict()
        assert set(d) == {
            "folds", "mean_accuracy", "std_accuracy", "mean_macro_f1", "std_macro_f1",
        }


class TestSplitIndices:
    def test_stratified_split_balances_classes(self):
        labels = [0] * 60 + [1] * 40
        train, test = split_indices(100, 0.2, seed=0, labels=labels)
        assert len(test) == 20
        labels = np.array(labels)
        assert labels[test].sum() == 8  # 20% of each class
        assert len(np.intersect1d(train, test)) == 0

    def test_grouped_split_keeps_groups_together(self):
        groups = [i // 2 for i in range(40)]
        train, test = split_indices(40, 0.25, seed=1, groups=groups)
        test_set = set(test.tolist())
        for i in range(0, 40, 2):
            assert (i in test_set) == (i + 1 in test_set)
        assert len(test) == 10

    def test_bad_fraction(self):
        with pytest.raises(ValueError, match="eval_fraction"):
            split_indices(10, 0.0, seed=0)
