import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from intentbench.dataset import CLASS_ORDER
from intentbench.errors import ConfigError, DimMismatch, FoldTooSmall, SingleClass, ZeroCount
from intentbench.svm import (GridSearchSpec, SvmHyperparams, SvmModel, class_weights_balanced, grid_search,
                             stratified_folds, svm_fit, svm_predict)

from conftest import blobs

C, S, D = CLASS_ORDER


class TestWeights:
    def test_production_counts(self):
        assert class_weights_balanced([500, 26, 140]) == pytest.approx([0.444, 8.538, 1.586], abs=1e-3)

    def test_uniform(self):
        assert class_weights_balanced([10, 10, 10]) == [1.0, 1.0, 1.0]

    def test_skewed(self):
        assert class_weights_balanced([1, 1, 998]) == pytest.approx([333.33, 333.33, 0.334], abs=0.01)

    def test_zero(self):
        with pytest.raises(ZeroCount):
            class_weights_balanced([3, 0, 2])


def test_two_point_max_margin():
    model = svm_fit((np.array([[-1.0], [1.0]]), [C, S]), SvmHyperparams(10.0))
    # the Services-vs-rest problem is the plain two-point problem
    w, b = model.W[S.index, 0], model.b[S.index]
    assert np.sign(w * -1 + b) != np.sign(w * 1 + b)
    assert abs(w * -1 + b) >= 1 - 1e-3 and abs(w + b) >= 1 - 1e-3
    # regularizing the bias as an extra weight keeps the symmetric optimum w = 1, b = 0
    assert w == pytest.approx(1.0, abs=1e-3) and b == pytest.approx(0.0, abs=1e-3)


def test_separable_blobs():
    X, labels = blobs(30)
    model = svm_fit((X, labels), SvmHyperparams(10.0))
    assert model.predict_batch(X) == labels


def test_single_class():
    with pytest.raises(SingleClass):
        svm_fit((np.ones((4, 2)), [S] * 4))


def test_hyperparams_validation():
    with pytest.raises(ConfigError):
        SvmHyperparams(0.0)
    with pytest.raises(ConfigError):
        SvmHyperparams(1.0, "auto")
    with pytest.raises(ConfigError):
        SvmHyperparams(1.0, kernel="rbf")
    assert SvmHyperparams(1.0, None).class_weight == "none"


def test_direct_scores():
    model = SvmModel(np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 0.0]]), np.array([0.0, 0.0, -10.0]),
                     SvmHyperparams())
    assert svm_predict(model, [2.0, 0.0]) == (C, (2.0, -2.0, -10.0))
    with pytest.raises(DimMismatch):
        svm_predict(model, [1.0])


def test_score_tie_prefers_conversation():
    model = SvmModel(np.array([[1.0], [1.0], [0.0]]), np.zeros(3), SvmHyperparams())
    assert svm_predict(model, [1.0])[0] is C


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_scores_match_recomputation(seed):
    rng = np.random.default_rng(seed)
    W, b, x = rng.standard_normal((3, 5)), rng.standard_normal(3), rng.standard_normal(5)
    label, scores = svm_predict(SvmModel(W, b, SvmHyperparams()), x)
    manual = [sum(W[c, j] * x[j] for j in range(5)) + b[c] for c in range(3)]
    assert scores == pytest.approx(manual, abs=1e-12)
    assert label.index == int(np.argmax(manual))


class TestSolver:
    def test_dual_feasible_every_epoch(self):
        X, labels = blobs(30, gap=1.0, spread=1.0)     # overlapping: many bounded alphas
        model = svm_fit((X, labels), SvmHyperparams(1.0, "balanced"))
        for tr in model.traces:
            assert np.all(tr.alpha_min >= 0.0)
            assert np.all(tr.alpha_excess <= 1e-12)
            assert np.all(tr.alpha >= 0) and np.all(tr.alpha <= tr.upper + 1e-12)

    def test_dual_objective_descends(self):
        X, labels = blobs(30, gap=1.0, spread=1.0)
        for tr in svm_fit((X, labels), SvmHyperparams(1.0)).traces:
            assert np.all(np.diff(tr.dual) <= 1e-10)

    def test_kkt_on_separable_large_c(self):
        X, labels = blobs(30)
        model = svm_fit((X, labels), SvmHyperparams(1000.0))
        scores = model.decision_function(X)
        for c in range(3):
            t = np.where(np.array([lab.index for lab in labels]) == c, 1.0, -1.0)
            assert np.all(t * scores[:, c] >= 1 - 1e-2)

    @pytest.mark.parametrize("gamma", [0.1, 3.0])
    def test_scale_equivariance(self, gamma):
        X, labels = blobs(20)
        Q = np.random.default_rng(4).standard_normal((30, 2)) * 4
        # the constant bias feature does not scale, so compare on the augmented problem
        Xa = np.hstack([X, np.ones((len(X), 1))])
        Qa = np.hstack([Q, np.ones((len(Q), 1))])
        a = svm_fit((Xa, labels), SvmHyperparams(10.0)).predict_batch(Qa)
        b = svm_fit((gamma * Xa, labels), SvmHyperparams(10.0 / gamma**2)).predict_batch(gamma * Qa)
        assert a == b

    def test_deterministic(self):
        X, labels = blobs(20, gap=1.0, spread=1.0)
        a = svm_fit((X, labels), SvmHyperparams(1.0), seed=5)
        b = svm_fit((X, labels), SvmHyperparams(1.0), seed=5)
        assert np.array_equal(a.W, b.W) and np.array_equal(a.b, b.b)

    def test_round_trip(self):
        X, labels = blobs(10)
        model = svm_fit((X, labels), SvmHyperparams(10.0, "balanced"))
        back = SvmModel.from_dict(model.to_dict())
        assert np.array_equal(back.W, model.W) and back.hyperparams == model.hyperparams


class TestGrid:
    def test_shape_and_bounds(self):
        X, labels = blobs(20)
        res = grid_search((X, labels), GridSearchSpec(C=(1, 10), folds=5))
        assert len(res.table) == 4
        assert all(0 <= cell.mean <= 1 for cell in res.table)

    def test_single_cell(self):
        X, labels = blobs(20)
        res = grid_search((X, labels), GridSearchSpec(C=(10,), class_weight=("balanced",), folds=5))
        assert res.best == SvmHyperparams(10.0, "balanced")

    def test_ties_prefer_simple(self):
        X, labels = blobs(20)
        res = grid_search((X, labels), GridSearchSpec(C=(100, 1, 10), folds=5))
        assert res.best == SvmHyperparams(1.0, "none")

    def test_fold_too_small(self):
        X, labels = blobs(5)
        with pytest.raises(FoldTooSmall):
            grid_search((X, labels), GridSearchSpec(folds=10))

    def test_parallel_matches_serial(self):
        X, labels = blobs(20, gap=1.5, spread=1.0)
        spec = GridSearchSpec(C=(0.1, 1), folds=4)
        a = grid_search((X, labels), spec)
        b = grid_search((X, labels), spec, n_jobs=3)
        assert a.table == b.table

    def test_folds_stratified(self):
        y = np.array([0] * 50 + [1] * 10 + [2] * 20)
        fold_of = stratified_folds(y, 10, seed=0)
        for f in range(10):
            assert [(fold_of[y == c] == f).sum() for c in range(3)] == [5, 1, 2]
