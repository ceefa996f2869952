import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from intentbench.dataset import CLASS_ORDER
from intentbench.errors import ConfigError, DimMismatch, KTooLarge
from intentbench.knn import KnnModel, knn_fit, knn_k_sweep, knn_predict, parse_k_values

from conftest import blobs
from oracles import naive_knn

C, S, D = CLASS_ORDER


def test_identity_query():
    X, labels = blobs(10)
    model = knn_fit((X, labels), 1)
    for x, lab in zip(X, labels):
        assert knn_predict(model, x)[0] is lab


def test_toy_votes():
    X = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0]])
    model = knn_fit((X, [C, C, S]), 3)
    assert knn_predict(model, [0.1, 0.1]) == (C, (2, 1, 0))


def test_stores_every_point():
    X = np.random.default_rng(0).standard_normal((666, 8))
    labels = [CLASS_ORDER[i % 3] for i in range(666)]
    assert knn_fit((X, labels), 3).X.shape == (666, 8)


def test_errors():
    X, labels = blobs(2)
    with pytest.raises(ConfigError):
        knn_fit((X, labels), 0)
    with pytest.raises(KTooLarge):
        knn_fit((X, labels), 7)
    with pytest.raises(ConfigError):
        knn_fit((X, labels), 1, metric="manhattan")
    model = knn_fit((X, labels), 1)
    with pytest.raises(DimMismatch):
        knn_predict(model, [1.0, 2.0, 3.0])


def test_vote_tie_goes_to_conversation():
    X = np.array([[1.0], [-1.0]])
    model = knn_fit((X, [S, C]), 2)
    assert knn_predict(model, [0.0])[0] is C


@st.composite
def instances(draw):
    n = draw(st.integers(1, 40))
    d = draw(st.integers(1, 6))
    grid = draw(st.booleans())     # small integer grids force distance ties
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    X = rng.integers(-2, 3, size=(n, d)).astype(float) if grid else rng.standard_normal((n, d))
    y = rng.integers(0, 3, size=n)
    q = rng.integers(-2, 3, size=d).astype(float) if grid else rng.standard_normal(d)
    k = draw(st.integers(1, n))
    metric = draw(st.sampled_from(["euclidean", "cosine"]))
    return X, [CLASS_ORDER[i] for i in y], q, k, metric, rng


@settings(max_examples=200, deadline=None)
@given(instances())
def test_matches_oracle_and_permutation_invariant(inst):
    X, labels, q, k, metric, rng = inst
    model = knn_fit((X, labels), k, metric)
    label, votes = knn_predict(model, q)
    want, want_votes = naive_knn(X.tolist(), labels, q.tolist(), k, metric)
    assert label.value == want
    assert sum(votes) == k
    assert votes == tuple(want_votes[lab.value] for lab in CLASS_ORDER)
    perm = rng.permutation(len(labels))
    shuffled = knn_fit((X[perm], [labels[i] for i in perm]), k, metric)
    assert knn_predict(shuffled, q) == (label, votes)


def test_batch_matches_single():
    X, labels = blobs(15, d=4, gap=1.0, spread=1.0)
    model = knn_fit((X, labels), 5)
    Q = np.random.default_rng(1).standard_normal((20, 4))
    assert model.predict_batch(Q) == [model.predict(q)[0] for q in Q]


def test_round_trip():
    X, labels = blobs(5)
    model = knn_fit((X, labels), 3, "cosine")
    back = KnnModel.from_dict(model.to_dict())
    assert back.k == 3 and back.metric == "cosine"
    assert np.array_equal(back.X, model.X) and np.array_equal(back.y, model.y)


class TestSweep:
    def test_memorization(self):
        X, labels = blobs(10, gap=1.0, spread=1.0)
        (row,) = knn_k_sweep((X, labels), (X, labels), [1])
        assert row.f1 == (1.0, 1.0, 1.0)

    def test_table(self):
        X, labels = blobs(20)
        Xt, lt = blobs(10, seed=1)
        rows = knn_k_sweep((X, labels), (Xt, lt), range(1, 26))
        assert [r.k for r in rows] == list(range(1, 26))
        assert all(0 <= f <= 1 for r in rows for f in r.f1)
        assert max(rows, key=lambda r: r.macro).macro == 1.0

    def test_empty(self):
        X, labels = blobs(3)
        with pytest.raises(ConfigError):
            knn_k_sweep((X, labels), (X, labels), [])

    def test_parse(self):
        assert parse_k_values("1..3,7") == [1, 2, 3, 7]
