import json
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from intentbench.dataset import CLASS_ORDER
from intentbench.errors import ConfigError, DataError, DegenerateData, LengthMismatch, TransportError
from intentbench.eval.bench import EvalReport, benchmark, compare, emit
from intentbench.eval.metrics import ConfusionMatrix, confusion, f1_scores, score
from intentbench.eval.pca import pca_project
from intentbench.knn import knn_fit
from intentbench.llm_router import LlmClassifier, MockTransport

from conftest import blobs
from oracles import naive_f1

C, S, D = CLASS_ORDER
labels_st = st.lists(st.sampled_from(CLASS_ORDER), min_size=1, max_size=50)


class TestMetrics:
    def test_perfect(self):
        y = [C, S, D] * 3
        cm = confusion(y, y)
        assert cm.counts.tolist() == [[3, 0, 0], [0, 3, 0], [0, 0, 3]]
        assert f1_scores(cm).f1 == (1.0, 1.0, 1.0)

    def test_all_conversation(self):
        cm = confusion([C, S, D] * 3, [C] * 9)
        assert cm.counts[:, 0].tolist() == [3, 3, 3] and cm.counts[:, 1:].sum() == 0

    def test_hand_computed(self):
        s = f1_scores(confusion([C, C, S], [C, S, S]))
        assert s.f1[0] == pytest.approx(2 / 3, abs=1e-9) and s.f1[1] == pytest.approx(2 / 3, abs=1e-9)
        assert s.f1[2] == 0.0

    def test_errors(self):
        with pytest.raises(LengthMismatch):
            confusion([], [])
        with pytest.raises(LengthMismatch):
            confusion([C], [C, S])
        with pytest.raises(ConfigError):
            score([C], [C], "micro")

    @settings(max_examples=300)
    @given(st.data())
    def test_matches_naive_recount(self, data):
        true = data.draw(labels_st)
        pred = data.draw(st.lists(st.sampled_from(CLASS_ORDER), min_size=len(true), max_size=len(true)))
        cm = confusion(true, pred)
        s = f1_scores(cm)
        assert list(s.f1) == naive_f1(true, pred)
        assert cm.support().tolist() == [true.count(lab) for lab in CLASS_ORDER]
        assert cm.total == len(true)
        assert abs(s.macro - sum(s.f1) / 3) <= 1e-12
        assert all(0 <= f <= 1 for f in s.f1)


class Slow:
    input_kind = "vector"

    def __init__(self, model, delay):
        self.model, self.delay = model, delay

    def predict(self, x):
        time.sleep(self.delay)
        return self.model.predict(x)


class Flaky:
    def __init__(self, model):
        self.model, self.n = model, 0

    def predict(self, x):
        self.n += 1
        if self.n % 5 == 0:
            raise TransportError("boom")
        return self.model.predict(x)


class TestBenchmark:
    def setup_method(self):
        self.X, self.labels = blobs(20)
        self.model = knn_fit((self.X, self.labels), 3)

    def test_deterministic_runs(self):
        r = benchmark(self.model, (self.X, self.labels), runs=3)
        again = benchmark(self.model, (self.X, self.labels), runs=3)
        assert r.confusion == again.confusion and r.runs == 3
        assert len(r.latency.per_sample) == 60
        assert r.latency.p50 <= r.latency.p95

    def test_separable_high_f1(self):
        Xt, lt = blobs(20, seed=1)
        assert benchmark(self.model, (Xt, lt)).macro_f1 >= 0.95

    def test_runs_zero(self):
        with pytest.raises(ConfigError):
            benchmark(self.model, (self.X, self.labels), runs=0)

    def test_timing_is_per_call(self):
        r = benchmark(Slow(self.model, 0.01), (self.X[:5], self.labels[:5]), runs=2)
        assert min(r.latency.per_sample) >= 0.01

    def test_errors_counted(self):
        r = benchmark(Flaky(self.model), (self.X, self.labels))
        assert r.errors == 12 and sum(map(sum, r.confusion)) == 48

    def test_llm_concurrency(self):
        texts = ["hi"] * 6
        clf = LlmClassifier(MockTransport('{"category":"Conversation"}', delay=0.05))
        start = time.perf_counter()
        r = benchmark(clf, (texts, [C] * 6), concurrency=6)
        assert time.perf_counter() - start < 0.25
        assert r.latency.convention == "round-trip" and r.latency.mean >= 0.05

    def test_report_json_round_trip(self, tmp_path):
        r = benchmark(self.model, (self.X, self.labels), classifier_id="knn")
        back = EvalReport.load(r.save(tmp_path / "r.json"))
        assert back == r

    def test_bad_report(self, tmp_path):
        p = tmp_path / "r.json"
        p.write_text("{}")
        with pytest.raises(DataError):
            EvalReport.load(p)


def fake_report(cid, macro, latency):
    X, labels = blobs(3)
    r = benchmark(knn_fit((X, labels), 1), (X, labels), classifier_id=cid)
    r.macro_f1 = macro
    r.latency.mean = latency
    return r


class TestCompare:
    def test_order(self):
        rows = compare([fake_report("a", 0.8, 1.0), fake_report("b", 0.9, 2.0), fake_report("c", 0.9, 0.5)])
        assert [r.classifier for r in rows] == ["c", "b", "a"]

    def test_eight_rows(self):
        ids = ["knn-titan", "knn-cohere", "svm-titan", "svm-cohere", "ann-titan", "ann-cohere", "llm",
               "llm-augmented"]
        rows = compare([fake_report(i, 0.5, 0.1) for i in ids])
        assert len(rows) == 8
        csv_text = emit(rows, "csv")
        assert csv_text.splitlines()[0] == \
            "classifier,f1_conversation,f1_services,f1_document_translation,f1_macro,latency_mean_s"
        assert len(csv_text.splitlines()) == 9
        assert len(json.loads(emit(rows, "json"))) == 8
        assert emit(rows, "md").count("\n") == 10

    def test_single(self):
        assert len(compare([fake_report("x", 1.0, 0.0)])) == 1

    def test_empty(self):
        with pytest.raises(ConfigError):
            compare([])
        with pytest.raises(ConfigError):
            emit([], "xml")


class TestPca:
    def test_collinear(self):
        t = np.linspace(-1, 1, 40)
        p = pca_project(np.c_[t, t], [C] * 40)
        assert p.explained[0] >= 0.999

    def test_isotropic(self):
        X = np.random.default_rng(0).standard_normal((500, 4))
        p = pca_project(X, [C] * 500)
        assert all(abs(f - 0.25) <= 0.1 for f in p.explained)
        assert p.explained[0] >= p.explained[1]

    def test_identical(self):
        with pytest.raises(DegenerateData):
            pca_project(np.ones((5, 3)), [C] * 5)

    def test_preconditions(self):
        with pytest.raises(DataError):
            pca_project(np.ones((2, 3)), [C] * 2)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 12))
    def test_orthonormal_and_offset_invariant(self, seed, d):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((30, d)) * rng.uniform(0.1, 5, d)
        p = pca_project(X, [C] * 30)
        G = p.components @ p.components.T
        assert np.allclose(G, np.eye(2), atol=1e-6)
        shifted = pca_project(X + rng.uniform(-50, 50, d), [C] * 30)
        assert np.allclose(shifted.coords, p.coords, atol=1e-6)
        assert 0 <= p.explained[1] <= p.explained[0] <= 1

    def test_matches_eigendecomposition(self):
        X = np.random.default_rng(3).standard_normal((200, 6)) * np.array([5, 3, 1, 1, 0.5, 0.1])
        p = pca_project(X, [C] * 200)
        Xc = X - X.mean(axis=0)
        evals, evecs = np.linalg.eigh(Xc.T @ Xc / 200)
        assert p.explained[0] == pytest.approx(evals[-1] / evals.sum(), abs=1e-9)
        assert abs(p.components[0] @ evecs[:, -1]) == pytest.approx(1.0, abs=1e-9)

    def test_csv(self):
        X = np.random.default_rng(0).standard_normal((4, 3))
        text = pca_project(X, [C, S, D, C], provider="titan-like").to_csv()
        lines = text.splitlines()
        assert lines[0] == "x,y,label,provider" and len(lines) == 5
        assert lines[2].endswith(",Services,titan-like")
