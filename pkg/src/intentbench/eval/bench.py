"""Repeated timed prediction over a test set, and cross-classifier comparison
tables."""
from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..dataset import Corpus, IntentLabel, atomic_write_text
from ..errors import ConfigError, DataError, IntentBenchError
from .metrics import CLASS_COLUMNS, confusion, f1_scores

REPORT_COLUMNS = ("classifier", *CLASS_COLUMNS, "f1_macro", "latency_mean_s")


@dataclass
class LatencyStats:
    mean: float
    p50: float
    p95: float
    per_sample: list[float]      # mean seconds per test item, averaged over runs
    convention: str = "predict-only"


@dataclass
class EvalReport:
    classifier_id: str
    precision: list[float]
    recall: list[float]
    f1: list[float]
    macro_f1: float
    weighted_f1: float
    confusion: list[list[int]]
    latency: LatencyStats
    runs: int
    n_samples: int
    errors: int = 0
    error_messages: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        d = dict(d)
        d["latency"] = LatencyStats(**d["latency"])
        return cls(**d)

    def save(self, path) -> Path:
        atomic_write_text(path, json.dumps(self.to_dict(), indent=2) + "\n")
        return Path(path)

    @classmethod
    def load(cls, path) -> "EvalReport":
        path = Path(path)
        try:
            return cls.from_dict(json.loads(path.read_text(encoding="utf-8")))
        except FileNotFoundError:
            raise DataError(f"report not found: {path}") from None
        except (ValueError, TypeError, KeyError) as exc:
            raise DataError(f"{path}: malformed report ({exc})") from None


def _test_inputs(classifier, test) -> tuple[list, list[IntentLabel]]:
    """Inputs and true labels. Text backends get utterances, the rest get
    vectors."""
    wants_text = getattr(classifier, "input_kind", "vector") == "text"
    if isinstance(test, Corpus):
        if not wants_text:
            raise ConfigError("vector backends need embedded test data")
        return test.texts, test.labels
    if hasattr(test, "X") and hasattr(test, "labels"):
        if wants_text:
            if test.texts is None:
                raise DataError("test vectors carry no texts for a text backend")
            return list(test.texts), list(test.labels)
        return list(test.X), list(test.labels)
    inputs, labels = test
    return list(inputs), [IntentLabel.parse(lab) for lab in labels]


def _timed_call(classifier, x):
    start = time.perf_counter()
    try:
        out = classifier.predict(x)
        label = out[0] if isinstance(out, tuple) else out
        err = None
    except IntentBenchError as exc:
        label, err = None, f"{type(exc).__name__}: {exc}"
    return label, time.perf_counter() - start, err


def benchmark(classifier, test, runs: int = 1, seed: int = 0, classifier_id: str | None = None,
              concurrency: int = 1) -> EvalReport:
    """Predict every test item ``runs`` times, timing each call on its own.

    F1 metrics come from the first run. Later runs visit the items in a
    seeded random order so caches do not favour a fixed sequence. Items
    whose prediction raised are counted in ``errors`` and left out of the
    metrics. Concurrency is only used when the backend sets
    ``concurrent_safe``.
    """
    if runs < 1:
        raise ConfigError(f"runs must be >= 1, got {runs}")
    inputs, labels = _test_inputs(classifier, test)
    n = len(inputs)
    if n == 0:
        raise DataError("test set is empty")
    workers = concurrency if getattr(classifier, "concurrent_safe", False) else 1
    rng = np.random.default_rng(seed)
    times = np.zeros((runs, n))
    first_pred: list = [None] * n
    errors: list[str] = []

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for r in range(runs):
            order = np.arange(n) if r == 0 else rng.permutation(n)
            if pool is not None:
                results = list(pool.map(lambda i: _timed_call(classifier, inputs[i]), order))
            else:
                results = [_timed_call(classifier, inputs[i]) for i in order]
            for i, (label, dt, err) in zip(order, results):
                times[r, i] = dt
                if r == 0:
                    first_pred[i] = label
                    if err is not None:
                        errors.append(f"item {i}: {err}")
    finally:
        if pool is not None:
            pool.shutdown()

    ok = [i for i in range(n) if first_pred[i] is not None]
    if not ok:
        raise DataError(f"every prediction failed; first error: {errors[0]}")
    cm = confusion([labels[i] for i in ok], [first_pred[i] for i in ok])
    s = f1_scores(cm)
    flat = times.ravel()
    per_sample = times.mean(axis=0)
    latency = LatencyStats(float(flat.mean()), float(np.percentile(flat, 50)),
                           float(np.percentile(flat, 95)), per_sample.tolist(),
                           getattr(classifier, "latency_convention", "predict-only"))
    cid = classifier_id or type(classifier).__name__
    return EvalReport(cid, list(s.precision), list(s.recall), list(s.f1), s.macro, s.weighted,
                      cm.to_list(), latency, runs, n, len(errors), errors[:20])


# -- comparison ------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonRow:
    classifier: str
    f1: tuple[float, float, float]
    macro_f1: float
    latency_mean_s: float

    def values(self) -> list:
        return [self.classifier, *self.f1, self.macro_f1, self.latency_mean_s]


def compare(reports: Sequence[EvalReport]) -> list[ComparisonRow]:
    """One row per report, best macro-F1 first; ties go to the faster one."""
    if not reports:
        raise ConfigError("compare needs at least one report")
    rows = [ComparisonRow(r.classifier_id, tuple(r.f1), r.macro_f1, r.latency.mean) for r in reports]
    return sorted(rows, key=lambda row: (-row.macro_f1, row.latency_mean_s))


def rows_to_csv(rows: Sequence[ComparisonRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for row in rows:
        writer.writerow([row.classifier, *(f"{v:.6f}" for v in row.f1), f"{row.macro_f1:.6f}",
                         f"{row.latency_mean_s:.6g}"])
    return buf.getvalue()


def rows_to_markdown(rows: Sequence[ComparisonRow]) -> str:
    lines = ["| " + " | ".join(REPORT_COLUMNS) + " |",
             "|" + "---|" * len(REPORT_COLUMNS)]
    for row in rows:
        cells = [row.classifier, *(f"{v:.3f}" for v in row.f1), f"{row.macro_f1:.3f}",
                 f"{row.latency_mean_s:.4g}"]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def rows_to_json(rows: Sequence[ComparisonRow]) -> str:
    recs = [dict(zip(REPORT_COLUMNS, row.values())) for row in rows]
    return json.dumps(recs, indent=2) + "\n"


EMITTERS = {"csv": rows_to_csv, "md": rows_to_markdown, "markdown": rows_to_markdown, "json": rows_to_json}


def emit(rows: Sequence[ComparisonRow], fmt: str = "csv") -> str:
    try:
        return EMITTERS[fmt](rows)
    except KeyError:
        raise ConfigError(f"unknown report format {fmt!r}; expected csv, md or json") from None

