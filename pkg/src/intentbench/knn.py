"""Exact k-nearest-neighbour classifier with plain majority vote."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import CLASS_ORDER, N_CLASSES, IntentLabel, argmax_with_priority
from .embeddings import as_query, to_arrays
from .errors import ConfigError, DataError, KTooLarge
from .eval.metrics import confusion, f1_scores

SCHEMA_VERSION = 1
METRICS = ("euclidean", "cosine")


def _unit_rows(X: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    return np.divide(X, norms, out=np.zeros_like(X), where=norms > 0)


@dataclass(frozen=True, eq=False)
class KnnModel:
    k: int
    metric: str
    X: np.ndarray       # training points in canonical order
    y: np.ndarray       # class indices, aligned with X

    def __post_init__(self):
        object.__setattr__(self, "_sq_norms", np.einsum("ij,ij->i", self.X, self.X))
        object.__setattr__(self, "_unit", _unit_rows(self.X) if self.metric == "cosine" else None)

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @property
    def labels(self) -> list[IntentLabel]:
        return [CLASS_ORDER[i] for i in self.y]

    def distances(self, Q: np.ndarray) -> np.ndarray:
        """Distances from each row of ``Q`` to every stored point (squared
        euclidean, or one minus cosine similarity)."""
        Q = np.atleast_2d(Q)
        if self.metric == "cosine":
            return 1.0 - _unit_rows(Q) @ self._unit.T
        d = np.einsum("ij,ij->i", Q, Q)[:, None] - 2.0 * (Q @ self.X.T) + self._sq_norms[None, :]
        return np.maximum(d, 0.0)

    def neighbour_order(self, Q: np.ndarray) -> np.ndarray:
        # stable sort: equal distances keep canonical index order
        return np.argsort(self.distances(Q), axis=1, kind="stable")

    def votes_from_order(self, order: np.ndarray, k: int) -> np.ndarray:
        nearest = self.y[order[:, :k]]
        return np.stack([(nearest == c).sum(axis=1) for c in range(N_CLASSES)], axis=1)

    def predict(self, query) -> tuple[IntentLabel, tuple[int, ...]]:
        x = as_query(query, self.dim)
        votes = self.votes_from_order(self.neighbour_order(x), self.k)[0]
        return argmax_with_priority(votes), tuple(int(v) for v in votes)

    def predict_batch(self, Q) -> list[IntentLabel]:
        Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
        as_query(Q[0], self.dim)
        votes = self.votes_from_order(self.neighbour_order(Q), self.k)
        return [argmax_with_priority(v) for v in votes]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "knn",
            "k": self.k,
            "metric": self.metric,
            "dim": self.dim,
            "points": [{"values": row.tolist(), "label": CLASS_ORDER[c].value}
                       for row, c in zip(self.X, self.y)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KnnModel":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise DataError(f"unsupported knn model schema {d.get('schema_version')!r}")
        X = np.array([p["values"] for p in d["points"]], dtype=np.float64)
        labels = [IntentLabel.parse(p["label"]) for p in d["points"]]
        if X.shape[1] != d["dim"]:
            raise DataError("knn model: stored dim does not match points")
        return knn_fit((X, labels), d["k"], d["metric"])


def knn_fit(train, k: int, metric: str = "euclidean") -> KnnModel:
    """Store the training points.

    Points are put into a canonical order (lexicographic on the vector, then
    label) so that predictions, including tie-breaks, do not depend on the
    order the caller supplied them in.
    """
    if metric not in METRICS:
        raise ConfigError(f"unknown metric {metric!r}; expected one of {METRICS}")
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    X, labels = to_arrays(train)
    if X.shape[0] == 0:
        raise DataError("knn_fit needs at least one training point")
    if k > X.shape[0]:
        raise KTooLarge(f"k={k} exceeds the {X.shape[0]} training points")
    y = np.array([lab.index for lab in labels], dtype=np.int64)
    keys = [y] + [X[:, j] for j in range(X.shape[1] - 1, -1, -1)]
    order = np.lexsort(keys)
    return KnnModel(int(k), metric, np.ascontiguousarray(X[order]), y[order])


def knn_predict(model: KnnModel, query) -> tuple[IntentLabel, tuple[int, ...]]:
    return model.predict(query)


@dataclass(frozen=True)
class SweepRow:
    k: int
    f1: tuple[float, float, float]
    macro: float

    def as_csv_row(self) -> list:
        return [self.k, *self.f1, self.macro]


def parse_k_values(spec: str) -> list[int]:
    """``"1..25"``, ``"1,3,5"`` or a mix such as ``"1..5,11"``."""
    values = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            values.extend(range(int(lo), int(hi) + 1))
        else:
            values.append(int(part))
    return values


def knn_k_sweep(train, test, k_values: Sequence[int], metric: str = "euclidean") -> list[SweepRow]:
    """Per-class and macro F1 on ``test`` for each k."""
    k_values = list(k_values)
    if not k_values:
        raise ConfigError("k_values must not be empty")
    model = knn_fit(train, max(k_values), metric)
    if min(k_values) < 1:
        raise ConfigError("every k must be >= 1")
    Xt, yt = to_arrays(test)
    as_query(Xt[0], model.dim)
    order = model.neighbour_order(Xt)
    rows = []
    for k in k_values:
        votes = model.votes_from_order(order, k)
        pred = [argmax_with_priority(v) for v in votes]
        s = f1_scores(confusion(yt, pred))
        rows.append(SweepRow(k, s.f1, s.macro))
    return rows
