"""Confusion matrices and precision/recall/F1 over the fixed class order."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..dataset import CLASS_ORDER, N_CLASSES, IntentLabel
from ..errors import ConfigError, LengthMismatch


@dataclass(frozen=True)
class ConfusionMatrix:
    """3x3 counts; rows are true classes, columns predicted, in ``CLASS_ORDER``."""

    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def support(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def to_list(self) -> list[list[int]]:
        return self.counts.astype(int).tolist()


@dataclass(frozen=True)
class F1Scores:
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    f1: tuple[float, ...]
    macro: float
    weighted: float

    def for_label(self, label: IntentLabel) -> float:
        return self.f1[label.index]


def _index(label) -> int:
    return IntentLabel.parse(label).index


def confusion(true_labels: Sequence, predicted_labels: Sequence) -> ConfusionMatrix:
    if len(true_labels) != len(predicted_labels):
        raise LengthMismatch(f"{len(true_labels)} true labels vs {len(predicted_labels)} predictions")
    if len(true_labels) == 0:
        raise LengthMismatch("cannot build a confusion matrix from zero samples")
    cm = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for t, p in zip(true_labels, predicted_labels):
        cm[_index(t), _index(p)] += 1
    return ConfusionMatrix(cm)


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def f1_scores(cm: ConfusionMatrix) -> F1Scores:
    """Per-class scores with 0/0 taken as 0, plus macro and support-weighted F1."""
    c = cm.counts
    tp = np.diag(c).astype(float)
    pred_totals = c.sum(axis=0)
    true_totals = c.sum(axis=1)
    precision, recall, f1 = [], [], []
    for k in range(N_CLASSES):
        p = _ratio(tp[k], pred_totals[k])
        r = _ratio(tp[k], true_totals[k])
        precision.append(p)
        recall.append(r)
        f1.append(_ratio(2 * p * r, p + r))
    macro = sum(f1) / N_CLASSES
    weighted = _ratio(sum(f * s for f, s in zip(f1, true_totals)), true_totals.sum())
    return F1Scores(tuple(precision), tuple(recall), tuple(f1), macro, weighted)


def score(true_labels: Sequence, predicted_labels: Sequence, scoring: str = "macro_f1") -> float:
    s = f1_scores(confusion(true_labels, predicted_labels))
    if scoring in ("macro_f1", "macro-f1", "macro"):
        return s.macro
    if scoring in ("weighted_f1", "weighted-f1", "weighted"):
        return s.weighted
    raise ConfigError(f"unknown scoring {scoring!r}")


CLASS_COLUMNS = tuple(f"f1_{lab.value.lower()}" for lab in CLASS_ORDER)
