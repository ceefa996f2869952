"""Metrics, benchmarking and embedding-space diagnostics."""
from .metrics import ConfusionMatrix, F1Scores, confusion, f1_scores

__all__ = ["ConfusionMatrix", "F1Scores", "confusion", "f1_scores"]
