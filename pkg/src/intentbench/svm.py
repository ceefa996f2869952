"""One-vs-rest linear soft-margin SVM trained by dual coordinate descent,
plus stratified k-fold grid search over C and class weighting."""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numba
import numpy as np

from .dataset import CLASS_ORDER, N_CLASSES, IntentLabel, argmax_with_priority
from .embeddings import as_query, to_arrays
from .errors import ConfigError, DataError, FoldTooSmall, SingleClass, ZeroCount
from .eval.metrics import score

SCHEMA_VERSION = 1
CLASS_WEIGHTS = ("none", "balanced")
DEFAULT_C_GRID = (0.1, 1.0, 10.0, 100.0)


@dataclass(frozen=True)
class SvmHyperparams:
    C: float = 1.0
    class_weight: str = "none"
    kernel: str = "linear"

    def __post_init__(self):
        if not (self.C > 0 and math.isfinite(self.C)):
            raise ConfigError(f"C must be a positive finite number, got {self.C}")
        cw = "none" if self.class_weight in (None, "None") else self.class_weight
        object.__setattr__(self, "class_weight", cw)
        if cw not in CLASS_WEIGHTS:
            raise ConfigError(f"class_weight must be one of {CLASS_WEIGHTS}, got {self.class_weight!r}")
        if self.kernel != "linear":
            raise ConfigError(f"only the linear kernel is supported, got {self.kernel!r}")

    def to_dict(self) -> dict:
        return {"C": self.C, "class_weight": self.class_weight, "kernel": self.kernel}


def class_weights_balanced(counts: Sequence[int]) -> list[float]:
    """Inverse-frequency multipliers ``n_total / (n_classes * count_c)``."""
    counts = list(counts)
    if any(c < 1 for c in counts):
        raise ZeroCount(f"every class needs at least one sample, got counts {counts}")
    n_total = sum(counts)
    return [n_total / (len(counts) * c) for c in counts]


@numba.njit(cache=True, nogil=True)
def _dual_cd(X, t, upper, tol, max_epochs, seed, primal, dual, alpha_min, alpha_excess):
    """Hinge-loss dual coordinate descent for one binary problem.

    Minimizes 0.5*a'Qa - sum(a) over 0 <= a_i <= upper_i with
    Q_ij = t_i t_j x_i.x_j, keeping w = sum_i a_i t_i x_i in sync.
    Per-epoch primal/dual objectives and the extremes of the box
    constraint are written to the trace arrays. Returns (w, alpha, epochs,
    converged).
    """
    n, d = X.shape
    np.random.seed(seed)
    w = np.zeros(d)
    alpha = np.zeros(n)
    qd = np.empty(n)
    for i in range(n):
        qd[i] = X[i] @ X[i]
    order = np.arange(n)
    converged = False
    epochs = 0
    for ep in range(max_epochs):
        np.random.shuffle(order)
        max_step = 0.0
        for jj in range(n):
            i = order[jj]
            if qd[i] <= 0.0:
                continue
            grad = t[i] * (w @ X[i]) - 1.0
            old = alpha[i]
            new = min(max(old - grad / qd[i], 0.0), upper[i])
            step = new - old
            if step != 0.0:
                alpha[i] = new
                w += (step * t[i]) * X[i]
                if abs(step) > max_step:
                    max_step = abs(step)
        ww = w @ w
        margins = 1.0 - t * (X @ w)
        primal[ep] = 0.5 * ww + np.sum(upper * np.maximum(margins, 0.0))
        dual[ep] = 0.5 * ww - np.sum(alpha)
        alpha_min[ep] = np.min(alpha)
        alpha_excess[ep] = np.max(alpha - upper)
        epochs = ep + 1
        if max_step < tol:
            converged = True
            break
    return w, alpha, epochs, converged


@dataclass
class SolverTrace:
    """Per-epoch diagnostics of one one-vs-rest subproblem."""

    primal: np.ndarray
    dual: np.ndarray
    alpha_min: np.ndarray
    alpha_excess: np.ndarray   # max_i(alpha_i - upper_i); <= 0 when feasible
    epochs: int
    converged: bool
    alpha: np.ndarray
    upper: np.ndarray


@dataclass(eq=False)
class SvmModel:
    W: np.ndarray                 # (n_classes, dim)
    b: np.ndarray                 # (n_classes,)
    hyperparams: SvmHyperparams
    class_order: tuple[IntentLabel, ...] = CLASS_ORDER
    traces: list[SolverTrace] = field(default_factory=list, repr=False)

    @property
    def dim(self) -> int:
        return self.W.shape[1]

    def decision_function(self, X) -> np.ndarray:
        return np.atleast_2d(X) @ self.W.T + self.b

    def predict(self, query) -> tuple[IntentLabel, tuple[float, ...]]:
        x = as_query(query, self.dim)
        scores = self.W @ x + self.b
        return argmax_with_priority(scores), tuple(float(s) for s in scores)

    def predict_batch(self, X) -> list[IntentLabel]:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        as_query(X[0], self.dim)
        return [argmax_with_priority(row) for row in self.decision_function(X)]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "svm",
            "dim": self.dim,
            "class_order": [c.value for c in self.class_order],
            "hyperparams": self.hyperparams.to_dict(),
            "per_class": [{"w": w.tolist(), "b": float(b)} for w, b in zip(self.W, self.b)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvmModel":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise DataError(f"unsupported svm model schema {d.get('schema_version')!r}")
        order = tuple(IntentLabel.parse(c) for c in d["class_order"])
        if order != CLASS_ORDER:
            raise DataError(f"unexpected class order {d['class_order']}")
        W = np.array([p["w"] for p in d["per_class"]], dtype=np.float64)
        b = np.array([p["b"] for p in d["per_class"]], dtype=np.float64)
        if W.shape != (N_CLASSES, d["dim"]):
            raise DataError("svm model: weight shape does not match dim")
        return cls(W, b, SvmHyperparams(**d["hyperparams"]), order)


def svm_fit(train, hp: SvmHyperparams = SvmHyperparams(), seed: int = 0,
            tol: float = 1e-4, max_epochs: int = 1000) -> SvmModel:
    """Train one binary soft-margin SVM per class (one-vs-rest).

    The bias is learned as the weight of a constant feature of 1, so it is
    regularized together with ``w``. Sample ``i`` gets box bound
    ``C * s[y_i]``, where ``s`` is all ones or the balanced multipliers.
    """
    X, labels = to_arrays(train)
    y = np.array([lab.index for lab in labels], dtype=np.int64)
    present = sorted(set(y.tolist()))
    if len(present) < 2:
        raise SingleClass(f"need at least two classes to train, got {len(present)}")
    n, d = X.shape
    Xa = np.hstack([X, np.ones((n, 1))])

    mult = np.ones(N_CLASSES)
    if hp.class_weight == "balanced":
        counts = [int((y == c).sum()) for c in present]
        mult[present] = class_weights_balanced(counts)
    upper = hp.C * mult[y]

    W = np.zeros((N_CLASSES, d))
    b = np.zeros(N_CLASSES)
    traces = []
    for c in range(N_CLASSES):
        t = np.where(y == c, 1.0, -1.0)
        bufs = [np.empty(max_epochs) for _ in range(4)]
        w, alpha, epochs, converged = _dual_cd(Xa, t, upper, tol, max_epochs, seed + c, *bufs)
        W[c], b[c] = w[:d], w[d]
        traces.append(SolverTrace(*(buf[:epochs].copy() for buf in bufs), epochs, converged,
                                  alpha, upper.copy()))
    return SvmModel(W, b, hp, CLASS_ORDER, traces)


def svm_predict(model: SvmModel, query) -> tuple[IntentLabel, tuple[float, ...]]:
    return model.predict(query)


# -- grid search -----------------------------------------------------------

@dataclass(frozen=True)
class GridSearchSpec:
    C: Sequence[float] = DEFAULT_C_GRID
    class_weight: Sequence[str] = CLASS_WEIGHTS
    folds: int = 10
    scoring: str = "macro_f1"
    seed: int = 0

    def __post_init__(self):
        if self.folds < 2:
            raise ConfigError(f"folds must be >= 2, got {self.folds}")
        if not self.C or not self.class_weight:
            raise ConfigError("grid must not be empty")
        scoring = self.scoring.replace("-", "_")
        if scoring not in ("macro_f1", "weighted_f1"):
            raise ConfigError(f"scoring must be macro_f1 or weighted_f1, got {self.scoring!r}")
        object.__setattr__(self, "scoring", scoring)

    def cells(self) -> list[SvmHyperparams]:
        return [SvmHyperparams(float(c), cw) for c, cw in itertools.product(self.C, self.class_weight)]


@dataclass(frozen=True)
class GridCell:
    hyperparams: SvmHyperparams
    mean: float
    std: float
    fold_scores: tuple[float, ...]

    def as_csv_row(self) -> list:
        return [self.hyperparams.C, self.hyperparams.class_weight, self.mean, self.std]


@dataclass
class GridSearchResult:
    best: SvmHyperparams
    table: list[GridCell]
    fold_of: np.ndarray


def stratified_folds(y: np.ndarray, folds: int, seed: int) -> np.ndarray:
    """Fold id per sample. Each class is shuffled and dealt round-robin,
    continuing the deal across classes so fold sizes stay even."""
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(y), dtype=np.int64)
    offset = 0
    for c in range(N_CLASSES):
        idx = np.flatnonzero(y == c)
        if idx.size == 0:
            continue
        if idx.size < folds:
            raise FoldTooSmall(f"class {CLASS_ORDER[c]} has {idx.size} members, fewer than {folds} folds")
        idx = rng.permutation(idx)
        fold_of[idx] = (offset + np.arange(idx.size)) % folds
        offset += idx.size
    return fold_of


def grid_search(train, spec: GridSearchSpec = GridSearchSpec(), n_jobs: int = 1) -> GridSearchResult:
    """Mean/std cross-validated score for every grid cell.

    The best cell maximizes the mean score; exact ties go to the smaller C,
    then to ``class_weight="none"``.
    """
    X, labels = to_arrays(train)
    y = np.array([lab.index for lab in labels], dtype=np.int64)
    fold_of = stratified_folds(y, spec.folds, spec.seed)
    cells = spec.cells()

    def run(job):
        ci, f = job
        tr, te = fold_of != f, fold_of == f
        model = svm_fit((X[tr], [labels[i] for i in np.flatnonzero(tr)]), cells[ci], seed=spec.seed)
        pred = model.predict_batch(X[te])
        return score([labels[i] for i in np.flatnonzero(te)], pred, spec.scoring)

    jobs = [(ci, f) for ci in range(len(cells)) for f in range(spec.folds)]
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(j) for j in jobs]

    table = []
    for ci, hp in enumerate(cells):
        fs = np.array(results[ci * spec.folds:(ci + 1) * spec.folds])
        table.append(GridCell(hp, float(fs.mean()), float(fs.std()), tuple(float(s) for s in fs)))
    best = min(table, key=lambda cell: (-cell.mean, cell.hyperparams.C,
                                        CLASS_WEIGHTS.index(cell.hyperparams.class_weight)))
    return GridSearchResult(best.hyperparams, table, fold_of)
