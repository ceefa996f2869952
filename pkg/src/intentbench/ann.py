"""Small feed-forward classifier (d -> 16 -> 8 -> 3) trained with Adam on
min-max scaled embeddings, with patience-based early stopping on validation
accuracy."""
from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import CLASS_ORDER, N_CLASSES, IntentLabel, SplitConfig, argmax_with_priority, stratified_indices
from .embeddings import LabeledVectors, as_query, to_arrays
from .svm import class_weights_balanced
from .errors import ConfigError, DataError, DimMismatch, NonFiniteLoss, ShapeMismatch

SCHEMA_VERSION = 1
LOG_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class MinMaxScaler:
    min: np.ndarray
    max: np.ndarray

    @property
    def dim(self) -> int:
        return self.min.shape[0]

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.dim:
            raise DimMismatch(self.dim, X.shape[-1])
        span = self.max - self.min
        out = np.divide(X - self.min, span, out=np.zeros(np.broadcast_shapes(X.shape, span.shape)),
                        where=span > 0)
        return np.clip(out, 0.0, 1.0)


def scaler_fit(vectors) -> MinMaxScaler:
    X = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    if X.shape[0] == 0:
        raise DataError("scaler needs at least one vector")
    return MinMaxScaler(X.min(axis=0), X.max(axis=0))


def scaler_apply(scaler: MinMaxScaler, v) -> np.ndarray:
    return scaler.transform(v)


def one_hot(label: IntentLabel) -> np.ndarray:
    v = np.zeros(N_CLASSES)
    v[IntentLabel.parse(label).index] = 1.0
    return v


@dataclass(frozen=True)
class AnnArchitecture:
    input_dim: int
    hidden: tuple[int, ...] = (16, 8)
    activations: tuple[str, ...] = ("relu", "relu", "softmax")

    def __post_init__(self):
        if self.input_dim < 1:
            raise ConfigError("input_dim must be positive")
        if len(self.activations) != len(self.hidden) + 1 or self.activations[-1] != "softmax":
            raise ConfigError("one activation per layer; the last must be softmax")
        if any(a != "relu" for a in self.activations[:-1]):
            raise ConfigError("hidden layers use relu")

    @property
    def sizes(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden, N_CLASSES)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    max_epochs: int = 500
    batch_size: int = 64
    patience: int = 25
    seed: int = 0
    class_weight: str = "none"
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if not 0 <= self.patience < self.max_epochs:
            raise ConfigError("patience must be in [0, max_epochs)")
        if self.learning_rate < 0:
            raise ConfigError("learning_rate must be >= 0")
        if self.class_weight not in ("none", "balanced"):
            raise ConfigError(f"class_weight must be none or balanced, got {self.class_weight!r}")


# -- network math ----------------------------------------------------------

def init_params(arch: AnnArchitecture, rng: np.random.Generator) -> list[tuple[np.ndarray, np.ndarray]]:
    """Uniform fan-in scaled init. Relu layers use the He bound
    sqrt(6/fan_in); the softmax layer uses 1/sqrt(fan_in), which keeps the
    initial logits small and the starting loss close to ln(3). Biases start
    at zero."""
    params = []
    sizes = arch.sizes
    for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        gain = 6.0 if arch.activations[i] == "relu" else 1.0
        limit = math.sqrt(gain / fan_in)
        params.append((rng.uniform(-limit, limit, size=(fan_in, fan_out)), np.zeros(fan_out)))
    return params


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def forward(params, X: np.ndarray) -> np.ndarray:
    a = X
    for W, b in params[:-1]:
        a = np.maximum(a @ W + b, 0.0)
    W, b = params[-1]
    return softmax(a @ W + b)


def cross_entropy(probs: np.ndarray, Y: np.ndarray, sample_weight=None) -> float:
    per_sample = -np.sum(Y * np.log(np.maximum(probs, LOG_FLOOR)), axis=1)
    if sample_weight is not None:
        per_sample = per_sample * sample_weight
    return float(per_sample.sum() / Y.shape[0])


def loss_and_grads(params, X: np.ndarray, Y: np.ndarray, sample_weight=None):
    """Batch-mean categorical cross-entropy (optionally per-sample weighted)
    and its gradients.

    Returns ``(loss, probs, grads)`` with ``grads`` shaped like ``params``.
    """
    acts = [X]
    pre = []
    a = X
    for W, b in params[:-1]:
        z = a @ W + b
        pre.append(z)
        a = np.maximum(z, 0.0)
        acts.append(a)
    W, b = params[-1]
    probs = softmax(a @ W + b)
    n = X.shape[0]
    loss = cross_entropy(probs, Y, sample_weight)

    grads = [None] * len(params)
    delta = (probs - Y) / n
    if sample_weight is not None:
        delta = delta * sample_weight[:, None]
    for layer in range(len(params) - 1, -1, -1):
        W, _ = params[layer]
        grads[layer] = (acts[layer].T @ delta, delta.sum(axis=0))
        if layer:
            delta = (delta @ W.T) * (pre[layer - 1] > 0)
    return loss, probs, grads


class Adam:
    def __init__(self, params, lr: float, beta1: float, beta2: float, eps: float):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = [[np.zeros_like(p) for p in layer] for layer in params]
        self.v = [[np.zeros_like(p) for p in layer] for layer in params]

    def step(self, params, grads) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for layer, glayer, mlayer, vlayer in zip(params, grads, self.m, self.v):
            for p, g, m, v in zip(layer, glayer, mlayer, vlayer):
                m *= self.beta1
                m += (1.0 - self.beta1) * g
                v *= self.beta2
                v += (1.0 - self.beta2) * g * g
                p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


class EarlyStopping:
    """Stop once the monitored value has not strictly improved for
    ``patience`` consecutive epochs."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best = -math.inf
        self.best_epoch = 0
        self.wait = 0

    def update(self, epoch: int, value: float) -> bool:
        """Record ``value`` for ``epoch`` (1-based); True means stop now."""
        if value > self.best:
            self.best, self.best_epoch, self.wait = value, epoch, 0
            return False
        self.wait += 1
        return self.wait >= self.patience


# -- model -----------------------------------------------------------------

@dataclass(eq=False)
class AnnModel:
    layers: list[tuple[np.ndarray, np.ndarray]]
    scaler: MinMaxScaler
    arch: AnnArchitecture
    class_order: tuple[IntentLabel, ...] = CLASS_ORDER

    @property
    def dim(self) -> int:
        return self.scaler.dim

    def predict_proba(self, X) -> np.ndarray:
        return forward(self.layers, self.scaler.transform(np.atleast_2d(X)))

    def predict(self, query) -> tuple[IntentLabel, tuple[float, ...]]:
        x = as_query(query, self.dim)
        p = forward(self.layers, self.scaler.transform(x)[None, :])[0]
        return argmax_with_priority(p), tuple(float(v) for v in p)

    def predict_batch(self, X) -> list[IntentLabel]:
        return [argmax_with_priority(p) for p in self.predict_proba(X)]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "ann",
            "arch": {"sizes": list(self.arch.sizes), "activations": list(self.arch.activations)},
            "scaler": {"min": self.scaler.min.tolist(), "max": self.scaler.max.tolist()},
            "layers": [{"W": W.tolist(), "b": b.tolist()} for W, b in self.layers],
            "class_order": [c.value for c in self.class_order],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnnModel":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise DataError(f"unsupported ann model schema {d.get('schema_version')!r}")
        sizes = d["arch"]["sizes"]
        arch = AnnArchitecture(sizes[0], tuple(sizes[1:-1]), tuple(d["arch"]["activations"]))
        layers = [(np.array(l["W"], dtype=np.float64), np.array(l["b"], dtype=np.float64))
                  for l in d["layers"]]
        for (W, b), fi, fo in zip(layers, sizes[:-1], sizes[1:]):
            if W.shape != (fi, fo) or b.shape != (fo,):
                raise DataError("ann model: layer shapes do not chain")
        order = tuple(IntentLabel.parse(c) for c in d["class_order"])
        if order != CLASS_ORDER:
            raise DataError(f"unexpected class order {d['class_order']}")
        scaler = MinMaxScaler(np.array(d["scaler"]["min"], dtype=np.float64),
                              np.array(d["scaler"]["max"], dtype=np.float64))
        return cls(layers, scaler, arch, order)


def ann_predict(model: AnnModel, query) -> tuple[IntentLabel, tuple[float, ...]]:
    return model.predict(query)


@dataclass
class TrainHistory:
    loss: list[float] = field(default_factory=list)
    accuracy: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    val_accuracy: list[float] = field(default_factory=list)
    best_epoch: int = 0          # 1-based
    initial_loss: float = math.nan   # unweighted training loss before the first update

    @property
    def epochs(self) -> int:
        return len(self.loss)

    def to_dict(self) -> dict:
        return {"loss": self.loss, "accuracy": self.accuracy, "val_loss": self.val_loss,
                "val_accuracy": self.val_accuracy, "best_epoch": self.best_epoch,
                "initial_loss": self.initial_loss}


def _targets(labels) -> np.ndarray:
    Y = np.zeros((len(labels), N_CLASSES))
    Y[np.arange(len(labels)), [lab.index for lab in labels]] = 1.0
    return Y


def _accuracy(probs: np.ndarray, Y: np.ndarray) -> float:
    pred = [argmax_with_priority(p).index for p in probs]
    return float(np.mean(np.array(pred) == Y.argmax(axis=1)))


def ann_fit(train, validation, arch: AnnArchitecture | None = None,
            cfg: TrainConfig = TrainConfig()) -> tuple[AnnModel, TrainHistory]:
    """Mini-batch Adam on categorical cross-entropy.

    The scaler is fit on ``train`` only. Weights from the epoch with the best
    validation accuracy (first one on ties) are returned.

    Min-max scaled features all sit around 0.5, so Adam's near sign-sized
    first steps move every first-layer unit's pre-activation by roughly
    ``lr * sum(x)`` in one direction and most relus die within an epoch.
    The first layer is therefore optimized on mean-centered inputs and the
    centering is folded back into its bias afterwards. The returned network
    is an ordinary dense net over min-max scaled inputs.
    """
    X, labels = to_arrays(train)
    Xv, vlabels = to_arrays(validation)
    if X.shape[0] == 0 or Xv.shape[0] == 0:
        raise DataError("train and validation sets must be non-empty")
    if Xv.shape[1] != X.shape[1]:
        raise ShapeMismatch(f"validation dim {Xv.shape[1]} != train dim {X.shape[1]}")
    arch = arch or AnnArchitecture(X.shape[1])
    if arch.input_dim != X.shape[1]:
        raise ShapeMismatch(f"architecture expects {arch.input_dim} inputs, data has {X.shape[1]}")

    rng = np.random.default_rng(cfg.seed)
    scaler = scaler_fit(X)
    center = scaler.transform(X).mean(axis=0)
    Xs, Xvs = scaler.transform(X) - center, scaler.transform(Xv) - center
    Y, Yv = _targets(labels), _targets(vlabels)
    weights = None
    if cfg.class_weight == "balanced":
        counts = Y.sum(axis=0)
        present = counts > 0
        mult = np.zeros(N_CLASSES)
        mult[present] = class_weights_balanced(counts[present].astype(int).tolist())
        weights = Y @ mult
    params = [(W.copy(), b.copy()) for W, b in init_params(arch, rng)]
    opt = Adam(params, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon)
    stopper = EarlyStopping(cfg.patience)
    history = TrainHistory()
    best_params = copy.deepcopy(params)
    n = Xs.shape[0]
    history.initial_loss = cross_entropy(forward(params, Xs), Y)

    for epoch in range(1, cfg.max_epochs + 1):
        perm = rng.permutation(n)
        total_loss = 0.0
        correct = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = perm[start:start + cfg.batch_size]
            sw = weights[idx] if weights is not None else None
            loss, probs, grads = loss_and_grads(params, Xs[idx], Y[idx], sw)
            if not math.isfinite(loss):
                raise NonFiniteLoss(epoch)
            total_loss += loss * idx.size
            correct += _accuracy(probs, Y[idx]) * idx.size
            opt.step(params, grads)
        vprobs = forward(params, Xvs)
        history.loss.append(total_loss / n)
        history.accuracy.append(correct / n)
        history.val_loss.append(cross_entropy(vprobs, Yv))
        val_acc = _accuracy(vprobs, Yv)
        history.val_accuracy.append(val_acc)
        improved = val_acc > stopper.best
        stop = stopper.update(epoch, val_acc)
        if improved:
            best_params = copy.deepcopy(params)
        if stop:
            break

    history.best_epoch = stopper.best_epoch
    W1, b1 = best_params[0]
    best_params[0] = (W1, b1 - center @ W1)
    return AnnModel(best_params, scaler, arch), history


def validation_split(data, fraction: float = 0.2, seed: int = 0) -> tuple[LabeledVectors, LabeledVectors]:
    """Carve a stratified ``fraction`` of ``data`` off as a validation set.

    Returns ``(train, validation)``.
    """
    X, labels = to_arrays(data)
    lv = data if isinstance(data, LabeledVectors) else LabeledVectors(X, labels)
    val = stratified_indices(labels, SplitConfig(train_fraction=fraction, seed=seed))
    keep = [i for i in range(len(labels)) if i not in val]
    return lv.subset(keep), lv.subset(sorted(val))
