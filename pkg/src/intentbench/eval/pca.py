"""Two-component PCA by power iteration, for plotting embedding spaces."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..dataset import IntentLabel
from ..errors import DataError, DegenerateData


@dataclass(eq=False)
class Projection2D:
    coords: np.ndarray               # (n, 2)
    labels: list[IntentLabel]
    explained: tuple[float, float]   # variance fractions, first >= second
    components: np.ndarray           # (2, d) orthonormal rows
    provider: str = ""

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "y", "label", "provider"])
        for (x, y), lab in zip(self.coords, self.labels):
            writer.writerow([f"{x:.9g}", f"{y:.9g}", lab.value, self.provider])
        return buf.getvalue()


def _power(Xc: np.ndarray, v: np.ndarray, basis: list[np.ndarray], tol: float, max_iter: int) -> np.ndarray:
    """Leading direction of Xc'Xc restricted to the complement of ``basis``.
    The covariance is applied implicitly as Xc'(Xc v)."""
    def deflate(u):
        for b in basis:
            u = u - (u @ b) * b
        return u

    v = deflate(v)
    norm = np.linalg.norm(v)
    if norm == 0:
        return v
    v /= norm
    for _ in range(max_iter):
        w = deflate(Xc.T @ (Xc @ v))
        norm = np.linalg.norm(w)
        if norm == 0:
            return w
        w /= norm
        if w @ v < 0:
            w = -w
        done = np.linalg.norm(w - v) < tol
        v = w
        if done:
            break
    return v


def _orthogonal_fill(u: np.ndarray) -> np.ndarray:
    """Any unit vector orthogonal to ``u`` (used when the data has rank 1)."""
    for j in np.argsort(np.abs(u)):
        e = np.zeros_like(u)
        e[j] = 1.0
        e -= (e @ u) * u
        n = np.linalg.norm(e)
        if n > 1e-8:
            return e / n
    raise DataError("cannot build a second direction")


def pca_project(vectors, labels: Sequence, provider: str = "", tol: float = 1e-9, max_iter: int = 1000,
                seed: int = 0) -> Projection2D:
    """Center, find the top two principal directions, project.

    Each direction comes from power iteration with deflation. A final 2x2
    Rayleigh-Ritz step diagonalizes the covariance inside the found plane,
    so the pair stays orthonormal and correctly ordered even when the two
    leading eigenvalues are close. Each direction is signed so that its
    largest-magnitude entry is positive.
    """
    X = np.asarray([np.asarray(v, dtype=np.float64).reshape(-1) for v in vectors]) if not isinstance(
        vectors, np.ndarray) else np.asarray(vectors, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 3:
        raise DataError("pca needs at least 3 vectors of uniform dimension")
    if X.shape[1] < 2:
        raise DataError("pca needs vectors with at least 2 dimensions")
    labels = [IntentLabel.parse(lab) for lab in labels]
    if len(labels) != X.shape[0]:
        raise DataError(f"{X.shape[0]} vectors but {len(labels)} labels")
    n = X.shape[0]
    Xc = X - X.mean(axis=0)
    total = float(np.einsum("ij,ij->", Xc, Xc)) / n
    if not total > 1e-300:
        raise DegenerateData("all vectors are identical; total variance is zero")

    rng = np.random.default_rng(seed)
    u1 = _power(Xc, rng.standard_normal(X.shape[1]), [], tol, max_iter)
    u2 = _power(Xc, rng.standard_normal(X.shape[1]), [u1], tol, max_iter)
    if np.linalg.norm(u2) == 0:
        u2 = _orthogonal_fill(u1)
    Q = np.stack([u1, u2], axis=1)
    Q, _ = np.linalg.qr(Q)

    P = Xc @ Q
    evals, evecs = np.linalg.eigh(P.T @ P / n)
    order = np.argsort(evals)[::-1]
    evals, evecs = np.maximum(evals[order], 0.0), evecs[:, order]
    comps = (Q @ evecs).T
    for k in range(2):
        if comps[k, np.argmax(np.abs(comps[k]))] < 0:
            comps[k] = -comps[k]
    coords = Xc @ comps.T
    explained = (min(float(evals[0] / total), 1.0), min(float(evals[1] / total), 1.0))
    return Projection2D(coords, labels, explained, comps, provider)
