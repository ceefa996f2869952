"""Text embedding providers.

A provider is either a remote HTTP endpoint speaking the JSON contract

    POST {"texts": [str, ...]}  ->  {"embeddings": [[float, ...], ...]}

or, when no endpoint is configured, a deterministic local embedder that hashes
character 3-grams. Vectors can be cached on disk, keyed by text content.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .dataset import Corpus, IntentLabel, LabeledUtterance, atomic_write_text
from .errors import (BadResponse, ConfigError, DataError, DimMismatch, EmptyText,
                     ProviderUnavailable, TooLong)

RETRY_ATTEMPTS = 3
RETRY_BASE_DELAY = 0.25  # seconds; doubles after each failed attempt


class EmbeddingVector:
    """Immutable, finite vector tagged with the provider that produced it."""

    __slots__ = ("values", "provider_id")

    def __init__(self, values, provider_id: str = ""):
        try:
            arr = np.array(values, dtype=np.float64).reshape(-1)
        except (TypeError, ValueError):
            raise BadResponse("embedding vector has non-numeric entries") from None
        if arr.size == 0:
            raise BadResponse("embedding vector is empty")
        if not np.all(np.isfinite(arr)):
            raise BadResponse("embedding vector has non-finite entries")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "provider_id", provider_id)

    def __setattr__(self, name, value):
        raise AttributeError("EmbeddingVector is immutable")

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def __len__(self) -> int:
        return self.dim

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EmbeddingVector):
            return NotImplemented
        return self.provider_id == other.provider_id and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.provider_id, self.values.tobytes()))

    def __repr__(self) -> str:
        return f"EmbeddingVector(provider_id={self.provider_id!r}, dim={self.dim})"


@dataclass(frozen=True)
class ProviderSpec:
    provider_id: str
    dim: int
    max_chars: int | None = None
    endpoint: str | None = None
    auth_env_var: str | None = None
    # local hash embedder only
    seed: int = 0
    revision: str = "v1"
    timeout: float = 30.0

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigError(f"provider {self.provider_id}: dim must be positive")
        if self.endpoint is None and self.dim < 2:
            raise ConfigError(f"provider {self.provider_id}: local embedder needs dim >= 2")
        if self.max_chars is not None and self.max_chars < 1:
            raise ConfigError(f"provider {self.provider_id}: max_chars must be positive")

    @property
    def is_local(self) -> bool:
        return self.endpoint is None


TITAN_LIKE = ProviderSpec("titan-like", 1536, seed=1)
COHERE_LIKE = ProviderSpec("cohere-like", 1024, max_chars=1500, seed=2)
PRESETS = {p.provider_id: p for p in (TITAN_LIKE, COHERE_LIKE)}


def get_provider(name: str, **overrides) -> ProviderSpec:
    """Look up a preset by id, or build a local one named ``name``.

    ``overrides`` with value None are ignored.
    """
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if name in PRESETS:
        return replace(PRESETS[name], **overrides)
    if "dim" not in overrides:
        raise ConfigError(f"unknown provider {name!r}; give a dim to define a local one")
    return ProviderSpec(provider_id=name, **overrides)


# -- local embedder --------------------------------------------------------

@lru_cache(maxsize=1 << 18)
def _gram_hash(gram: str, seed: int) -> int:
    key = (seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")
    digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8, key=key).digest()
    return int.from_bytes(digest, "little")


def _trigrams(text: str) -> list[str]:
    padded = "\x02" + text.lower() + "\x03"
    return [padded[i:i + 3] for i in range(len(padded) - 2)]


def local_hash_embed(text: str, dim: int, seed: int = 0, provider_id: str = "local-hash") -> EmbeddingVector:
    """Signed feature hashing of lower-cased character 3-grams, L2-normalized."""
    if dim < 2:
        raise ConfigError(f"local embedder needs dim >= 2, got {dim}")
    vec = np.zeros(dim, dtype=np.float64)
    for gram in _trigrams(text):
        h = _gram_hash(gram, seed)
        vec[h % dim] += 1.0 if (h >> 63) & 1 else -1.0
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        # every gram cancelled out (or empty text): fall back to a whole-text bucket
        vec[_gram_hash(text, seed) % dim] = 1.0
        norm = 1.0
    return EmbeddingVector(vec / norm, provider_id)


# -- cache -----------------------------------------------------------------

class EmbeddingCache:
    """Content-addressed vector cache.

    Layout: ``<root>/<provider_id>/<sha256(text)>.json`` holding
    ``{"dim", "values", "revision"}``. A revision mismatch counts as a miss.
    Writes go through a temp file and ``os.replace`` so concurrent writers
    never expose a partial file.
    """

    def __init__(self, root):
        self.root = Path(root)
        self.hits = 0
        self.misses = 0

    def path_for(self, provider_id: str, text: str) -> Path:
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        return self.root / provider_id / f"{digest}.json"

    def get(self, provider: ProviderSpec, text: str) -> EmbeddingVector | None:
        path = self.path_for(provider.provider_id, text)
        try:
            with open(path, encoding="utf-8") as fh:
                rec = json.load(fh)
        except (OSError, json.JSONDecodeError):
            self.misses += 1
            return None
        if (rec.get("revision", provider.revision) != provider.revision
                or rec.get("dim") != provider.dim
                or len(rec.get("values", ())) != provider.dim):
            self.misses += 1
            return None
        self.hits += 1
        return EmbeddingVector(rec["values"], provider.provider_id)

    def put(self, provider: ProviderSpec, text: str, vec: EmbeddingVector) -> None:
        path = self.path_for(provider.provider_id, text)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = json.dumps({"dim": vec.dim, "values": vec.values.tolist(),
                              "revision": provider.revision})
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(payload)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


# -- remote ----------------------------------------------------------------

def _auth_headers(provider: ProviderSpec) -> dict:
    if not provider.auth_env_var:
        return {}
    token = os.environ.get(provider.auth_env_var)
    if not token:
        raise ConfigError(f"provider {provider.provider_id}: environment variable "
                          f"{provider.auth_env_var} is not set")
    return {"Authorization": f"Bearer {token}"}


def _remote_embed(provider: ProviderSpec, texts: list[str], client=None) -> list[list[float]]:
    import httpx

    headers = _auth_headers(provider)
    own_client = client is None
    if own_client:
        client = httpx.Client(timeout=provider.timeout)
    status, body = None, ""
    try:
        for attempt in range(RETRY_ATTEMPTS):
            if attempt:
                time.sleep(RETRY_BASE_DELAY * 2 ** (attempt - 1))
            try:
                resp = client.post(provider.endpoint, json={"texts": texts}, headers=headers)
            except httpx.HTTPError as exc:
                status, body = "connection", str(exc)
                continue
            if resp.status_code == 200:
                break
            status, body = resp.status_code, resp.text
        else:
            raise ProviderUnavailable(status, body)
    finally:
        if own_client:
            client.close()

    try:
        payload = resp.json()
    except ValueError:
        raise BadResponse(f"provider {provider.provider_id}: response is not JSON") from None
    embs = payload.get("embeddings") if isinstance(payload, dict) else None
    if not isinstance(embs, list) or len(embs) != len(texts):
        raise BadResponse(f"provider {provider.provider_id}: expected {len(texts)} embeddings")
    for row in embs:
        if not isinstance(row, list) or len(row) != provider.dim:
            got = len(row) if isinstance(row, list) else type(row).__name__
            raise BadResponse(f"provider {provider.provider_id}: expected dim {provider.dim}, got {got}")
    return embs


# -- public API ------------------------------------------------------------

def embed(provider: ProviderSpec, text: str, cache: EmbeddingCache | None = None,
          client=None) -> EmbeddingVector:
    if not text:
        raise EmptyText()
    if provider.max_chars is not None and len(text) > provider.max_chars:
        raise TooLong(len(text), provider.max_chars)
    if cache is not None:
        hit = cache.get(provider, text)
        if hit is not None:
            return hit
    if provider.is_local:
        vec = local_hash_embed(text, provider.dim, provider.seed, provider.provider_id)
    else:
        (values,) = _remote_embed(provider, [text], client)
        try:
            vec = EmbeddingVector(values, provider.provider_id)
        except BadResponse as exc:
            raise BadResponse(f"provider {provider.provider_id}: {exc}") from None
    if cache is not None:
        cache.put(provider, text, vec)
    return vec


@dataclass(frozen=True)
class SkipRecord:
    index: int
    length: int
    reason: str

    def to_record(self) -> dict:
        return {"index": self.index, "length": self.length, "reason": self.reason}


@dataclass
class EmbeddedCorpus:
    pairs: list[tuple[LabeledUtterance, EmbeddingVector]]
    skipped: list[SkipRecord] = field(default_factory=list)
    indices: list[int] = field(default_factory=list)

    def to_vectors(self, provider_id: str = "") -> "LabeledVectors":
        return LabeledVectors.from_pairs(self.pairs, provider_id=provider_id)


def embed_corpus(provider: ProviderSpec, corpus: Corpus | Sequence[LabeledUtterance],
                 concurrency: int = 1, cache: EmbeddingCache | None = None,
                 client=None) -> EmbeddedCorpus:
    """Embed every utterance, skipping (and reporting) over-limit texts.

    Output order follows corpus order regardless of ``concurrency``.
    """
    if concurrency < 1:
        raise ConfigError("concurrency must be >= 1")
    items = list(corpus)
    keep, skipped = [], []
    for i, u in enumerate(items):
        if provider.max_chars is not None and len(u.text) > provider.max_chars:
            skipped.append(SkipRecord(i, len(u.text), f"longer than {provider.max_chars} characters"))
        else:
            keep.append(i)

    def work(i):
        return embed(provider, items[i].text, cache, client)

    if concurrency == 1 or len(keep) <= 1:
        vectors = [work(i) for i in keep]
    else:
        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            vectors = list(pool.map(work, keep))
    pairs = [(items[i], v) for i, v in zip(keep, vectors)]
    return EmbeddedCorpus(pairs, skipped, keep)


# -- labeled vector sets ---------------------------------------------------

@dataclass
class LabeledVectors:
    """Design matrix plus labels; the interchange type for all trainers."""

    X: np.ndarray
    labels: list[IntentLabel]
    provider_id: str = ""
    texts: list[str] | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        if self.X.ndim != 2:
            raise DataError("X must be a 2-D array")
        self.labels = [IntentLabel.parse(lab) for lab in self.labels]
        if len(self.labels) != self.X.shape[0]:
            raise DataError(f"{self.X.shape[0]} vectors but {len(self.labels)} labels")

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @property
    def y(self) -> np.ndarray:
        """Class indices in ``CLASS_ORDER``."""
        return np.array([lab.index for lab in self.labels], dtype=np.int64)

    def subset(self, idx) -> "LabeledVectors":
        idx = list(idx)
        texts = [self.texts[i] for i in idx] if self.texts is not None else None
        return LabeledVectors(self.X[idx], [self.labels[i] for i in idx], self.provider_id, texts)

    @classmethod
    def from_pairs(cls, pairs: Iterable, provider_id: str = "") -> "LabeledVectors":
        """Build from ``(vector, label)`` or ``(LabeledUtterance, vector)`` pairs."""
        rows, labels, texts = [], [], []
        for a, b in pairs:
            if isinstance(a, LabeledUtterance):
                a, b, text = b, a.label, a.text
            else:
                text = None
            vals = np.asarray(a, dtype=np.float64).reshape(-1)
            if rows and vals.shape[0] != rows[0].shape[0]:
                raise DimMismatch(rows[0].shape[0], vals.shape[0])
            if not provider_id and isinstance(a, EmbeddingVector):
                provider_id = a.provider_id
            rows.append(vals)
            labels.append(b)
            texts.append(text)
        if not rows:
            raise DataError("no labeled vectors given")
        return cls(np.vstack(rows), labels, provider_id,
                   texts if all(t is not None for t in texts) else None)

    def to_jsonl(self) -> str:
        lines = []
        for i, lab in enumerate(self.labels):
            rec = {"label": lab.value, "provider_id": self.provider_id, "values": self.X[i].tolist()}
            if self.texts is not None:
                rec = {"text": self.texts[i], **rec}
            lines.append(json.dumps(rec, ensure_ascii=False))
        return "\n".join(lines) + "\n"

    def save(self, path) -> Path:
        atomic_write_text(path, self.to_jsonl())
        return Path(path)

    @classmethod
    def load(cls, path) -> "LabeledVectors":
        path = Path(path)
        if not path.is_file():
            raise DataError(f"vector file not found: {path}")
        rows, labels, texts, provider_id = [], [], [], ""
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    values, label = rec["values"], rec["label"]
                except (json.JSONDecodeError, KeyError, TypeError):
                    raise DataError(f"{path}:{lineno}: malformed vector record") from None
                rows.append(values)
                labels.append(label)
                texts.append(rec.get("text"))
                provider_id = provider_id or rec.get("provider_id", "")
        if not rows:
            raise DataError(f"{path}: no vectors")
        dims = {len(r) for r in rows}
        if len(dims) != 1:
            other = next(len(r) for r in rows if len(r) != len(rows[0]))
            raise DimMismatch(len(rows[0]), other)
        X = np.array(rows, dtype=np.float64)
        if not np.all(np.isfinite(X)):
            raise DataError(f"{path}: non-finite vector entries")
        return cls(X, labels, provider_id, texts if all(t is not None for t in texts) else None)


def to_arrays(data) -> tuple[np.ndarray, list[IntentLabel]]:
    """Normalize trainer input to ``(X, labels)``.

    Accepts ``LabeledVectors``, an ``(X, labels)`` tuple, or a sequence of
    ``(vector, label)`` pairs.
    """
    if isinstance(data, LabeledVectors):
        return data.X, data.labels
    if isinstance(data, tuple) and len(data) == 2 and isinstance(data[0], np.ndarray) and data[0].ndim == 2:
        lv = LabeledVectors(data[0], list(data[1]))
        return lv.X, lv.labels
    lv = LabeledVectors.from_pairs(data)
    return lv.X, lv.labels


def as_query(query, dim: int) -> np.ndarray:
    x = np.asarray(query, dtype=np.float64).reshape(-1)
    if x.shape[0] != dim:
        raise DimMismatch(dim, x.shape[0])
    return x


def cosine(a, b) -> float:
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    return float(a @ b / (math.sqrt(a @ a) * math.sqrt(b @ b)))
