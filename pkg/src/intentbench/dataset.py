"""Labeled interaction corpora: schema, I/O, stratified splitting and a
synthetic generator with the same three-class imbalance as the production
data."""
from __future__ import annotations

import csv
import enum
import io
import json
import math
import os
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import (BadMix, ClassTooSmall, ConfigError, DataError, EmptyText,
                     MalformedRecord, UnknownLabel)


class IntentLabel(enum.Enum):
    CONVERSATION = "Conversation"
    SERVICES = "Services"
    DOCUMENT_TRANSLATION = "Document_Translation"

    def __str__(self) -> str:
        return self.value

    @property
    def index(self) -> int:
        return CLASS_ORDER.index(self)

    @property
    def priority(self) -> int:
        """Rank used to break ties; lower wins."""
        return TIE_PRIORITY.index(self)

    @classmethod
    def parse(cls, value, lenient: bool = False) -> "IntentLabel":
        """Parse a label string.

        Strict mode accepts the canonical names plus the ``Translate_Document``
        alias. Lenient mode also ignores case and treats spaces, hyphens and
        underscores as equivalent.
        """
        if isinstance(value, IntentLabel):
            return value
        if not isinstance(value, str):
            raise UnknownLabel(value)
        key = value.strip() if lenient else value
        if lenient:
            key = " ".join(key.replace("_", " ").replace("-", " ").split()).lower()
            table = _LENIENT
        else:
            table = _STRICT
        try:
            return table[key]
        except KeyError:
            raise UnknownLabel(value) from None


CLASS_ORDER: tuple[IntentLabel, ...] = (
    IntentLabel.CONVERSATION,
    IntentLabel.SERVICES,
    IntentLabel.DOCUMENT_TRANSLATION,
)
# Conversation dominates traffic, so it wins any tie.
TIE_PRIORITY: tuple[IntentLabel, ...] = (
    IntentLabel.CONVERSATION,
    IntentLabel.DOCUMENT_TRANSLATION,
    IntentLabel.SERVICES,
)
N_CLASSES = len(CLASS_ORDER)

_STRICT = {lab.value: lab for lab in IntentLabel}
_STRICT["Translate_Document"] = IntentLabel.DOCUMENT_TRANSLATION
_LENIENT = {" ".join(k.replace("_", " ").split()).lower(): v for k, v in _STRICT.items()}


def argmax_with_priority(scores: Sequence[float]) -> IntentLabel:
    """Label with the highest score (indexed by ``CLASS_ORDER``); exact ties
    resolve by ``TIE_PRIORITY``."""
    best = None
    for lab in TIE_PRIORITY:
        s = scores[lab.index]
        if best is None or s > scores[best.index]:
            best = lab
    return best


@dataclass(frozen=True)
class LabeledUtterance:
    text: str
    label: IntentLabel

    def to_record(self) -> dict:
        return {"text": self.text, "label": self.label.value}


@dataclass
class Corpus:
    items: list[LabeledUtterance]
    provenance: str = field(default="", compare=False)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[LabeledUtterance]:
        return iter(self.items)

    def __getitem__(self, i):
        return self.items[i]

    @property
    def texts(self) -> list[str]:
        return [u.text for u in self.items]

    @property
    def labels(self) -> list[IntentLabel]:
        return [u.label for u in self.items]

    def class_counts(self) -> dict[IntentLabel, int]:
        counts = Counter(u.label for u in self.items)
        return {lab: counts.get(lab, 0) for lab in CLASS_ORDER}


@dataclass(frozen=True)
class SplitConfig:
    train_fraction: float = 0.40
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(f"train_fraction must be in (0, 1), got {self.train_fraction}")


# -- I/O -------------------------------------------------------------------

def _detect_format(path: Path, fmt: str | None) -> str:
    if fmt is not None:
        fmt = fmt.lower()
    elif path.suffix.lower() == ".csv":
        fmt = "csv"
    else:
        fmt = "jsonl"
    if fmt not in ("jsonl", "csv"):
        raise ConfigError(f"unsupported corpus format {fmt!r}")
    return fmt


def _make_utterance(text, label, line: int) -> LabeledUtterance:
    if not isinstance(text, str):
        raise MalformedRecord(line, "field 'text' must be a string")
    if not isinstance(label, str):
        raise MalformedRecord(line, "field 'label' must be a string")
    if not text.strip():
        raise EmptyText(line)
    try:
        lab = IntentLabel.parse(label)
    except UnknownLabel:
        raise UnknownLabel(label, line) from None
    return LabeledUtterance(text, lab)


def _iter_jsonl(fh) -> Iterator[LabeledUtterance]:
    for lineno, line in enumerate(fh, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(lineno, f"invalid JSON ({exc.msg})") from None
        if not isinstance(rec, dict):
            raise MalformedRecord(lineno, "record is not a JSON object")
        missing = [k for k in ("text", "label") if k not in rec]
        if missing:
            raise MalformedRecord(lineno, f"missing field(s) {', '.join(missing)}")
        yield _make_utterance(rec["text"], rec["label"], lineno)


def _iter_csv(fh) -> Iterator[LabeledUtterance]:
    reader = csv.DictReader(fh)
    if reader.fieldnames is None or not {"text", "label"} <= set(reader.fieldnames):
        raise MalformedRecord(1, "CSV header must contain 'text' and 'label'")
    for row in reader:
        if None in row or row.get("text") is None or row.get("label") is None:
            raise MalformedRecord(reader.line_num, "wrong number of columns")
        yield _make_utterance(row["text"], row["label"], reader.line_num)


def load_corpus(path, fmt: str | None = None) -> Corpus:
    path = Path(path)
    fmt = _detect_format(path, fmt)
    if not path.is_file():
        raise DataError(f"corpus file not found: {path}")
    try:
        with open(path, encoding="utf-8", newline="" if fmt == "csv" else None) as fh:
            items = list(_iter_jsonl(fh) if fmt == "jsonl" else _iter_csv(fh))
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: not valid UTF-8 ({exc.reason})") from None
    return Corpus(items, provenance=str(path))


def dumps_corpus(corpus: Corpus | Iterable[LabeledUtterance], fmt: str = "jsonl") -> str:
    if fmt == "jsonl":
        return "".join(json.dumps(u.to_record(), ensure_ascii=False) + "\n" for u in corpus)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(["text", "label"])
    for u in corpus:
        if "\x00" in u.text:
            raise DataError("CSV cannot hold NUL characters; use JSONL")
        writer.writerow([u.text, u.label.value])
    return buf.getvalue()


def save_corpus(corpus: Corpus | Iterable[LabeledUtterance], path, fmt: str | None = None) -> Path:
    path = Path(path)
    fmt = _detect_format(path, fmt)
    atomic_write_text(path, dumps_corpus(corpus, fmt))
    return path


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


# -- splitting -------------------------------------------------------------

def largest_remainder(weights: Sequence[float], total: int) -> list[int]:
    """Integer apportionment of ``total`` proportional to ``weights``.

    Floors first, then hands the leftover units to the largest fractional
    parts (earlier index wins on equal remainders).
    """
    wsum = float(sum(weights))
    exact = [w * total / wsum for w in weights]
    counts = [math.floor(x) for x in exact]
    leftover = total - sum(counts)
    order = sorted(range(len(weights)), key=lambda i: (-(exact[i] - counts[i]), i))
    for i in order[:leftover]:
        counts[i] += 1
    return counts


def stratified_indices(labels: Sequence[IntentLabel], cfg: SplitConfig) -> set[int]:
    """Indices drawn into the train side.

    Per class: floor of the class quota, then leftover units up to
    ``round(train_fraction * n)`` go to the classes with the largest
    fractional remainders. Members are chosen by a seeded shuffle.
    """
    rng = random.Random(cfg.seed)
    n = len(labels)
    target = int(math.floor(cfg.train_fraction * n + 0.5))
    chosen: set[int] = set()
    if not cfg.stratified:
        idx = list(range(n))
        rng.shuffle(idx)
        return set(idx[:target])

    groups: dict[IntentLabel, list[int]] = {lab: [] for lab in CLASS_ORDER}
    for i, lab in enumerate(labels):
        groups[lab].append(i)
    present = [lab for lab in CLASS_ORDER if groups[lab]]
    for lab in present:
        if len(groups[lab]) < 2:
            raise ClassTooSmall(f"class {lab} has {len(groups[lab])} member(s); need at least 2 to stratify")
    exact = [cfg.train_fraction * len(groups[lab]) for lab in present]
    quota = [math.floor(x) for x in exact]
    order = sorted(range(len(present)), key=lambda j: (-(exact[j] - quota[j]), j))
    for j in order[:max(target - sum(quota), 0)]:
        quota[j] += 1
    for lab, q in zip(present, quota):
        idx = list(groups[lab])
        rng.shuffle(idx)
        chosen.update(idx[:q])
    return chosen


def stratified_split(corpus: Corpus, cfg: SplitConfig = SplitConfig()) -> tuple[Corpus, Corpus]:
    """Split into (train, test). Both halves keep the corpus order."""
    chosen = stratified_indices(corpus.labels, cfg)
    train = [u for i, u in enumerate(corpus.items) if i in chosen]
    test = [u for i, u in enumerate(corpus.items) if i not in chosen]
    return (Corpus(train, f"{corpus.provenance}#train"),
            Corpus(test, f"{corpus.provenance}#test"))


# -- synthetic corpus ------------------------------------------------------

# Training-set class sizes of the production corpus (Conversation, Services,
# Document_Translation).
PAPER_TRAIN_COUNTS = (500, 26, 140)
DEFAULT_MIX = tuple(c / sum(PAPER_TRAIN_COUNTS) for c in PAPER_TRAIN_COUNTS)


def synthesize_corpus(n_total: int, class_mix: Sequence[float] = DEFAULT_MIX, seed: int = 0) -> Corpus:
    """Generate a labeled corpus from per-class template families with
    lexical noise. Deterministic for a given seed."""
    mix = [float(x) for x in class_mix]
    if len(mix) != N_CLASSES:
        raise BadMix(f"class mix needs {N_CLASSES} fractions, got {len(mix)}")
    if any(not math.isfinite(x) or x < 0 for x in mix):
        raise BadMix(f"class mix fractions must be finite and non-negative: {mix}")
    if abs(sum(mix) - 1.0) > 1e-9:
        raise BadMix(f"class mix must sum to 1, sums to {sum(mix)!r}")
    if n_total < 3:
        raise BadMix(f"n_total must be at least 3, got {n_total}")

    from . import _templates

    rng = random.Random(seed)
    counts = largest_remainder(mix, n_total)
    items = []
    for lab, count in zip(CLASS_ORDER, counts):
        for _ in range(count):
            items.append(LabeledUtterance(_templates.generate(lab, rng), lab))
    rng.shuffle(items)
    return Corpus(items, provenance=f"synthetic:{seed}")
