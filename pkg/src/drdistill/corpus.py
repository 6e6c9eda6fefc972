"""Corpus data model and I/O: items, votes, vote sets, label distributions.

Items and votes are line-delimited JSON (UTF-8). The corpus is immutable
after loading; all analytics over it are read-only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

import numpy as np

from .errors import (AllMinority, DanglingVote, DuplicateWorkerVote, EmptySet,
                     NotNormalized, ParseError)
from .taxonomy import Sense, SenseVocabulary, default_vocabulary

CANONICAL_GENRES = ("europarl", "novel", "wikipedia", "pdtb")
METHODS = ("dc", "qa")


@dataclass(frozen=True)
class RelationItem:
    item_id: str
    genre: str
    s1: str
    s2: str
    context: str | None = None
    reference: frozenset[Sense] | None = None

    def __post_init__(self):
        if not self.s1 or not self.s2:
            raise ValueError(f"item {self.item_id}: s1 and s2 must be non-empty")
        if self.reference is not None and not self.reference:
            raise ValueError(f"item {self.item_id}: reference set must be non-empty if present")


@dataclass(frozen=True)
class Vote:
    item_id: str
    method: str  # "dc" | "qa"
    worker_id: str
    sense: Sense
    raw: dict | None = None


@dataclass(frozen=True)
class VoteSet:
    """All votes for one item under one method, as a count multiset."""

    item_id: str
    method: str
    counts: dict[Sense, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def distribution(self, vocab: SenseVocabulary | None = None) -> "LabelDistribution":
        vocab = vocab or default_vocabulary()
        counts = np.zeros(len(vocab), dtype=np.int64)
        for sense, c in self.counts.items():
            counts[vocab.index(sense)] = c
        return LabelDistribution.from_counts(counts)


@dataclass(frozen=True)
class SubLabelSet:
    """Labels surviving minority filtering for one item/method."""

    labels: frozenset[Sense]
    removed_mass: float = 0.0

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def ids(self) -> frozenset[str]:
        return frozenset(s.id for s in self.labels)


@dataclass(frozen=True)
class LabelDistribution:
    """Probability vector over the vocabulary, raw counts retained."""

    counts: np.ndarray
    probs: np.ndarray
    transform: str | None = None  # None (plain counts), "flatten", "softmax"

    @classmethod
    def from_counts(cls, counts: np.ndarray) -> "LabelDistribution":
        counts = np.asarray(counts, dtype=np.int64)
        total = counts.sum()
        if total <= 0:
            raise EmptySet("cannot normalize an all-zero count vector")
        return cls(counts=counts, probs=counts / total)

    def validate_normalized(self, tol: float = 1e-9):
        if abs(float(self.probs.sum()) - 1.0) > tol:
            raise NotNormalized(f"probs sum to {self.probs.sum()!r}")


def flatten(labels: SubLabelSet | Iterable[Sense],
            vocab: SenseVocabulary | None = None) -> LabelDistribution:
    """Uniform distribution over the given labels, zero elsewhere."""
    vocab = vocab or default_vocabulary()
    senses = list(labels.labels if isinstance(labels, SubLabelSet) else labels)
    if not senses:
        raise EmptySet("cannot flatten an empty label set")
    counts = np.zeros(len(vocab), dtype=np.int64)
    probs = np.zeros(len(vocab), dtype=float)
    for s in senses:
        counts[vocab.index(s)] = 1
        probs[vocab.index(s)] = 1.0 / len(senses)
    return LabelDistribution(counts=counts, probs=probs, transform="flatten")


def filter_minority(vs: VoteSet, min_votes: int = 2,
                    fraction: float | None = None) -> SubLabelSet:
    """Labels with at least ``min_votes`` votes (or ``fraction`` of the total).

    Raises AllMinority when nothing survives; the caller decides the fallback
    (report the item as having no stable label) rather than silently keeping
    singletons.
    """
    if vs.total < 1:
        raise EmptySet(f"vote set for {vs.item_id} is empty")
    threshold = min_votes if fraction is None else fraction * vs.total
    surviving = {s: c for s, c in vs.counts.items() if c >= threshold}
    if not surviving:
        raise AllMinority(f"item {vs.item_id} ({vs.method}): every label is a minority")
    removed = vs.total - sum(surviving.values())
    return SubLabelSet(labels=frozenset(surviving), removed_mass=removed / vs.total)


def filtered_distribution(vs: VoteSet, min_votes: int = 2,
                          vocab: SenseVocabulary | None = None) -> LabelDistribution:
    """Minority-filtered counts renormalized to a distribution."""
    vocab = vocab or default_vocabulary()
    sub = filter_minority(vs, min_votes=min_votes)
    counts = np.zeros(len(vocab), dtype=np.int64)
    for s in sub.labels:
        counts[vocab.index(s)] = vs.counts[s]
    return LabelDistribution.from_counts(counts)


class Corpus:
    """Validated items plus per-(item, method) vote sets. Immutable after load."""

    def __init__(self, items: list[RelationItem], votes: list[Vote],
                 vocab: SenseVocabulary | None = None):
        self.vocab = vocab or default_vocabulary()
        self.items: dict[str, RelationItem] = {}
        for it in items:
            if it.item_id in self.items:
                raise ParseError(f"duplicate item_id {it.item_id!r}")
            self.items[it.item_id] = it
        self.votes: list[Vote] = list(votes)
        seen: set[tuple[str, str, str]] = set()
        counts: dict[tuple[str, str], dict[Sense, int]] = {}
        for v in self.votes:
            if v.item_id not in self.items:
                raise DanglingVote(f"vote references unknown item {v.item_id!r}")
            key = (v.item_id, v.method, v.worker_id)
            if key in seen:
                raise DuplicateWorkerVote(
                    f"worker {v.worker_id!r} voted twice on {v.item_id!r} ({v.method})")
            seen.add(key)
            bucket = counts.setdefault((v.item_id, v.method), {})
            bucket[v.sense] = bucket.get(v.sense, 0) + 1
        self.vote_sets: dict[tuple[str, str], VoteSet] = {
            (iid, m): VoteSet(item_id=iid, method=m, counts=c)
            for (iid, m), c in counts.items()
        }

    def vote_set(self, item_id: str, method: str) -> VoteSet | None:
        return self.vote_sets.get((item_id, method))

    def items_with_method(self, method: str) -> list[RelationItem]:
        return [self.items[iid] for (iid, m) in self.vote_sets if m == method]

    def genres(self) -> list[str]:
        return sorted({it.genre for it in self.items.values()})

    def sublabels(self, method: str, min_votes: int = 2) -> dict[str, SubLabelSet]:
        """Per-item minority-filtered label sets; items failing the filter are skipped."""
        out: dict[str, SubLabelSet] = {}
        for (iid, m), vs in self.vote_sets.items():
            if m != method:
                continue
            try:
                out[iid] = filter_minority(vs, min_votes=min_votes)
            except AllMinority:
                continue
        return out


def sublabels_per_item(corpus: Corpus, method: str, min_votes: int = 2) -> float:
    """Mean number of sub-labels per item for one method."""
    subs = corpus.sublabels(method, min_votes=min_votes)
    if not subs:
        raise EmptySet(f"no vote sets for method {method!r}")
    return float(np.mean([len(s) for s in subs.values()]))


def mean_removed_mass(corpus: Corpus, method: str, min_votes: int = 2) -> float:
    """Mean fraction of votes removed by minority filtering."""
    masses = []
    for (iid, m), vs in corpus.vote_sets.items():
        if m != method:
            continue
        try:
            masses.append(filter_minority(vs, min_votes=min_votes).removed_mass)
        except AllMinority:
            masses.append(1.0)
    if not masses:
        raise EmptySet(f"no vote sets for method {method!r}")
    return float(np.mean(masses))


# ---------------------------------------------------------------------------
# JSON-lines I/O
#
# items file, one JSON object per line:
#   {"item_id": str, "genre": str, "s1": str, "s2": str,
#    "context": str?, "reference": [label, ...]?}
# votes file, one JSON object per line:
#   {"item_id": str, "method": "dc"|"qa", "worker_id": str, "sense": label,
#    "raw": object?}
# ---------------------------------------------------------------------------

def _iter_jsonl(source: str | Path | IO[str]):
    if hasattr(source, "read"):
        lines = source.read().splitlines()
        name = getattr(source, "name", "<stream>")
    else:
        lines = Path(source).read_text("utf-8").splitlines()
        name = str(source)
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            yield line_no, name, json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e}", line_no=line_no, path=name) from None


def load_items(source, vocab: SenseVocabulary | None = None) -> list[RelationItem]:
    vocab = vocab or default_vocabulary()
    items = []
    for line_no, name, rec in _iter_jsonl(source):
        try:
            reference = None
            if rec.get("reference"):
                reference = frozenset(vocab.parse_sense(r) for r in rec["reference"])
            items.append(RelationItem(
                item_id=str(rec["item_id"]),
                genre=str(rec.get("genre", "unknown")),
                s1=rec["s1"],
                s2=rec["s2"],
                context=rec.get("context"),
                reference=reference,
            ))
        except (KeyError, ValueError, TypeError) as e:
            raise ParseError(f"bad item record: {e}", line_no=line_no, path=name) from None
    return items


def load_votes(source, vocab: SenseVocabulary | None = None) -> list[Vote]:
    vocab = vocab or default_vocabulary()
    votes = []
    for line_no, name, rec in _iter_jsonl(source):
        try:
            method = rec["method"]
            if method not in METHODS:
                raise ValueError(f"unknown method {method!r}")
            votes.append(Vote(
                item_id=str(rec["item_id"]),
                method=method,
                worker_id=str(rec["worker_id"]),
                sense=vocab.parse_sense(rec["sense"]),
                raw=rec.get("raw"),
            ))
        except (KeyError, ValueError, TypeError) as e:
            raise ParseError(f"bad vote record: {e}", line_no=line_no, path=name) from None
    return votes


def load_corpus(items_source, votes_source,
                vocab: SenseVocabulary | None = None) -> Corpus:
    vocab = vocab or default_vocabulary()
    return Corpus(load_items(items_source, vocab), load_votes(votes_source, vocab),
                  vocab=vocab)


def dump_items(items: Iterable[RelationItem], fh: IO[str]):
    for it in items:
        rec = {"item_id": it.item_id, "genre": it.genre, "s1": it.s1, "s2": it.s2}
        if it.context is not None:
            rec["context"] = it.context
        if it.reference is not None:
            rec["reference"] = sorted(s.id for s in it.reference)
        fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def dump_votes(votes: Iterable[Vote], fh: IO[str]):
    for v in votes:
        rec = {"item_id": v.item_id, "method": v.method,
               "worker_id": v.worker_id, "sense": v.sense.id}
        if v.raw is not None:
            rec["raw"] = v.raw
        fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
