"""Question-answer (QA) elicitation engine.

A worker picks one sentence to build a question from (the other sentence is
the answer), chooses a question prefix and completes the question freely.
Only (prefix, question_source) determine the sense: symmetric prefixes fix
the sense outright, directed prefixes resolve arg1-as-X vs arg2-as-X from
which side of the pair carries the elaborating/denying/etc. argument.
Question and answer text are stored verbatim for audit but never parsed.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import DuplicateVote, ParseError, UnknownPrefix
from .taxonomy import Sense, SenseVocabulary, default_vocabulary

QUESTION_SOURCES = ("s1", "s2")


@dataclass(frozen=True)
class PrefixEntry:
    prefix: str
    directed: bool
    sense: Sense | None = None      # symmetric entries: the fixed sense
    family: str | None = None       # directed entries: vocabulary suffix
    as_x_side: str | None = None    # "question" | "answer"
    reconstructed: bool = False


class PrefixInventory:
    """Question prefix -> sense-resolution rules; content-hash versioned."""

    def __init__(self, entries: list[PrefixEntry], version: str,
                 vocab: SenseVocabulary | None = None):
        self.vocab = vocab or default_vocabulary()
        self.entries = {e.prefix: e for e in entries}
        self.version = version
        for e in entries:
            if e.directed:
                for n in ("1", "2"):
                    sid = f"arg{n}-as-{e.family}"
                    if sid not in self.vocab:
                        raise ParseError(f"prefix {e.prefix!r}: {sid} not in vocabulary")
                if e.as_x_side not in ("question", "answer"):
                    raise ParseError(f"prefix {e.prefix!r}: bad as_x_side {e.as_x_side!r}")
            elif e.sense is None:
                raise ParseError(f"prefix {e.prefix!r}: symmetric entry needs a sense")

    def __contains__(self, prefix: str) -> bool:
        return prefix in self.entries

    def get(self, prefix: str) -> PrefixEntry:
        try:
            return self.entries[prefix]
        except KeyError:
            raise UnknownPrefix(
                f"unknown prefix {prefix!r} (inventory {self.version})") from None

    def reachable_senses(self) -> frozenset[str]:
        out = set()
        for e in self.entries.values():
            if e.directed:
                out |= {f"arg1-as-{e.family}", f"arg2-as-{e.family}"}
            else:
                out.add(e.sense.id)
        return frozenset(out)

    def unreachable_senses(self) -> frozenset[str]:
        return frozenset(self.vocab.labels) - self.reachable_senses()


def load_inventory(path: str | Path | None = None,
                   vocab: SenseVocabulary | None = None) -> PrefixInventory:
    vocab = vocab or default_vocabulary()
    if path is None:
        raw = resources.files("drdistill.data").joinpath("qa_prefixes.json").read_bytes()
    else:
        raw = Path(path).read_bytes()
    version = hashlib.sha256(raw).hexdigest()[:16]
    doc = json.loads(raw.decode("utf-8"))
    entries = []
    for rec in doc["entries"]:
        entries.append(PrefixEntry(
            prefix=rec["prefix"],
            directed=bool(rec["directed"]),
            sense=vocab.parse_sense(rec["sense"]) if rec.get("sense") else None,
            family=rec.get("family"),
            as_x_side=rec.get("as_x_side"),
            reconstructed=bool(rec.get("reconstructed", False)),
        ))
    return PrefixInventory(entries, version=version, vocab=vocab)


@dataclass(frozen=True)
class QaSubmission:
    item_id: str
    question_source: str  # "s1" | "s2": which sentence the question embeds
    prefix: str
    question_text: str = ""
    answer_text: str = ""

    def __post_init__(self):
        if self.question_source not in QUESTION_SOURCES:
            raise ValueError(f"question_source must be one of {QUESTION_SOURCES}")


def resolve_qa(sub: QaSubmission, inv: PrefixInventory) -> Sense:
    """Map a submission to its sense.

    Symmetric prefixes ignore question_source (both formulations of the pair
    are equivalent). Directed prefixes pick argN-as-X, where N is the side
    named by the entry's as_x_side rule.
    """
    entry = inv.get(sub.prefix)
    if not entry.directed:
        return entry.sense
    if entry.as_x_side == "question":
        as_x = sub.question_source
    else:
        as_x = "s2" if sub.question_source == "s1" else "s1"
    n = "1" if as_x == "s1" else "2"
    return inv.vocab.get(f"arg{n}-as-{entry.family}")


def equivalent_formulations(a: QaSubmission, b: QaSubmission,
                            inv: PrefixInventory) -> bool:
    """True iff the two submissions for one item resolve to the same sense."""
    if a.item_id != b.item_id:
        raise ValueError("submissions are for different items")
    return resolve_qa(a, inv) == resolve_qa(b, inv)


def raw_payload(sub: QaSubmission, inv: PrefixInventory) -> dict:
    return {
        "question_source": sub.question_source,
        "prefix": sub.prefix,
        "question_text": sub.question_text,
        "answer_text": sub.answer_text,
        "inventory_version": inv.version,
    }


def map_qa_vote(payload: dict, inv: PrefixInventory) -> Sense:
    """Re-map an archived raw QA payload; identical to the live resolution."""
    sub = QaSubmission(
        item_id=payload.get("item_id", "<replay>"),
        question_source=payload["question_source"],
        prefix=payload["prefix"],
        question_text=payload.get("question_text", ""),
        answer_text=payload.get("answer_text", ""),
    )
    try:
        return resolve_qa(sub, inv)
    except UnknownPrefix:
        raise UnknownPrefix(
            f"prefix {payload['prefix']!r} unknown to inventory {inv.version} "
            f"(payload recorded under {payload.get('inventory_version', 'unknown')})") from None


class SubmissionLog:
    """One sense per (item, worker): rejects a second submission atomically."""

    def __init__(self):
        self._seen: set[tuple[str, str]] = set()
        self._lock = threading.Lock()

    def record(self, item_id: str, worker_id: str):
        key = (item_id, worker_id)
        with self._lock:
            if key in self._seen:
                raise DuplicateVote(f"worker {worker_id!r} already annotated {item_id!r}")
            self._seen.add(key)
