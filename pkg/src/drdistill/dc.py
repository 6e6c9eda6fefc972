"""Connective-insertion (DC) elicitation engine.

Two steps per item: the worker types a free-text connective; the engine
answers with a disambiguation list generated from the connective bank (or a
default list of twelve when the insertion matches no bank entry); the
worker's pick from that list fixes the sense.

The bank is research data, shipped as a JSON file and versioned by content
hash; the engine never hard-codes connective/sense pairs.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ChoiceNotInList, EmptyInput, ParseError, SessionStateError
from .taxonomy import Sense, SenseVocabulary, default_vocabulary


def normalize_connective(raw: str) -> str:
    """Lowercase, trim, collapse whitespace, strip trailing punctuation.

    Normalization is not spell-correction: unknown forms stay unknown.
    """
    if raw is None or not raw.strip():
        raise EmptyInput("connective must be non-empty")
    text = re.sub(r"\s+", " ", raw.strip().lower())
    return text.rstrip(".,;:!?")


class ConnectiveBank:
    """Canonical connective -> disambiguation list, plus the default list."""

    def __init__(self, default_list: list[tuple[str, Sense]],
                 entries: dict[str, list[tuple[str, Sense]]], version: str):
        if len(default_list) != 12:
            raise ParseError(f"default list must have 12 entries, got {len(default_list)}")
        self.default_list = tuple(default_list)
        self.entries = {k: tuple(v) for k, v in entries.items()}
        self.version = version
        for name, options in list(self.entries.items()) + [("<default>", self.default_list)]:
            senses = [s.id for _, s in options]
            if len(set(senses)) != len(senses):
                raise ParseError(f"entry {name!r}: disambiguation options map to duplicate senses")

    def list_for(self, raw_connective: str) -> tuple[tuple[str, Sense], ...]:
        """Disambiguation list for a normalized first-step connective."""
        return self.entries.get(normalize_connective(raw_connective), self.default_list)

    def reachable_senses(self) -> frozenset[str]:
        out = {s.id for _, s in self.default_list}
        for options in self.entries.values():
            out |= {s.id for _, s in options}
        return frozenset(out)

    def unreachable_senses(self, vocab: SenseVocabulary) -> frozenset[str]:
        """Vocabulary senses no DC flow can produce under this bank."""
        return frozenset(vocab.labels) - self.reachable_senses()


def load_bank(path: str | Path | None = None,
              vocab: SenseVocabulary | None = None) -> ConnectiveBank:
    vocab = vocab or default_vocabulary()
    if path is None:
        raw = resources.files("drdistill.data").joinpath("connective_bank.json").read_bytes()
    else:
        raw = Path(path).read_bytes()
    version = hashlib.sha256(raw).hexdigest()[:16]
    doc = json.loads(raw.decode("utf-8"))
    def parse_options(options):
        return [(normalize_connective(c), vocab.parse_sense(s)) for c, s in options]
    default_list = parse_options(doc["default_list"])
    entries = {normalize_connective(k): parse_options(v)
               for k, v in doc.get("entries", {}).items()}
    return ConnectiveBank(default_list, entries, version=version)


AWAITING_STEP1 = "awaiting_step1"
AWAITING_STEP2 = "awaiting_step2"
COMPLETE = "complete"


@dataclass
class DcSession:
    """Forward-only state machine for one item's DC annotation."""

    item_id: str
    state: str = AWAITING_STEP1
    step1_text: str | None = None
    presented_list: tuple[tuple[str, Sense], ...] | None = None
    chosen: Sense | None = None


def step1(session: DcSession, raw_connective: str, bank: ConnectiveBank):
    """Record the free-text connective and return the disambiguation list."""
    if session.state != AWAITING_STEP1:
        raise SessionStateError(f"step1 called in state {session.state}")
    presented = bank.list_for(raw_connective)
    session.step1_text = raw_connective
    session.presented_list = presented
    session.state = AWAITING_STEP2
    return presented


def step2(session: DcSession, choice: str, bank: ConnectiveBank) -> Sense:
    """Resolve the chosen disambiguating connective to a sense."""
    if session.state != AWAITING_STEP2:
        raise SessionStateError(f"step2 called in state {session.state}")
    norm = normalize_connective(choice)
    for conn, sense in session.presented_list:
        if conn == norm:
            session.chosen = sense
            session.state = COMPLETE
            return sense
    raise ChoiceNotInList(
        f"{choice!r} is not among the presented options (bank {bank.version})")


def raw_payload(session: DcSession, bank: ConnectiveBank) -> dict:
    """Vote payload for a completed session, for audit and batch re-mapping."""
    if session.state != COMPLETE:
        raise SessionStateError("session not complete")
    return {
        "step1_text": session.step1_text,
        "choice": next(c for c, s in session.presented_list if s == session.chosen),
        "bank_version": bank.version,
    }


def map_dc_vote(payload: dict, bank: ConnectiveBank) -> Sense:
    """Re-map an archived raw DC payload through the given bank version.

    Deterministic: identical to what a live session would produce.
    """
    session = DcSession(item_id=payload.get("item_id", "<replay>"))
    step1(session, payload["step1_text"], bank)
    try:
        return step2(session, payload["choice"], bank)
    except ChoiceNotInList:
        raise ChoiceNotInList(
            f"choice {payload['choice']!r} not reachable under bank {bank.version} "
            f"(payload recorded under {payload.get('bank_version', 'unknown')})") from None
