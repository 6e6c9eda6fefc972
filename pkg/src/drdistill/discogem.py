"""Import adapter for the published DiscoGeM-style CSV release layout.

The release stores one row per item with per-worker sense columns. Column
naming has drifted across versions, so the adapter resolves names through
candidate lists (overridable) and treats any column matching the worker
pattern as one worker's sense vote. Everything release-specific stays in
this module; the rest of the toolkit only sees ``RelationItem``/``Vote``.
"""

from __future__ import annotations

import csv
import re
from pathlib import Path

from .corpus import Corpus, RelationItem, Vote
from .errors import ParseError, UnknownLabel
from .taxonomy import SenseVocabulary, default_vocabulary

ITEM_ID_COLUMNS = ("itemid", "item_id", "id")
GENRE_COLUMNS = ("genre", "domain", "corpus", "subcorpus")
ARG1_COLUMNS = ("arg1", "arg1_text", "s1", "sentence1")
ARG2_COLUMNS = ("arg2", "arg2_text", "s2", "sentence2")
CONTEXT_COLUMNS = ("context", "precontext", "prior_context")
REFERENCE_COLUMNS = ("reference", "gold", "majority_softlabel", "ref_labels")

WORKER_COLUMN = re.compile(r"(?i)^(worker|ann(otator)?|sense)[_ ]?(\d+)$")

_GENRE_ALIASES = {
    "wiki": "wikipedia",
    "literature": "novel",
    "lit": "novel",
    "ep": "europarl",
    "wsj": "pdtb",
}


def _pick(fieldnames, candidates):
    lowered = {f.lower(): f for f in fieldnames}
    for c in candidates:
        if c in lowered:
            return lowered[c]
    return None


def _normalize_genre(raw: str) -> str:
    g = raw.strip().lower()
    return _GENRE_ALIASES.get(g, g)


def load_discogem_csv(path: str | Path, method: str = "dc",
                      vocab: SenseVocabulary | None = None,
                      skip_unknown_labels: bool = False) -> Corpus:
    """Load a DiscoGeM-layout CSV into a Corpus, votes assigned to ``method``.

    Belief/speech-act sense variants are merged into their general senses.
    With ``skip_unknown_labels`` the adapter drops unmappable votes instead of
    failing (useful for release subsets carrying retired labels).
    """
    vocab = vocab or default_vocabulary()
    path = Path(path)
    items: list[RelationItem] = []
    votes: list[Vote] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames:
            raise ParseError("empty CSV", path=str(path))
        id_col = _pick(reader.fieldnames, ITEM_ID_COLUMNS)
        if id_col is None:
            raise ParseError(f"no item-id column among {ITEM_ID_COLUMNS}", path=str(path))
        genre_col = _pick(reader.fieldnames, GENRE_COLUMNS)
        a1_col = _pick(reader.fieldnames, ARG1_COLUMNS)
        a2_col = _pick(reader.fieldnames, ARG2_COLUMNS)
        ctx_col = _pick(reader.fieldnames, CONTEXT_COLUMNS)
        ref_col = _pick(reader.fieldnames, REFERENCE_COLUMNS)
        worker_cols = [f for f in reader.fieldnames if WORKER_COLUMN.match(f)]
        if not worker_cols:
            raise ParseError("no per-worker sense columns found", path=str(path))
        for line_no, row in enumerate(reader, start=2):
            item_id = row[id_col].strip()
            reference = None
            if ref_col and row.get(ref_col, "").strip():
                labels = re.split(r"[;,|]", row[ref_col])
                ref = set()
                for lab in labels:
                    lab = lab.strip()
                    if not lab:
                        continue
                    try:
                        ref.add(vocab.get(vocab.merge_belief_speechact(lab)))
                    except UnknownLabel:
                        if not skip_unknown_labels:
                            raise ParseError(f"unknown reference label {lab!r}",
                                             line_no=line_no, path=str(path)) from None
                reference = frozenset(ref) or None
            items.append(RelationItem(
                item_id=item_id,
                genre=_normalize_genre(row[genre_col]) if genre_col else "unknown",
                s1=row[a1_col] if a1_col else "<unavailable>",
                s2=row[a2_col] if a2_col else "<unavailable>",
                context=row.get(ctx_col) if ctx_col else None,
                reference=reference,
            ))
            for col in worker_cols:
                raw = (row.get(col) or "").strip()
                if not raw:
                    continue
                try:
                    sense = vocab.get(vocab.merge_belief_speechact(raw))
                except UnknownLabel:
                    if skip_unknown_labels:
                        continue
                    raise ParseError(f"unknown sense {raw!r} in column {col}",
                                     line_no=line_no, path=str(path)) from None
                votes.append(Vote(item_id=item_id, method=method,
                                  worker_id=f"{path.stem}:{col}", sense=sense))
    return Corpus(items, votes, vocab=vocab)
