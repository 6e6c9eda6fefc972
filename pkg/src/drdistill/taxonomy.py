"""PDTB 3.0 sense taxonomy: the flat 30-label vocabulary and hierarchy lookups.

The vocabulary ships as a reviewed data file (``data/vocabulary.tsv``) so the
label order, level-2 grouping and direction semantics live in one place. A
different taxonomy file can be supplied for forward compatibility.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ParseError, UnknownLabel

LEVEL1_CLASSES = {"temporal", "contingency", "comparison", "expansion", "special"}

# Labels that are annotatable but carry no level-2 class or direction.
SPECIAL_LABELS = ("norel", "differentcon")

# Accepted spellings that are not the canonical ids themselves.
_ALIASES = {
    "arg1-as-substitution": "arg1-as-subst",
    "arg2-as-substitution": "arg2-as-subst",
    "arg1-as-exception": "arg1-as-excpt",
    "arg2-as-exception": "arg2-as-excpt",
    "arg1-as-condition": "arg1-as-cond",
    "arg2-as-condition": "arg2-as-cond",
    "arg1-as-negative-condition": "arg1-as-negcond",
    "arg2-as-negative-condition": "arg2-as-negcond",
    "arg1-as-neg-cond": "arg1-as-negcond",
    "arg2-as-neg-cond": "arg2-as-negcond",
    "instantiation": "arg2-as-instance",
    "level-of-detail": "arg2-as-detail",
    "no-relation": "norel",
    "different-connective": "differentcon",
}

_BELIEF_SPEECHACT = re.compile(r"[+\-.](belief|speechact|speech-act)$")


@dataclass(frozen=True)
class Sense:
    """One node of the flat sense vocabulary."""

    id: str
    level1: str
    level2: str | None
    direction: str | None  # "arg1" | "arg2" | "symmetric" | None (special)

    def __str__(self):
        return self.id


class SenseVocabulary:
    """The closed, ordered 30-label vocabulary plus hierarchy lookups.

    Immutable after construction; safe for unrestricted concurrent reads.
    ``entropy_base`` (29) and ``distribution_size`` (30) intentionally differ
    and are both housed here.
    """

    def __init__(self, senses: list[Sense], entropy_base: int = 29):
        self.senses = tuple(senses)
        self.labels = tuple(s.id for s in senses)
        self.entropy_base = entropy_base
        self.distribution_size = len(senses)
        self._by_id = {s.id: s for s in senses}
        self._index = {s.id: i for i, s in enumerate(senses)}
        self.level2_groups: dict[str, tuple[str, ...]] = {}
        groups: dict[str, list[str]] = {}
        for s in senses:
            groups.setdefault(self.level2_of(s), []).append(s.id)
        self.level2_groups = {k: tuple(v) for k, v in groups.items()}

    def __len__(self):
        return len(self.senses)

    def __contains__(self, label: str) -> bool:
        return label in self._by_id

    def __iter__(self):
        return iter(self.senses)

    def index(self, sense: Sense | str) -> int:
        sid = sense.id if isinstance(sense, Sense) else sense
        return self._index[sid]

    def get(self, label: str) -> Sense:
        try:
            return self._by_id[label]
        except KeyError:
            raise UnknownLabel(f"not in vocabulary: {label!r}") from None

    def parse_sense(self, raw: str) -> Sense:
        """Canonicalize a raw label string to a vocabulary Sense.

        Lowercases, trims, collapses whitespace/underscores to hyphens, and
        resolves documented aliases. Raises UnknownLabel otherwise.
        """
        if not raw or not raw.strip():
            raise UnknownLabel("empty label")
        key = raw.strip().lower()
        key = re.sub(r"[\s_]+", "-", key)
        key = _ALIASES.get(key, key)
        if key not in self._by_id:
            raise UnknownLabel(f"not in vocabulary: {raw!r}")
        return self._by_id[key]

    def level2_of(self, sense: Sense | str) -> str:
        """Level-2 class used for confusion matrices; specials map to themselves."""
        if isinstance(sense, str):
            sense = self.get(sense)
        return sense.level2 if sense.level2 is not None else sense.id

    def merge_belief_speechact(self, raw: str) -> str:
        """Map a belief/speech-act sense variant to its general sense id.

        Idempotent; accepts suffixes like ``+belief``, ``-speechact``.
        """
        key = raw.strip().lower()
        key = re.sub(r"[\s_]+", "-", key)
        key = _BELIEF_SPEECHACT.sub("", key)
        return self.parse_sense(key).id


def load_vocabulary(path: str | Path | None = None, entropy_base: int = 29) -> SenseVocabulary:
    """Load the vocabulary from a TSV file (default: the bundled one)."""
    if path is None:
        text = resources.files("drdistill.data").joinpath("vocabulary.tsv").read_text("utf-8")
        src = "<bundled vocabulary.tsv>"
    else:
        text = Path(path).read_text("utf-8")
        src = str(path)
    senses: list[Sense] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ParseError(f"expected 4 tab-separated fields, got {len(parts)}",
                             line_no=line_no, path=src)
        sid, level1, level2, direction = (p.strip() for p in parts)
        if level1 not in LEVEL1_CLASSES:
            raise ParseError(f"unknown level-1 class {level1!r}", line_no=line_no, path=src)
        senses.append(Sense(
            id=sid,
            level1=level1,
            level2=None if level2 == "-" else level2,
            direction=None if direction == "-" else direction,
        ))
    if len({s.id for s in senses}) != len(senses):
        raise ParseError("duplicate label ids in vocabulary file", path=src)
    return SenseVocabulary(senses, entropy_base=entropy_base)


_DEFAULT: SenseVocabulary | None = None


def default_vocabulary() -> SenseVocabulary:
    """The bundled vocabulary, loaded once per process."""
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_vocabulary()
    return _DEFAULT
