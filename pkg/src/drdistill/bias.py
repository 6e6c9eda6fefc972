"""Method-bias diagnostics: level-2 confusion matrix, FP/FN tables,
chi-squared independence test, and bias-aware aggregation simulation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2

from .agreement import partial_agreement
from .corpus import Corpus, SubLabelSet
from .errors import (DegenerateMatrix, MissingMethod, NoReference)
from .taxonomy import SPECIAL_LABELS, Sense


@dataclass
class ConfusionMatrix:
    """Cross-method level-2 confusion counts (rows: one method, cols: the other)."""

    row_labels: list[str]
    col_labels: list[str]
    cells: np.ndarray  # integer counts, len(row_labels) x len(col_labels)

    @property
    def row_marginals(self) -> np.ndarray:
        return self.cells.sum(axis=1)

    @property
    def col_marginals(self) -> np.ndarray:
        return self.cells.sum(axis=0)

    @property
    def total(self) -> int:
        return int(self.cells.sum())

    def cell(self, row: str, col: str) -> int:
        return int(self.cells[self.row_labels.index(row), self.col_labels.index(col)])

    def to_records(self) -> list[dict]:
        return [
            {"row": r, "col": c, "count": int(self.cells[i, j])}
            for i, r in enumerate(self.row_labels)
            for j, c in enumerate(self.col_labels)
        ]


def confusion_level2(corpus: Corpus, row_method: str = "dc", col_method: str = "qa",
                     min_votes: int = 2) -> ConfusionMatrix:
    """Level-2 confusion over the cross product of the two sub-label sets.

    For each dual-annotated item, every (row-method label, col-method label)
    pair contributes one count to the corresponding level-2 cell. Special
    labels (norel, differentcon) are excluded. Only observed classes appear.
    """
    subs_r = corpus.sublabels(row_method, min_votes=min_votes)
    subs_c = corpus.sublabels(col_method, min_votes=min_votes)
    if not subs_r:
        raise MissingMethod(f"no usable vote sets for {row_method!r}")
    if not subs_c:
        raise MissingMethod(f"no usable vote sets for {col_method!r}")
    counts: dict[tuple[str, str], int] = {}
    for iid in sorted(set(subs_r) & set(subs_c)):
        for sr in subs_r[iid]:
            if sr.id in SPECIAL_LABELS:
                continue
            for sc in subs_c[iid]:
                if sc.id in SPECIAL_LABELS:
                    continue
                key = (corpus.vocab.level2_of(sr), corpus.vocab.level2_of(sc))
                counts[key] = counts.get(key, 0) + 1
    rows = sorted({r for r, _ in counts})
    cols = sorted({c for _, c in counts})
    cells = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for (r, c), n in counts.items():
        cells[rows.index(r), cols.index(c)] = n
    return ConfusionMatrix(row_labels=rows, col_labels=cols, cells=cells)


@dataclass
class ErrorTable:
    """Per-sense false negatives / false positives for both methods.

    Rows are ordered by descending reference sub-label frequency.
    """

    senses: list[str]
    fn: dict[str, dict[str, int]]  # method -> sense -> count
    fp: dict[str, dict[str, int]]

    def to_records(self) -> list[dict]:
        return [
            {"sense": s,
             **{f"fn_{m}": self.fn[m].get(s, 0) for m in self.fn},
             **{f"fp_{m}": self.fp[m].get(s, 0) for m in self.fp}}
            for s in self.senses
        ]


def fp_fn(corpus: Corpus, methods: tuple[str, ...] = ("qa", "dc"),
          min_votes: int = 2) -> ErrorTable:
    """FP/FN of crowd sub-labels against reference labels, one count per
    (item, label): FP = crowd label not in reference, FN = reference label
    missed by the crowd set."""
    any_ref = any(it.reference is not None for it in corpus.items.values())
    if not any_ref:
        raise NoReference("no items carry reference labels")
    fn = {m: {} for m in methods}
    fp = {m: {} for m in methods}
    ref_counts: dict[str, int] = {}
    for m in methods:
        subs = corpus.sublabels(m, min_votes=min_votes)
        for iid, crowd in subs.items():
            ref = corpus.items[iid].reference
            if ref is None:
                continue
            for s in crowd:
                if s not in ref:
                    fp[m][s.id] = fp[m].get(s.id, 0) + 1
            for s in ref:
                if s not in crowd.labels:
                    fn[m][s.id] = fn[m].get(s.id, 0) + 1
    for it in corpus.items.values():
        if it.reference is None:
            continue
        if not any((it.item_id, m) in corpus.vote_sets for m in methods):
            continue
        for s in it.reference:
            ref_counts[s.id] = ref_counts.get(s.id, 0) + 1
    seen = set(ref_counts)
    for m in methods:
        seen |= set(fn[m]) | set(fp[m])
    order = sorted(seen, key=lambda s: (-ref_counts.get(s, 0), s))
    return ErrorTable(senses=order, fn=fn, fp=fp)


def chi_squared_independence(m: ConfusionMatrix, pool_floor: int = 5):
    """Pearson chi-squared test of the matrix against its independence model.

    Rows/columns whose marginal is below ``pool_floor`` are pooled into a
    single residual row/column first. Returns (statistic, dof, p_value).
    """
    cells = _pool(m.cells, pool_floor)
    if cells.shape[0] < 2 or cells.shape[1] < 2:
        raise DegenerateMatrix("fewer than 2 rows or columns after pooling")
    total = cells.sum()
    expected = np.outer(cells.sum(axis=1), cells.sum(axis=0)) / total
    if (expected <= 0).any():
        raise DegenerateMatrix("zero expected cell counts")
    statistic = float(((cells - expected) ** 2 / expected).sum())
    dof = (cells.shape[0] - 1) * (cells.shape[1] - 1)
    p_value = float(chi2.sf(statistic, dof))
    return statistic, dof, p_value


def _pool(cells: np.ndarray, floor: int) -> np.ndarray:
    # small rows/cols are summed into the kept row/col with the smallest marginal
    cells = np.asarray(cells, dtype=np.int64)
    for axis in (0, 1):
        marg = cells.sum(axis=1 - axis)
        small = np.flatnonzero(marg < floor)
        keep = np.flatnonzero(marg >= floor)
        if len(small) == 0 or len(keep) == 0:
            continue
        pooled = cells.take(small, axis=axis).sum(axis=axis)
        cells = cells.take(keep, axis=axis)
        target = int(np.argmin(marg[keep]))
        if axis == 0:
            cells[target] += pooled
        else:
            cells[:, target] += pooled
    return cells


@dataclass(frozen=True)
class AggregationPolicy:
    """Re-annotate items whose base-method labels hit a trigger sense."""

    base_method: str = "dc"
    reannotate_triggers: frozenset[str] = frozenset({"result"})
    replacement_method: str = "qa"
    mode: str = "replace"  # "replace" | "merge"

    def __post_init__(self):
        if self.mode not in ("replace", "merge"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass
class AggregationResult:
    n_items: int
    n_reannotated: int
    partial_before: float
    partial_after: float
    sublabels: dict[str, SubLabelSet]


def aggregate_bias_aware(corpus: Corpus, policy: AggregationPolicy | None = None,
                         genre: str | None = None, min_votes: int = 2) -> AggregationResult:
    """Simulate bias-aware label aggregation and score it against reference.

    Items whose base-method sub-labels intersect the trigger set take the
    replacement method's sub-labels (replace) or the union of both (merge);
    partial agreement with the reference is reported before and after.
    """
    policy = policy or AggregationPolicy()
    base = corpus.sublabels(policy.base_method, min_votes=min_votes)
    repl = corpus.sublabels(policy.replacement_method, min_votes=min_votes)
    eligible = {}
    for iid, crowd in base.items():
        it = corpus.items[iid]
        if it.reference is None or iid not in repl:
            continue
        if genre is not None and it.genre != genre:
            continue
        eligible[iid] = crowd
    if not eligible:
        raise NoReference("no eligible items (need reference + both methods)")
    aggregated: dict[str, SubLabelSet] = {}
    n_re = 0
    for iid, crowd in eligible.items():
        if crowd.ids() & policy.reannotate_triggers:
            n_re += 1
            if policy.mode == "replace":
                aggregated[iid] = repl[iid]
            else:
                aggregated[iid] = SubLabelSet(labels=crowd.labels | repl[iid].labels)
        else:
            aggregated[iid] = crowd
    def rate(mapping):
        vals = []
        for iid, crowd in mapping.items():
            ref = SubLabelSet(labels=corpus.items[iid].reference)
            vals.append(partial_agreement(crowd, ref))
        return float(np.mean(vals))
    return AggregationResult(
        n_items=len(eligible), n_reannotated=n_re,
        partial_before=rate(eligible), partial_after=rate(aggregated),
        sublabels=aggregated,
    )


def genre_label_profile(corpus: Corpus, method: str, min_votes: int = 2) -> dict[str, dict[str, int]]:
    """Per-genre counts of level-2 sub-label occurrences (bar-chart ready)."""
    subs = corpus.sublabels(method, min_votes=min_votes)
    profile: dict[str, dict[str, int]] = {}
    for iid, crowd in subs.items():
        genre = corpus.items[iid].genre
        row = profile.setdefault(genre, {})
        for s in crowd:
            l2 = corpus.vocab.level2_of(s)
            row[l2] = row.get(l2, 0) + 1
    return profile
