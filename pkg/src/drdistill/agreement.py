"""Inter-annotator agreement metrics over multi-label annotations.

Full/partial agreement, chance-corrected multi-label kappa (bootstrapped
expected agreement), Jensen-Shannon divergence over vote distributions and
over flattened sub-label sets, and vote-entropy (log base 29).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import (Corpus, LabelDistribution, SubLabelSet, VoteSet,
                     filtered_distribution, flatten)
from .errors import DegenerateChance, EmptySet, NoReference, NotNormalized
from .taxonomy import SenseVocabulary, default_vocabulary


def full_agreement(a: SubLabelSet, b: SubLabelSet) -> bool:
    """True iff the two label sets are equal."""
    if not a.labels or not b.labels:
        raise EmptySet("agreement needs non-empty label sets")
    return a.labels == b.labels


def partial_agreement(a: SubLabelSet, b: SubLabelSet) -> bool:
    """True iff the two label sets share at least one label."""
    if not a.labels or not b.labels:
        raise EmptySet("agreement needs non-empty label sets")
    return bool(a.labels & b.labels)


@dataclass(frozen=True)
class KappaConfig:
    bootstrap_samples: int = 10_000
    rng_seed: int = 0

    def __post_init__(self):
        if self.bootstrap_samples < 1:
            raise ValueError("bootstrap_samples must be >= 1")


def _partial_matrix(sets_a: list[frozenset], sets_b: list[frozenset]) -> np.ndarray:
    """n x n boolean matrix of partial agreement between every A set and B set."""
    n = len(sets_a)
    m = np.zeros((n, n), dtype=bool)
    for i, a in enumerate(sets_a):
        for j, b in enumerate(sets_b):
            m[i, j] = bool(a & b)
    return m


def bootstrap_expected_agreement(pairs, cfg: KappaConfig) -> float:
    """Chance-level partial agreement via bootstrap resampling.

    Each resample independently redraws the side-A and side-B label sets
    (with replacement, at the item level, whole sets as units) from the
    observed collections and records its partial-agreement rate; the mean
    over resamples is the expected agreement. Deterministic under rng_seed.
    """
    sets_a = [p[0].labels for p in pairs]
    sets_b = [p[1].labels for p in pairs]
    n = len(pairs)
    matrix = _partial_matrix(sets_a, sets_b)
    rng = np.random.default_rng(cfg.rng_seed)
    total = 0.0
    done = 0
    # chunked so index arrays stay small at 10k resamples on large corpora
    chunk = max(1, min(cfg.bootstrap_samples, 2_000_000 // max(n, 1)))
    while done < cfg.bootstrap_samples:
        b = min(chunk, cfg.bootstrap_samples - done)
        idx_a = rng.integers(n, size=(b, n))
        idx_b = rng.integers(n, size=(b, n))
        total += matrix[idx_a, idx_b].mean(axis=1).sum()
        done += b
    return float(total / cfg.bootstrap_samples)


def multilabel_kappa(pairs, cfg: KappaConfig | None = None) -> float:
    """Partial-agreement rate chance-corrected by bootstrapped expectation.

    kappa = (Ao - Ae) / (1 - Ae), Ao = observed partial-agreement rate.
    """
    cfg = cfg or KappaConfig()
    if not pairs:
        raise EmptySet("no pairs")
    ao = float(np.mean([partial_agreement(a, b) for a, b in pairs]))
    ae = bootstrap_expected_agreement(pairs, cfg)
    if ae >= 1.0 - 1e-9:
        raise DegenerateChance(f"expected agreement {ae} leaves no room for skill")
    return (ao - ae) / (1.0 - ae)


def jsd(p: LabelDistribution | np.ndarray, q: LabelDistribution | np.ndarray,
        base: float = 2.0) -> float:
    """Jensen-Shannon divergence; base 2 by default, so range [0, 1]."""
    pv = p.probs if isinstance(p, LabelDistribution) else np.asarray(p, dtype=float)
    qv = q.probs if isinstance(q, LabelDistribution) else np.asarray(q, dtype=float)
    if pv.shape != qv.shape:
        raise NotNormalized("distributions have different lengths")
    for v in (pv, qv):
        if abs(float(v.sum()) - 1.0) > 1e-9 or (v < 0).any():
            raise NotNormalized(f"not a probability vector (sum={v.sum()})")
    m = 0.5 * (pv + qv)
    log_base = np.log(base)

    def kl(a, b):
        mask = a > 0
        return float(np.sum(a[mask] * (np.log(a[mask] / b[mask]) / log_base)))

    return 0.5 * kl(pv, m) + 0.5 * kl(qv, m)


def jsd_flat(a: SubLabelSet, b: SubLabelSet,
             vocab: SenseVocabulary | None = None) -> float:
    """JSD between uniform distributions over the two surviving label sets."""
    vocab = vocab or default_vocabulary()
    return jsd(flatten(a, vocab), flatten(b, vocab))


def entropy(vs: VoteSet, base: int | None = None,
            vocab: SenseVocabulary | None = None) -> float:
    """Entropy of the unfiltered vote distribution, log base 29 by default.

    Minority labels are deliberately included: they contribute to the
    annotation uncertainty this statistic quantifies.
    """
    vocab = vocab or default_vocabulary()
    base = base if base is not None else vocab.entropy_base
    total = vs.total
    if total < 1:
        raise EmptySet(f"empty vote set for {vs.item_id}")
    p = np.array([c / total for c in vs.counts.values()], dtype=float)
    p = p[p > 0]
    return float(-(p * (np.log(p) / np.log(base))).sum())


@dataclass
class AgreementReport:
    n_items: int
    n_excluded: int  # items dropped because one side failed minority filtering
    full_rate: float
    partial_rate: float
    multilabel_kappa: float
    mean_jsd: float | None = None
    mean_jsd_flat: float | None = None
    mean_sublabels_a: float | None = None
    mean_sublabels_b: float | None = None
    per_genre: dict[str, "AgreementReport"] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "per_genre"}
        d["per_genre"] = {g: r.to_dict() for g, r in self.per_genre.items()}
        return d


def _report_for(pairs_by_item, corpus: Corpus, cfg: KappaConfig,
                jsd_values=None, flat: bool = False) -> AgreementReport:
    pairs = list(pairs_by_item.values())
    full = float(np.mean([full_agreement(a, b) for a, b in pairs]))
    part = float(np.mean([partial_agreement(a, b) for a, b in pairs]))
    try:
        kappa = multilabel_kappa(pairs, cfg)
    except DegenerateChance:
        kappa = float("nan")
    rep = AgreementReport(
        n_items=len(pairs), n_excluded=0,
        full_rate=full, partial_rate=part, multilabel_kappa=kappa,
        mean_sublabels_a=float(np.mean([len(a) for a, _ in pairs])),
        mean_sublabels_b=float(np.mean([len(b) for _, b in pairs])),
    )
    if jsd_values is not None:
        vals = [jsd_values[iid] for iid in pairs_by_item]
        key = "mean_jsd_flat" if flat else "mean_jsd"
        setattr(rep, key, float(np.mean(vals)))
    return rep


def compare_methods(corpus: Corpus, method_a: str = "qa", method_b: str = "dc",
                    min_votes: int = 2, cfg: KappaConfig | None = None,
                    by_genre: bool = True) -> AgreementReport:
    """Cross-method agreement over items annotated by both methods."""
    cfg = cfg or KappaConfig()
    subs_a = corpus.sublabels(method_a, min_votes=min_votes)
    subs_b = corpus.sublabels(method_b, min_votes=min_votes)
    both = sorted(set(subs_a) & set(subs_b))
    either = {iid for (iid, m) in corpus.vote_sets
              if m in (method_a, method_b)}
    pairs = {iid: (subs_a[iid], subs_b[iid]) for iid in both}
    if not pairs:
        raise EmptySet("no items annotated by both methods")
    jsd_values = {}
    for iid in both:
        da = filtered_distribution(corpus.vote_set(iid, method_a), min_votes, corpus.vocab)
        db = filtered_distribution(corpus.vote_set(iid, method_b), min_votes, corpus.vocab)
        jsd_values[iid] = jsd(da, db)
    rep = _report_for(pairs, corpus, cfg, jsd_values)
    rep.n_excluded = len(either) - len(both)
    if by_genre:
        for genre in corpus.genres():
            sub = {iid: p for iid, p in pairs.items()
                   if corpus.items[iid].genre == genre}
            if sub:
                rep.per_genre[genre] = _report_for(sub, corpus, cfg, jsd_values)
    return rep


def compare_with_reference(corpus: Corpus, method: str, min_votes: int = 2,
                           cfg: KappaConfig | None = None,
                           by_genre: bool = True) -> AgreementReport:
    """Agreement of one method against the trained-annotator reference labels.

    Reference labels carry no vote counts, so the distribution comparison is
    JSD over flattened (uniform) sets on both sides.
    """
    cfg = cfg or KappaConfig()
    subs = corpus.sublabels(method, min_votes=min_votes)
    pairs = {}
    jsd_values = {}
    for iid, crowd in subs.items():
        ref = corpus.items[iid].reference
        if ref is None:
            continue
        ref_set = SubLabelSet(labels=ref)
        pairs[iid] = (crowd, ref_set)
        jsd_values[iid] = jsd_flat(crowd, ref_set, corpus.vocab)
    if not pairs:
        raise NoReference(f"no items with both {method!r} votes and reference labels")
    with_ref = {iid for iid, it in corpus.items.items()
                if it.reference is not None and (iid, method) in corpus.vote_sets}
    rep = _report_for(pairs, corpus, cfg, jsd_values, flat=True)
    rep.n_excluded = len(with_ref) - len(pairs)
    if by_genre:
        for genre in corpus.genres():
            sub = {iid: p for iid, p in pairs.items()
                   if corpus.items[iid].genre == genre}
            if sub:
                rep.per_genre[genre] = _report_for(sub, corpus, cfg, jsd_values, flat=True)
    return rep


def mean_entropy(corpus: Corpus, method: str, genre: str | None = None) -> float:
    """Mean vote entropy (unfiltered, base 29) over items, optionally per genre."""
    vals = []
    for (iid, m), vs in corpus.vote_sets.items():
        if m != method:
            continue
        if genre is not None and corpus.items[iid].genre != genre:
            continue
        vals.append(entropy(vs, vocab=corpus.vocab))
    if not vals:
        raise EmptySet(f"no vote sets for method {method!r}")
    return float(np.mean(vals))


def entropy_jsd_correlation(corpus: Corpus, method: str, min_votes: int = 2):
    """Pearson r between per-item vote entropy and JSD_flat against reference.

    Returns (r, series) where series is a list of
    (item_id, entropy, jsd_flat) records for plotting. r is NaN (flagged)
    when either series is constant.
    """
    subs = corpus.sublabels(method, min_votes=min_votes)
    series = []
    for iid, crowd in sorted(subs.items()):
        ref = corpus.items[iid].reference
        if ref is None:
            continue
        h = entropy(corpus.vote_set(iid, method), vocab=corpus.vocab)
        d = jsd_flat(crowd, SubLabelSet(labels=ref), corpus.vocab)
        series.append((iid, h, d))
    if not series:
        raise NoReference("no items with reference labels")
    hs = np.array([s[1] for s in series])
    ds = np.array([s[2] for s in series])
    if hs.std() == 0 or ds.std() == 0:
        return float("nan"), series
    r = float(np.corrcoef(hs, ds)[0, 1])
    return r, series
