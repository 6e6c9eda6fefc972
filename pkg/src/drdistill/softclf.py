"""Desk-scale hard- vs soft-target training demo.

A bag-of-hashed-n-grams linear classifier over "s1 [SEP] s2" -- deliberately
the weakest model that still exercises the loss mechanics: one-hot majority
targets vs softmax-over-vote-counts targets, cross-entropy in both cases,
mini-batch gradient descent with early stopping, and accuracy / JSD
evaluation. Deterministic given the config seed.
"""

from __future__ import annotations

import json
import re
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse

from .agreement import jsd
from .corpus import Corpus, VoteSet
from .errors import DivergenceDetected, EmptySet, ItemMismatch
from .taxonomy import SenseVocabulary, default_vocabulary

TARGET_MODES = ("hard", "soft")


@dataclass(frozen=True)
class TargetVector:
    probs: np.ndarray
    provenance: str  # "hard_majority" | "soft_softmax" | "union_softmax"


def majority_label_index(vs: VoteSet, vocab: SenseVocabulary) -> int:
    """Index of the majority label; ties break by vocabulary order."""
    if vs.total < 1:
        raise EmptySet(f"empty vote set for {vs.item_id}")
    best_idx, best_count = None, -1
    for sense, c in vs.counts.items():
        i = vocab.index(sense)
        if c > best_count or (c == best_count and i < best_idx):
            best_idx, best_count = i, c
    return best_idx


def make_targets(vs: VoteSet, mode: str = "soft",
                 vocab: SenseVocabulary | None = None,
                 provenance: str | None = None) -> TargetVector:
    """Build a training target from raw vote counts.

    hard: one-hot at the majority label. soft: softmax over the raw count
    vector (absent labels count 0, so the soft target has no zero entries).
    """
    vocab = vocab or default_vocabulary()
    if mode not in TARGET_MODES:
        raise ValueError(f"mode must be one of {TARGET_MODES}")
    if mode == "hard":
        probs = np.zeros(len(vocab))
        probs[majority_label_index(vs, vocab)] = 1.0
        return TargetVector(probs=probs, provenance=provenance or "hard_majority")
    counts = np.zeros(len(vocab))
    for sense, c in vs.counts.items():
        counts[vocab.index(sense)] = c
    e = np.exp(counts - counts.max())
    return TargetVector(probs=e / e.sum(), provenance=provenance or "soft_softmax")


def mix_union(vs_a: VoteSet, vs_b: VoteSet) -> VoteSet:
    """Per-sense count sums of two methods' votes for the same item."""
    if vs_a.item_id != vs_b.item_id:
        raise ItemMismatch(f"{vs_a.item_id!r} vs {vs_b.item_id!r}")
    counts = dict(vs_a.counts)
    for s, c in vs_b.counts.items():
        counts[s] = counts.get(s, 0) + c
    return VoteSet(item_id=vs_a.item_id, method="union", counts=counts)


_TOKEN = re.compile(r"[a-z0-9']+")


@dataclass(frozen=True)
class FeatureConfig:
    ngram_orders: tuple[int, ...] = (1, 2)
    n_buckets: int = 1 << 14
    hash_seed: int = 0


def featurize(text: str, cfg: FeatureConfig) -> np.ndarray:
    """Hashed n-gram count vector for one document. crc32-based, stable."""
    tokens = _TOKEN.findall(text.lower())
    vec = np.zeros(cfg.n_buckets)
    for order in cfg.ngram_orders:
        for i in range(len(tokens) - order + 1):
            gram = " ".join(tokens[i:i + order])
            h = zlib.crc32(f"{cfg.hash_seed}:{order}:{gram}".encode())
            vec[h % cfg.n_buckets] += 1.0
    return vec


def featurize_items(texts: list[str], cfg: FeatureConfig) -> sparse.csr_matrix:
    rows = [sparse.csr_matrix(featurize(t, cfg)) for t in texts]
    return sparse.vstack(rows, format="csr")


def item_text(s1: str, s2: str) -> str:
    return f"{s1} [SEP] {s2}"


@dataclass
class TrainConfig:
    loss: str = "soft"  # "hard" | "soft" (only affects target construction)
    epochs: int = 30
    patience: int = 5
    batch_size: int = 8
    learning_rate: float = 0.5
    rng_seed: int = 0
    dev_size: int = 30  # items held out for early stopping

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.loss not in TARGET_MODES:
            raise ValueError(f"loss must be one of {TARGET_MODES}")


@dataclass
class LinearModel:
    weights: np.ndarray  # n_buckets x n_labels
    bias: np.ndarray     # n_labels
    feature_config: FeatureConfig

    def logits(self, x: sparse.csr_matrix) -> np.ndarray:
        return np.asarray(x @ self.weights) + self.bias

    def predict_proba(self, x: sparse.csr_matrix) -> np.ndarray:
        return _softmax(self.logits(x))

    def save(self, path: str | Path):
        np.savez(path, weights=self.weights, bias=self.bias,
                 config=json.dumps({
                     "ngram_orders": list(self.feature_config.ngram_orders),
                     "n_buckets": self.feature_config.n_buckets,
                     "hash_seed": self.feature_config.hash_seed,
                 }))

    @classmethod
    def load(cls, path: str | Path) -> "LinearModel":
        with np.load(path, allow_pickle=False) as data:
            cfg = json.loads(str(data["config"]))
            return cls(weights=data["weights"], bias=data["bias"],
                       feature_config=FeatureConfig(
                           ngram_orders=tuple(cfg["ngram_orders"]),
                           n_buckets=cfg["n_buckets"],
                           hash_seed=cfg["hash_seed"]))


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(targets: np.ndarray, probs: np.ndarray) -> float:
    """Mean H(target, predicted) in nats; targets may be soft."""
    return float(-(targets * np.log(np.clip(probs, 1e-300, None))).sum(axis=1).mean())


def ce_gradients(x: sparse.csr_matrix, targets: np.ndarray,
                 model: LinearModel):
    """Gradient of mean cross-entropy w.r.t. weights and bias."""
    probs = model.predict_proba(x)
    delta = (probs - targets) / x.shape[0]
    grad_w = np.asarray((x.T @ delta))
    grad_b = delta.sum(axis=0)
    return grad_w, grad_b


def train(x: sparse.csr_matrix, targets: np.ndarray,
          cfg: TrainConfig | None = None,
          feature_config: FeatureConfig | None = None) -> LinearModel:
    """Mini-batch gradient descent with early stopping on held-out soft loss."""
    cfg = cfg or TrainConfig()
    feature_config = feature_config or FeatureConfig()
    n, d = x.shape
    if n == 0:
        raise EmptySet("empty training set")
    k = targets.shape[1]
    rng = np.random.default_rng(cfg.rng_seed)
    perm = rng.permutation(n)
    n_dev = min(cfg.dev_size, max(0, n - 1))
    dev_idx, train_idx = perm[:n_dev], perm[n_dev:]
    x_tr, t_tr = x[train_idx], targets[train_idx]
    x_dev, t_dev = x[dev_idx], targets[dev_idx]
    model = LinearModel(weights=np.zeros((d, k)), bias=np.zeros(k),
                        feature_config=feature_config)
    best = (np.inf, model.weights.copy(), model.bias.copy())
    strikes = 0
    m = x_tr.shape[0]
    for epoch in range(cfg.epochs):
        order = rng.permutation(m)
        for start in range(0, m, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            gw, gb = ce_gradients(x_tr[batch], t_tr[batch], model)
            model.weights -= cfg.learning_rate * gw
            model.bias -= cfg.learning_rate * gb
        score = cross_entropy(t_dev, model.predict_proba(x_dev)) if n_dev else \
            cross_entropy(t_tr, model.predict_proba(x_tr))
        if not np.isfinite(score):
            raise DivergenceDetected(f"non-finite loss at epoch {epoch}")
        if score < best[0] - 1e-9:
            best = (score, model.weights.copy(), model.bias.copy())
            strikes = 0
        else:
            strikes += 1
            if strikes > cfg.patience:
                break
    model.weights, model.bias = best[1], best[2]
    return model


def evaluate(model: LinearModel, x: sparse.csr_matrix,
             target_probs: np.ndarray, majority_idx: np.ndarray) -> dict:
    """Accuracy of the argmax prediction plus predicted-vs-target JSD.

    hard_acc: argmax prediction matches the majority label. soft_acc: argmax
    prediction matches the target distribution's argmax. mean_jsd: mean
    base-2 JSD between predicted and target distributions.
    """
    probs = model.predict_proba(x)
    pred = probs.argmax(axis=1)
    hard_acc = float((pred == majority_idx).mean())
    soft_acc = float((pred == target_probs.argmax(axis=1)).mean())
    mean_jsd = float(np.mean([jsd(p, t) for p, t in zip(probs, target_probs)]))
    return {"hard_acc": hard_acc, "soft_acc": soft_acc, "mean_jsd": mean_jsd}


def build_dataset(corpus: Corpus, method: str = "dc", mix: str | None = None,
                  loss: str = "soft",
                  feature_config: FeatureConfig | None = None):
    """Assemble (features, targets, majority indices, item ids) from a corpus.

    mix=None/"dc"/"qa" uses one method's votes; mix="union" sums DC and QA
    counts per item (items annotated by both only); mix="intersection" keeps
    one method per item, preferring QA where available.
    """
    feature_config = feature_config or FeatureConfig()
    vocab = corpus.vocab
    vote_sets: list[VoteSet] = []
    texts: list[str] = []
    ids: list[str] = []
    provenance = None
    if mix in (None, "dc", "qa"):
        use = mix or method
        for (iid, m), vs in sorted(corpus.vote_sets.items()):
            if m != use:
                continue
            vote_sets.append(vs)
    elif mix == "union":
        provenance = "union_softmax" if loss == "soft" else None
        by_item: dict[str, dict[str, VoteSet]] = {}
        for (iid, m), vs in corpus.vote_sets.items():
            by_item.setdefault(iid, {})[m] = vs
        for iid in sorted(by_item):
            pair = by_item[iid]
            if "dc" in pair and "qa" in pair:
                vote_sets.append(mix_union(pair["dc"], pair["qa"]))
    elif mix == "intersection":
        by_item = {}
        for (iid, m), vs in corpus.vote_sets.items():
            by_item.setdefault(iid, {})[m] = vs
        for iid in sorted(by_item):
            pair = by_item[iid]
            vote_sets.append(pair.get("qa") or pair["dc"])
    else:
        raise ValueError(f"unknown mix {mix!r}")
    if not vote_sets:
        raise EmptySet("no vote sets selected")
    targets = np.zeros((len(vote_sets), len(vocab)))
    majority = np.zeros(len(vote_sets), dtype=np.int64)
    for i, vs in enumerate(vote_sets):
        it = corpus.items[vs.item_id]
        texts.append(item_text(it.s1, it.s2))
        ids.append(vs.item_id)
        targets[i] = make_targets(vs, mode=loss, vocab=vocab,
                                  provenance=provenance).probs
        majority[i] = majority_label_index(vs, vocab)
    x = featurize_items(texts, feature_config)
    return x, targets, majority, ids
