import json
import sys

import pytest

from drdistill.corpus import Corpus, RelationItem, Vote, VoteSet
from drdistill.taxonomy import default_vocabulary


@pytest.fixture(scope="session")
def vocab():
    return default_vocabulary()


def make_vote_set(counts, item_id="i1", method="dc", vocab=None):
    vocab = vocab or default_vocabulary()
    return VoteSet(item_id=item_id, method=method,
                   counts={vocab.get(k): v for k, v in counts.items()})


def make_item(item_id, genre="wikipedia", reference=None, s1="First sentence.",
              s2="Second sentence.", vocab=None):
    vocab = vocab or default_vocabulary()
    ref = frozenset(vocab.get(r) for r in reference) if reference else None
    return RelationItem(item_id=item_id, genre=genre, s1=s1, s2=s2, reference=ref)


def make_corpus(spec, vocab=None):
    """Build a corpus from {item_id: {"genre":..., "reference": [...],
    "dc": {label: count}, "qa": {label: count}}}."""
    vocab = vocab or default_vocabulary()
    items, votes = [], []
    for iid, cfg in spec.items():
        items.append(make_item(iid, genre=cfg.get("genre", "wikipedia"),
                               reference=cfg.get("reference"),
                               s1=cfg.get("s1", f"Sentence one of {iid}."),
                               s2=cfg.get("s2", f"Sentence two of {iid}."),
                               vocab=vocab))
        for method in ("dc", "qa"):
            w = 0
            for label, count in cfg.get(method, {}).items():
                for _ in range(count):
                    votes.append(Vote(item_id=iid, method=method,
                                      worker_id=f"{method}-w{w}",
                                      sense=vocab.get(label)))
                    w += 1
    return Corpus(items, votes, vocab=vocab)


def write_jsonl(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records), "utf-8")


def pytest_runtest_logreport(report):
    """One pass/fail/skip line per acceptance criterion."""
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.skipped:
        reason = report.longrepr[2] if isinstance(report.longrepr, tuple) else report.longrepr
        sys.stderr.write(f"\n[SKIP] {name} -- {reason}\n")
    elif report.when == "call":
        sys.stderr.write(f"\n[{'PASS' if report.passed else 'FAIL'}] {name}\n")
    elif report.failed:
        sys.stderr.write(f"\n[FAIL] {name} ({report.when} error)\n")
