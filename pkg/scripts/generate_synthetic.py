#!/usr/bin/env python3
"""Generate a synthetic dual-annotated corpus for demos and smoke runs.

Writes items.jsonl, votes.jsonl, and workers.json into --out-dir. Items get
~10 DC and ~10 QA votes each, drawn from a genre-dependent label profile with
a deliberate DC-overuses-"result" bias so the bias diagnostics have something
to find.
"""

import argparse
import json
import random
from pathlib import Path

from drdistill.taxonomy import SPECIAL_LABELS, default_vocabulary

GENRES = ("europarl", "wikipedia", "novel", "pdtb")

# rough frequency profile: a handful of common senses dominate
COMMON = ["conjunction", "arg2-as-detail", "result", "reason", "contrast",
          "precedence", "arg2-as-instance", "arg2-as-denier"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path, default=Path("demo_data"))
    ap.add_argument("--items", type=int, default=120)
    ap.add_argument("--votes-per-item", type=int, default=10)
    ap.add_argument("--workers", type=int, default=40)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    vocab = default_vocabulary()
    rng = random.Random(args.seed)
    usable = [l for l in vocab.labels if l not in SPECIAL_LABELS]
    args.out_dir.mkdir(parents=True, exist_ok=True)

    items, votes = [], []
    worker_pool = [f"worker-{i:03d}" for i in range(args.workers)]
    for i in range(args.items):
        iid = f"syn-{i:04d}"
        genre = GENRES[i % len(GENRES)]
        true = rng.choice(COMMON)
        second = rng.choice([l for l in COMMON if l != true])
        items.append({"item_id": iid, "genre": genre,
                      "s1": f"Synthetic argument one for {iid}.",
                      "s2": f"Synthetic argument two for {iid}.",
                      "reference": [true]})
        for method in ("dc", "qa"):
            workers = rng.sample(worker_pool, args.votes_per_item)
            for w in workers:
                r = rng.random()
                if method == "dc" and r < 0.15:
                    sense = "result"  # the planted task-design bias
                elif r < 0.60:
                    sense = true
                elif r < 0.85:
                    sense = second
                else:
                    sense = rng.choice(usable)
                votes.append({"item_id": iid, "worker_id": w,
                              "method": method, "sense": sense})

    (args.out_dir / "items.jsonl").write_text(
        "".join(json.dumps(r) + "\n" for r in items), "utf-8")
    (args.out_dir / "votes.jsonl").write_text(
        "".join(json.dumps(r) + "\n" for r in votes), "utf-8")
    (args.out_dir / "workers.json").write_text(json.dumps(worker_pool), "utf-8")
    print(f"wrote {len(items)} items / {len(votes)} votes to {args.out_dir}/")


if __name__ == "__main__":
    main()
