"""Command-line interface: distill, agree, bias, train, eval, serve."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import agreement, bias, softclf
from .agreement import KappaConfig
from .corpus import (dump_votes, filter_minority, filtered_distribution,
                     load_corpus)
from .errors import AllMinority


@click.group()
def main():
    """Crowdsourced discourse-relation annotation analytics."""


@main.command()
@click.option("--items", "items_file", required=True, type=click.Path(exists=True))
@click.option("--votes", "votes_file", required=True, type=click.Path(exists=True))
@click.option("--method", type=click.Choice(["dc", "qa"]), required=True)
@click.option("--min-votes", default=2, show_default=True)
@click.option("--out", "out_file", type=click.Path(), default="-")
def distill(items_file, votes_file, method, min_votes, out_file):
    """Emit per-item sub-label sets and vote distributions."""
    corpus = load_corpus(items_file, votes_file)
    records = []
    for (iid, m), vs in sorted(corpus.vote_sets.items()):
        if m != method:
            continue
        rec = {"item_id": iid, "method": m, "total_votes": vs.total}
        try:
            sub = filter_minority(vs, min_votes=min_votes)
            dist = filtered_distribution(vs, min_votes, corpus.vocab)
            rec["sublabels"] = sorted(sub.ids())
            rec["removed_mass"] = sub.removed_mass
            rec["probs"] = dist.probs.tolist()
        except AllMinority:
            rec["sublabels"] = []
            rec["no_stable_label"] = True
        records.append(rec)
    _write_jsonl(records, out_file)


@main.command()
@click.option("--items", "items_file", required=True, type=click.Path(exists=True))
@click.option("--votes-a", required=True, type=click.Path(exists=True))
@click.option("--votes-b", type=click.Path(exists=True))
@click.option("--method-a", default="qa", show_default=True)
@click.option("--method-b", default="dc", show_default=True)
@click.option("--reference", is_flag=True,
              help="Compare method A against the items' reference labels.")
@click.option("--by-genre", is_flag=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--bootstrap", default=10_000, show_default=True)
@click.option("--min-votes", default=2, show_default=True)
@click.option("--out", "out_file", type=click.Path(), default="-")
def agree(items_file, votes_a, votes_b, method_a, method_b, reference,
          by_genre, seed, bootstrap, min_votes, out_file):
    """Agreement report: full/partial rates, multi-label kappa, JSD."""
    votes = Path(votes_a).read_text("utf-8")
    if votes_b:
        votes += Path(votes_b).read_text("utf-8")
    import io
    corpus = load_corpus(items_file, io.StringIO(votes))
    cfg = KappaConfig(bootstrap_samples=bootstrap, rng_seed=seed)
    if reference:
        rep = agreement.compare_with_reference(corpus, method_a, min_votes, cfg,
                                               by_genre=by_genre)
    else:
        rep = agreement.compare_methods(corpus, method_a, method_b, min_votes,
                                        cfg, by_genre=by_genre)
    _echo_report(rep)
    _write_jsonl([rep.to_dict()], out_file, quiet=True)


def _echo_report(rep, label="overall"):
    click.echo(f"[{label}] items={rep.n_items} excluded={rep.n_excluded} "
               f"full={rep.full_rate:.3f} partial={rep.partial_rate:.3f} "
               f"kappa={rep.multilabel_kappa:.3f}"
               + (f" jsd={rep.mean_jsd:.3f}" if rep.mean_jsd is not None else "")
               + (f" jsd_flat={rep.mean_jsd_flat:.3f}" if rep.mean_jsd_flat is not None else ""))
    for genre, sub in rep.per_genre.items():
        _echo_report(sub, label=genre)


@main.command(name="bias")
@click.option("--items", "items_file", required=True, type=click.Path(exists=True))
@click.option("--votes", "votes_file", required=True, type=click.Path(exists=True))
@click.option("--confusion", is_flag=True)
@click.option("--fpfn", is_flag=True)
@click.option("--chisq", is_flag=True)
@click.option("--aggregate", is_flag=True)
@click.option("--triggers", default="result", show_default=True)
@click.option("--mode", type=click.Choice(["replace", "merge"]), default="replace")
@click.option("--subset", "genre", default=None, help="Restrict aggregation to one genre.")
@click.option("--out", "out_file", type=click.Path(), default="-")
def bias_cmd(items_file, votes_file, confusion, fpfn, chisq, aggregate,
             triggers, mode, genre, out_file):
    """Method-bias diagnostics and the bias-aware aggregation simulation."""
    corpus = load_corpus(items_file, votes_file)
    out = {}
    matrix = None
    if confusion or chisq:
        matrix = bias.confusion_level2(corpus)
        out["confusion"] = {"rows": matrix.row_labels, "cols": matrix.col_labels,
                            "cells": matrix.cells.tolist()}
    if chisq:
        stat, dof, p = bias.chi_squared_independence(matrix)
        out["chi_squared"] = {"statistic": stat, "dof": dof, "p_value": p}
        click.echo(f"chi2={stat:.2f} dof={dof} p={p:.3g}")
    if fpfn:
        out["fp_fn"] = bias.fp_fn(corpus).to_records()
    if aggregate:
        policy = bias.AggregationPolicy(
            reannotate_triggers=frozenset(t.strip() for t in triggers.split(",")),
            mode=mode)
        result = bias.aggregate_bias_aware(corpus, policy, genre=genre)
        out["aggregation"] = {
            "n_items": result.n_items, "n_reannotated": result.n_reannotated,
            "partial_before": result.partial_before,
            "partial_after": result.partial_after,
        }
        click.echo(f"partial agreement {result.partial_before:.3f} -> "
                   f"{result.partial_after:.3f} ({result.n_reannotated} re-annotated)")
    _write_jsonl([out], out_file, quiet=True)


@main.command()
@click.option("--items", "items_file", required=True, type=click.Path(exists=True))
@click.option("--votes", "votes_file", required=True, type=click.Path(exists=True))
@click.option("--loss", type=click.Choice(["hard", "soft"]), default="soft")
@click.option("--mix", type=click.Choice(["dc", "qa", "intersection", "union"]),
              default="dc", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--epochs", default=30, show_default=True)
@click.option("--out", "model_file", required=True, type=click.Path())
def train(items_file, votes_file, loss, mix, seed, epochs, model_file):
    """Train the linear hard/soft-loss classifier."""
    corpus = load_corpus(items_file, votes_file)
    x, targets, majority, _ = softclf.build_dataset(corpus, mix=mix, loss=loss)
    cfg = softclf.TrainConfig(loss=loss, rng_seed=seed, epochs=epochs)
    model = softclf.train(x, targets, cfg)
    model.save(model_file)
    metrics = softclf.evaluate(model, x, targets, majority)
    click.echo(json.dumps({"train": metrics}))


@main.command(name="eval")
@click.option("--model", "model_file", required=True, type=click.Path(exists=True))
@click.option("--items", "items_file", required=True, type=click.Path(exists=True))
@click.option("--votes", "votes_file", required=True, type=click.Path(exists=True))
@click.option("--loss", type=click.Choice(["hard", "soft"]), default="soft")
@click.option("--mix", type=click.Choice(["dc", "qa", "intersection", "union"]),
              default="dc", show_default=True)
def eval_cmd(model_file, items_file, votes_file, loss, mix):
    """Evaluate a trained model: majority accuracy and predicted-vs-target JSD."""
    model = softclf.LinearModel.load(model_file)
    corpus = load_corpus(items_file, votes_file)
    x, targets, majority, _ = softclf.build_dataset(
        corpus, mix=mix, loss=loss, feature_config=model.feature_config)
    click.echo(json.dumps(softclf.evaluate(model, x, targets, majority)))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--data-dir", required=True, type=click.Path())
@click.option("--items", "items_file", required=True, type=click.Path(exists=True))
@click.option("--workers", "workers_file", required=True, type=click.Path(exists=True))
@click.option("--admin-token", envvar="DRDISTILL_ADMIN_TOKEN", required=True)
@click.option("--bank", "bank_file", type=click.Path(exists=True), default=None)
@click.option("--inventory", "inventory_file", type=click.Path(exists=True), default=None)
@click.option("--static-dir", type=click.Path(exists=True), default=None,
              help="Serve the web UI's built assets from this directory.")
@click.option("--dispatch-seed", default=0, show_default=True)
def serve(host, port, data_dir, items_file, workers_file, admin_token,
          bank_file, inventory_file, static_dir, dispatch_seed):
    """Run the live annotation-session HTTP service."""
    import uvicorn

    from .service import ServiceConfig, create_app
    config = ServiceConfig(
        data_dir=Path(data_dir), items_file=Path(items_file),
        workers_file=Path(workers_file), admin_token=admin_token,
        bank_file=Path(bank_file) if bank_file else None,
        inventory_file=Path(inventory_file) if inventory_file else None,
        dispatch_seed=dispatch_seed)
    app = create_app(config, static_dir=Path(static_dir) if static_dir else None)
    uvicorn.run(app, host=host, port=port)


def _write_jsonl(records, out_file, quiet=False):
    text = "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records)
    if out_file == "-":
        if not quiet:
            sys.stdout.write(text)
    else:
        Path(out_file).write_text(text, "utf-8")


if __name__ == "__main__":
    main()
