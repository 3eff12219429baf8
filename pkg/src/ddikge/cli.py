"""Command line interface.

Subcommands: ingest, synth, train, eval, export. Exit codes: 0 success,
2 usage or config problem, 3 data problem, 4 numerical/training problem.
All artifact writes go through atomic replace, so an aborted run never
leaves a partial file behind.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .config import PRESETS, build_run_config
from .data import (
    SplitManifest,
    _atomic_write_text,
    build_filter_index,
    load_tsv,
    load_tsv_with_vocab,
    load_vocab_files,
    read_split_manifest,
    save_tsv,
    save_vocab,
    split,
    synth_kg,
    triplets_to_text,
    write_split_manifest,
)
from .errors import (
    ConfigError,
    DataError,
    DdikgeError,
    DomainError,
    EmptyDatasetError,
)
from .evaluation import (
    all_ranks,
    curve_csv,
    ddi_classification,
    link_prediction_metrics,
    pr_points,
    rank_histogram_csv,
    roc_points,
)
from .scorers import config_hash, export_csv, load_checkpoint, save_checkpoint
from .training import reports_to_csv, train


def _require_file(path: str, what: str) -> str:
    # A path the user typed wrong is a usage error (exit 2), not a data error.
    if not os.path.isfile(path):
        raise ConfigError(f"{what} not found: {path}")
    return path


def _cmd_ingest(args) -> int:
    triplets, vocab, report = load_tsv(_require_file(args.tsv, "input TSV"),
                                       has_header=args.has_header)
    if not triplets:
        raise EmptyDatasetError(f"{args.tsv}: no triplets found")
    os.makedirs(args.out, exist_ok=True)
    save_tsv(os.path.join(args.out, "triplets.tsv"), triplets, vocab)
    save_vocab(os.path.join(args.out, "vocab"), vocab)
    _atomic_write_text(os.path.join(args.out, "report.txt"), report.to_text())
    print(report.to_text(), end="")
    return 0


def _cmd_synth(args) -> int:
    triplets, vocab = synth_kg(
        args.entities, args.relations, args.clusters,
        args.density, args.noise, args.seed,
    )
    parent = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(parent, exist_ok=True)
    save_tsv(args.out, triplets, vocab)
    print(f"wrote {len(triplets)} triplets over {vocab.n_entities} entities, "
          f"{vocab.n_relations} relations to {args.out}")
    return 0


def _cmd_train(args) -> int:
    run = build_run_config(args.config, args.set)
    if args.out:
        run.out = args.out
    if not run.data:
        raise ConfigError("no input data: set `data` in the config or via --set")
    if not run.out:
        raise ConfigError("no output directory: set `out` or pass --out")

    triplets, vocab, _ = load_tsv(_require_file(run.data, "data file"))
    ds = split(triplets, run.split_ratios, run.effective_split_seed(),
               by_pair=run.split_by_pair)

    out = run.out
    os.makedirs(out, exist_ok=True)
    vocab_dir = os.path.join(out, "vocab")
    split_dir = os.path.join(out, "split")
    os.makedirs(split_dir, exist_ok=True)
    save_vocab(vocab_dir, vocab)
    paths = {}
    for name, part in (("train", ds.train), ("valid", ds.valid), ("test", ds.test)):
        paths[name] = os.path.join(split_dir, f"{name}.tsv")
        save_tsv(paths[name], part, vocab)
    manifest = SplitManifest(
        paths["train"], paths["valid"], paths["test"],
        os.path.join(vocab_dir, "entities.tsv"),
        os.path.join(vocab_dir, "relations.tsv"),
        run.effective_split_seed(), run.split_by_pair,
    )
    write_split_manifest(os.path.join(split_dir, "manifest.txt"), manifest)

    resolved = run.resolved_text()
    _atomic_write_text(os.path.join(out, "resolved.cfg"), resolved)
    chash = config_hash(resolved)
    every = run.train.checkpoint_every

    def on_epoch(report, result):
        if not args.quiet:
            print(f"epoch {report.epoch}: loss {report.loss:.6f} "
                  f"recon {report.recon_loss:.6f} critic {report.critic_loss:.6f} "
                  f"gen {report.generator_loss:.6f} ({report.seconds:.2f}s)")
        if every > 0 and report.epoch % every == 0:
            save_checkpoint(os.path.join(out, "checkpoint_last.bin"),
                            result.model, run.train.seed, chash)

    result = train(ds.train, vocab.n_entities, vocab.n_relations, run.train,
                   on_epoch=on_epoch)
    save_checkpoint(os.path.join(out, "checkpoint.bin"), result.model,
                    run.train.seed, chash)
    _atomic_write_text(os.path.join(out, "epochs.csv"), reports_to_csv(result.reports))
    print(f"trained {run.train.scorer}/{run.train.sampler} for "
          f"{run.train.epochs} epochs; artifacts in {out}")
    return 0


def _cmd_eval(args) -> int:
    model = load_checkpoint(_require_file(args.checkpoint, "checkpoint"))
    manifest = read_split_manifest(_require_file(args.split, "split manifest"))
    vocab = load_vocab_files(manifest.entities_path, manifest.relations_path)
    from .errors import EvaluationError
    if vocab.n_entities != model.n_entities or vocab.n_relations != model.n_relations:
        raise EvaluationError(
            f"checkpoint has {model.n_entities} entities / {model.n_relations} "
            f"relations but the split vocab has {vocab.n_entities} / {vocab.n_relations}"
        )
    train_t = load_tsv_with_vocab(manifest.train_path, vocab)
    valid_t = load_tsv_with_vocab(manifest.valid_path, vocab)
    test_t = load_tsv_with_vocab(manifest.test_path, vocab)
    chash = ""
    manifest_sidecar = args.checkpoint + ".manifest"
    if os.path.exists(manifest_sidecar):
        with open(manifest_sidecar, "r", encoding="utf-8") as fh:
            for line in fh:
                if line.startswith("config_hash"):
                    chash = line.partition("=")[2].strip()

    if args.task == "lp":
        index = build_filter_index(train_t, valid_t, test_t)
        ranks = all_ranks(model, test_t, index)
        report = link_prediction_metrics(model, test_t, index, cfg_hash=chash,
                                         ranks=ranks)
    else:
        known = train_t + valid_t + test_t
        report = ddi_classification(model, test_t, known, cfg_hash=chash)

    print(report.to_text(), end="")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _atomic_write_text(os.path.join(args.out, "metrics.txt"), report.to_text())
        _atomic_write_text(os.path.join(args.out, "metrics.csv"), report.to_csv())
        if args.plot_data:
            if args.task == "lp":
                _atomic_write_text(os.path.join(args.out, "rank_histogram.csv"),
                                   rank_histogram_csv(ranks))
            else:
                from .evaluation import classification_decisions
                pairs, _ = classification_decisions(model, test_t, known)
                labels, scores = [], []
                for pd in pairs:
                    for r in range(len(pd.scores)):
                        labels.append(r in pd.true_relations)
                        scores.append(float(pd.scores[r]))
                _atomic_write_text(os.path.join(args.out, "roc_curve.csv"),
                                   curve_csv(roc_points(labels, scores), "fpr", "tpr"))
                _atomic_write_text(os.path.join(args.out, "pr_curve.csv"),
                                   curve_csv(pr_points(labels, scores),
                                             "recall", "precision"))
    return 0


def _cmd_export(args) -> int:
    model = load_checkpoint(_require_file(args.checkpoint, "checkpoint"))
    vocab = load_vocab_files(
        os.path.join(args.vocab, "entities.tsv"),
        os.path.join(args.vocab, "relations.tsv"),
    )
    os.makedirs(args.out, exist_ok=True)
    export_csv(model, vocab,
               os.path.join(args.out, "entities.csv"),
               os.path.join(args.out, "relations.csv"))
    print(f"exported {model.n_entities} entity and {model.n_relations} "
          f"relation embeddings to {args.out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ddikge",
        description="Knowledge-graph embeddings for drug-drug interaction prediction.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    pi = sub.add_parser("ingest", help="canonicalize a triplet TSV into a dataset dir")
    pi.add_argument("tsv", help="input TSV: head<tab>relation<tab>tail per line")
    pi.add_argument("--out", required=True, help="output directory")
    pi.add_argument("--has-header", action="store_true", help="skip the first line")
    pi.set_defaults(func=_cmd_ingest)

    ps = sub.add_parser("synth", help="generate a clustered synthetic KG")
    ps.add_argument("--out", required=True, help="output TSV path")
    ps.add_argument("--entities", type=int, default=200)
    ps.add_argument("--relations", type=int, default=10)
    ps.add_argument("--clusters", type=int, default=4)
    ps.add_argument("--density", type=float, default=0.1)
    ps.add_argument("--noise", type=float, default=0.05)
    ps.add_argument("--seed", type=int, default=0)
    ps.set_defaults(func=_cmd_synth)

    pt = sub.add_parser("train", help="train a model from a config file")
    pt.add_argument("--config", help="config file (key = value lines)")
    pt.add_argument("--set", action="append", metavar="KEY=VALUE",
                    help="override a config key (repeatable); "
                         f"presets: {', '.join(sorted(PRESETS))}")
    pt.add_argument("--out", help="output directory (overrides config `out`)")
    pt.add_argument("--quiet", action="store_true", help="suppress per-epoch lines")
    pt.set_defaults(func=_cmd_train)

    pe = sub.add_parser("eval", help="evaluate a checkpoint on a stored split")
    pe.add_argument("--checkpoint", required=True)
    pe.add_argument("--split", required=True, help="split manifest path")
    pe.add_argument("--task", choices=("lp", "clf"), default="lp",
                    help="lp: filtered link prediction; clf: interaction typing")
    pe.add_argument("--out", help="directory for metrics files")
    pe.add_argument("--plot-data", action="store_true",
                    help="also write rank histogram / curve CSVs")
    pe.set_defaults(func=_cmd_eval)

    px = sub.add_parser("export", help="dump checkpoint embeddings to CSV")
    px.add_argument("--checkpoint", required=True)
    px.add_argument("--vocab", required=True, help="directory with entities.tsv/relations.tsv")
    px.add_argument("--out", required=True)
    px.set_defaults(func=_cmd_export)
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError) as err:
        # Bad option values are usage errors, same as a malformed config.
        print(f"error: {err}", file=sys.stderr)
        return 2
    except DataError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except DdikgeError as err:
        print(f"error: {err}", file=sys.stderr)
        return 4
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
