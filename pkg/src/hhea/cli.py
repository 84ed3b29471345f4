"""Command-line entry point.

Every subcommand reads an optional ``--config`` file (flat ``key = value``
text) plus repeatable ``--set key=value`` overrides; a few common settings
also have dedicated flags.  Exit code is 0 on success, 1 on failure with a
stage-labeled message on stderr.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import harness
from .config import ExperimentConfig, load_experiment_config, parse_overrides
from .embeddings import EmbeddingSet, read_embedding_file, write_embedding_file
from .kg import CalendarConfig, load_anchors, load_kg, save_kg, split_anchors
from .matching import cosine_matrix, csls_matrix, rank_and_score
from .sampling import IdsConfig, ids_sample
from .training import AlignmentModel, load_checkpoint, save_checkpoint


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="flat key = value configuration file")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a configuration key (repeatable)",
    )
    parser.add_argument("--out-dir", help="shorthand for --set out_dir=...")


def _build_config(args) -> ExperimentConfig:
    overrides = parse_overrides(args.overrides)
    if getattr(args, "out_dir", None):
        overrides["out_dir"] = args.out_dir
    return load_experiment_config(args.config, overrides)


def _require(cfg: ExperimentConfig, *keys: str):
    for key in keys:
        if not getattr(cfg, key):
            raise ValueError(f"missing required configuration key {key!r}")


def _load_pair(cfg: ExperimentConfig):
    _require(cfg, "kg1_facts", "kg2_facts", "anchors")
    calendar = CalendarConfig(cfg.calendar_base_year, cfg.calendar_months)
    kg1 = load_kg(cfg.kg1_facts, cfg.temporal, calendar)
    kg2 = load_kg(cfg.kg2_facts, cfg.temporal, calendar)
    anchors = load_anchors(cfg.anchors, kg1, kg2)
    return kg1, kg2, anchors


def _cmd_analyze(args) -> int:
    cfg = _build_config(args)
    _require(cfg, "out_dir")
    kg1, kg2, anchors = _load_pair(cfg)
    table = harness.analyze_to_files(kg1, kg2, anchors, cfg.out_dir)
    print(table)
    return 0


def _cmd_sample(args) -> int:
    cfg = _build_config(args)
    _require(cfg, "out_dir")
    if cfg.target_kg1 < 1 or cfg.target_kg2 < 1:
        raise ValueError("sample needs target_kg1 and target_kg2")
    kg1, kg2, anchors = _load_pair(cfg)
    sub1, sub2, sub_anchors = ids_sample(
        kg1,
        kg2,
        anchors,
        IdsConfig(
            target_kg1=cfg.target_kg1,
            target_kg2=cfg.target_kg2,
            batch_fraction=cfg.batch_fraction,
            max_js_divergence=cfg.max_js_divergence,
            seed=cfg.seed,
        ),
    )
    os.makedirs(cfg.out_dir, exist_ok=True)
    save_kg(sub1, os.path.join(cfg.out_dir, "kg1_facts.tsv"))
    save_kg(sub2, os.path.join(cfg.out_dir, "kg2_facts.tsv"))
    with open(os.path.join(cfg.out_dir, "anchors.tsv"), "w", encoding="utf-8") as fh:
        for e1, e2 in sub_anchors:
            fh.write(f"{sub1.entity_names[e1]}\t{sub2.entity_names[e2]}\n")
    print(
        f"sampled {sub1.n_entities}+{sub2.n_entities} entities, "
        f"{len(sub_anchors)} anchors -> {cfg.out_dir}"
    )
    return 0


def _cmd_encode_structure(args) -> int:
    cfg = _build_config(args)
    _require(cfg, "out_dir")
    kg1, kg2, anchors = _load_pair(cfg)
    train_pairs, _ = split_anchors(anchors, cfg.train_fraction, cfg.seed)
    dw1, dw2 = harness.structure_embeddings(cfg, kg1, kg2, train_pairs)
    os.makedirs(cfg.out_dir, exist_ok=True)
    write_embedding_file(os.path.join(cfg.out_dir, "structure_kg1.txt"), kg1.entity_names, dw1.matrix)
    write_embedding_file(os.path.join(cfg.out_dir, "structure_kg2.txt"), kg2.entity_names, dw2.matrix)
    print(f"wrote structure embeddings ({dw1.dim} dims) -> {cfg.out_dir}")
    return 0


def _cmd_encode_time(args) -> int:
    cfg = _build_config(args)
    _require(cfg, "out_dir")
    if not cfg.temporal:
        raise ValueError("encode-time requires temporal = true")
    kg1, kg2, _ = _load_pair(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    from .kg import entity_time_vectors

    for label, kg in (("kg1", kg1), ("kg2", kg2)):
        vectors = entity_time_vectors(kg).astype(np.float64)
        write_embedding_file(
            os.path.join(cfg.out_dir, f"time_{label}.txt"), kg.entity_names, vectors
        )
    print(f"wrote binary month-occurrence vectors -> {cfg.out_dir}")
    return 0


def _cmd_train(args) -> int:
    cfg = _build_config(args)
    _require(cfg, "out_dir")
    run = harness.prepare_run(cfg)
    losses = harness.train_prepared(run)
    os.makedirs(cfg.out_dir, exist_ok=True)
    save_checkpoint(run.model.params, os.path.join(cfg.out_dir, "checkpoint.txt"))
    with open(os.path.join(cfg.out_dir, "loss.csv"), "w", encoding="utf-8") as fh:
        fh.write("epoch,mean_loss\n")
        for epoch, loss in enumerate(losses):
            fh.write(f"{epoch},{loss!r}\n")
    with open(os.path.join(cfg.out_dir, "config.resolved"), "w", encoding="utf-8") as fh:
        fh.write(cfg.resolved_text())
    final = losses[-1] if losses else float("nan")
    print(f"trained {cfg.epochs} epochs (final mean loss {final:.6f}) -> {cfg.out_dir}")
    return 0


def _cmd_evaluate(args) -> int:
    cfg = _build_config(args)
    if args.emb1 or args.emb2:
        if not (args.emb1 and args.emb2 and args.test_anchors):
            raise ValueError("embedding mode needs --emb1, --emb2, and --test-anchors")
        return _evaluate_embedding_files(cfg, args)
    _require(cfg, "out_dir")
    run = harness.prepare_run(cfg)
    if args.checkpoint:
        params = load_checkpoint(args.checkpoint)
        run.model = AlignmentModel(params, run.model.inputs[1], run.model.inputs[2])
    else:
        harness.train_prepared(run)
    report = harness.evaluate_model(cfg, run.model, run.kg1, run.kg2, run.test_pairs)
    _print_report(report)
    return 0


def _evaluate_embedding_files(cfg: ExperimentConfig, args) -> int:
    names1, emb1 = read_embedding_file(args.emb1)
    names2, emb2 = read_embedding_file(args.emb2)
    id1 = {name: i for i, name in enumerate(names1)}
    id2 = {name: i for i, name in enumerate(names2)}
    pairs = []
    with open(args.test_anchors, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.startswith("#"):
                continue
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 2:
                raise ValueError(f"{args.test_anchors}:{lineno}: expected 2 fields")
            if fields[0] not in id1:
                raise ValueError(f"{args.test_anchors}:{lineno}: unknown KG1 entity {fields[0]!r}")
            if fields[1] not in id2:
                raise ValueError(f"{args.test_anchors}:{lineno}: unknown KG2 entity {fields[1]!r}")
            pairs.append((id1[fields[0]], id2[fields[1]]))
    src_ids = np.array(sorted({p[0] for p in pairs}), dtype=np.int64)
    tgt_ids = np.array(sorted({p[1] for p in pairs}), dtype=np.int64)
    sim = cosine_matrix(EmbeddingSet(emb1.matrix[src_ids]), EmbeddingSet(emb2.matrix[tgt_ids]))
    k = min(cfg.csls_k, sim.values.shape[0], sim.values.shape[1])
    sim = csls_matrix(sim, k)
    report = rank_and_score(sim, src_ids, tgt_ids, pairs, list(cfg.hits), cfg.direction)
    _print_report(report)
    return 0


def _print_report(report) -> None:
    for k in sorted(report.hits_at):
        print(f"hits@{k}: {report.hits_at[k]:.4f}")
    print(f"mrr: {report.mrr:.4f}")
    print(f"pairs: {report.n_pairs}")


def _cmd_mask(args) -> int:
    cfg = _build_config(args)
    _require(cfg, "out_dir")
    if len(cfg.mask_ratios) != 1:
        raise ValueError("mask expects a single value in mask_ratios")
    ratio = cfg.mask_ratios[0]
    os.makedirs(cfg.out_dir, exist_ok=True)
    if cfg.mask_kind == "structure":
        kg1, kg2, _ = _load_pair(cfg)
        masked1 = harness.mask_structure(kg1, ratio, [cfg.seed, 11])
        masked2 = harness.mask_structure(kg2, ratio, [cfg.seed, 12])
        save_kg(masked1, os.path.join(cfg.out_dir, "kg1_facts.tsv"))
        save_kg(masked2, os.path.join(cfg.out_dir, "kg2_facts.tsv"))
        print(f"masked {ratio:.0%} of facts -> {cfg.out_dir}")
    elif cfg.mask_kind == "name":
        if not (cfg.name_embeddings_1 and cfg.name_embeddings_2):
            raise ValueError("mask_kind=name needs name_embeddings_1 and name_embeddings_2")
        for path, side in ((cfg.name_embeddings_1, 21), (cfg.name_embeddings_2, 22)):
            names, emb = read_embedding_file(path)
            masked, _ = harness.mask_names(emb, ratio, [cfg.seed, side])
            out = os.path.join(cfg.out_dir, os.path.basename(path))
            write_embedding_file(out, names, masked.matrix)
        print(f"masked {ratio:.0%} of name embeddings -> {cfg.out_dir}")
    else:
        raise ValueError("mask needs mask_kind = structure or name")
    return 0


def _cmd_run(args) -> int:
    cfg = _build_config(args)
    _require(cfg, "out_dir")
    if len(cfg.mask_ratios) > 1:
        results = harness.run_grid(cfg)
        for ratio, report in results:
            hits1 = report.hits_at.get(1, float("nan"))
            print(f"ratio {ratio:.2f}: hits@1 {hits1:.4f}  mrr {report.mrr:.4f}")
    else:
        result = harness.run_pipeline(cfg)
        _print_report(result.report)
    print(f"reports -> {cfg.out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hhea",
        description="Entity alignment toolkit for highly heterogeneous knowledge graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    commands = {
        "analyze": (_cmd_analyze, "dataset heterogeneity statistics"),
        "sample": (_cmd_sample, "degree-preserving subgraph sampling"),
        "encode-structure": (_cmd_encode_structure, "random-walk structure embeddings"),
        "encode-time": (_cmd_encode_time, "binary month-occurrence vectors"),
        "train": (_cmd_train, "train the alignment model, save a checkpoint"),
        "evaluate": (_cmd_evaluate, "rank candidates and report Hits@k / MRR"),
        "mask": (_cmd_mask, "write masked facts or name embeddings"),
        "run": (_cmd_run, "full pipeline (grid when mask_ratios has several values)"),
    }
    for name, (handler, help_text) in commands.items():
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        p.set_defaults(handler=handler)
        if name == "evaluate":
            p.add_argument("--emb1", help="KG1 embedding file (embedding mode)")
            p.add_argument("--emb2", help="KG2 embedding file (embedding mode)")
            p.add_argument("--test-anchors", help="anchor TSV for embedding mode")
            p.add_argument("--checkpoint", help="checkpoint from 'hhea train'")
            p.add_argument("--csls-k", type=int, help="shorthand for --set csls_k=...")
            p.add_argument("--hits", help="shorthand for --set hits=...")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "csls_k", None) is not None:
        args.overrides.append(f"csls_k={args.csls_k}")
    if getattr(args, "hits", None):
        args.overrides.append(f"hits={args.hits}")
    try:
        return args.handler(args)
    except harness.StageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"[{args.command}] {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
