"""End-to-end pipeline runs, masking experiments, and report files.

A run executes: load -> optional mask -> encoders -> training -> ranking, and
writes ``report.csv``, ``ranks.csv``, ``loss.csv``, and ``config.resolved``
into the output directory.  Grid configs repeat the run per mask ratio and
add a combined ``grid.csv``.  Everything is deterministic under the config
seed: two runs with the same config produce byte-identical reports.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, replace

import numpy as np

from .analysis import analyze_pair
from .config import ExperimentConfig
from .embeddings import EmbeddingSet, read_embedding_file, trigram_name_embeddings
from .encoders import (
    RandomWalkConfig,
    SkipGramConfig,
    apply_whitening,
    fit_whitening,
    generate_walks,
    merge_graphs,
    split_unified,
    train_skipgram,
)
from .kg import (
    AnchorSet,
    CalendarConfig,
    Fact,
    KnowledgeGraph,
    TimeSpan,
    entity_time_vectors,
    load_anchors,
    load_kg,
    round_half_up,
    split_anchors,
)
from .matching import RankingReport, cosine_matrix, csls_matrix, rank_and_score
from .training import AlignmentModel, ModelParams, SideInputs, TrainConfig, train

__all__ = [
    "StageError",
    "PipelineResult",
    "PreparedRun",
    "mask_structure",
    "mask_names",
    "prepare_run",
    "evaluate_model",
    "run_pipeline",
    "run_grid",
    "analyze_to_files",
]


class StageError(RuntimeError):
    """Pipeline failure, prefixed with the stage that raised it."""


def _stage(label: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:
        raise StageError(f"[{label}] {exc}") from exc


def mask_structure(kg: KnowledgeGraph, ratio: float, seed: int) -> KnowledgeGraph:
    """Uniformly delete round(ratio * facts) facts; all entities are retained."""
    if not 0.0 <= ratio <= 1.0:
        raise ValueError("mask ratio must lie in [0, 1]")
    n_delete = round_half_up(ratio * kg.n_facts)
    if n_delete == 0:
        return kg
    rng = np.random.default_rng(seed)
    drop = set(rng.choice(kg.n_facts, size=n_delete, replace=False).tolist())
    facts = []
    for i in range(kg.n_facts):
        if i in drop:
            continue
        time = None
        if kg.temporal:
            time = TimeSpan(int(kg.time_begin[i]), int(kg.time_end[i]))
        facts.append(Fact(int(kg.heads[i]), int(kg.rels[i]), int(kg.tails[i]), time))
    return KnowledgeGraph(
        kg.entity_names, kg.relation_names, facts, kg.temporal, kg.calendar
    )


def mask_names(
    embeddings: EmbeddingSet, ratio: float, seed: int
) -> tuple[EmbeddingSet, np.ndarray]:
    """Replace round(ratio * N) rows with random directions at the unmasked mean norm.

    Returns the masked set and the replaced row indices.  Random vectors keep
    cosine well-defined while carrying no name information; the two sides of
    an anchored pair are masked independently.
    """
    if not 0.0 <= ratio <= 1.0:
        raise ValueError("mask ratio must lie in [0, 1]")
    n = embeddings.entity_count
    n_mask = round_half_up(ratio * n)
    rng = np.random.default_rng(seed)
    masked = np.sort(rng.choice(n, size=n_mask, replace=False)) if n_mask else np.empty(0, np.int64)
    matrix = embeddings.matrix.copy()
    if n_mask:
        norms = np.linalg.norm(matrix, axis=1)
        keep = np.ones(n, dtype=bool)
        keep[masked] = False
        pool = norms[keep] if keep.any() else norms
        scale = float(pool.mean()) if pool.size else 1.0
        if scale == 0.0:
            scale = 1.0
        directions = rng.standard_normal((n_mask, embeddings.dim))
        directions /= np.maximum(np.linalg.norm(directions, axis=1), 1e-12)[:, None]
        matrix[masked] = directions * scale
    return EmbeddingSet(matrix), masked.astype(np.int64)


def _load_name_embeddings(cfg: ExperimentConfig, kg: KnowledgeGraph, path: str) -> EmbeddingSet:
    if not path:
        return trigram_name_embeddings(kg.entity_names, dim=cfg.trigram_dim)
    names, emb = read_embedding_file(path)
    row_of = {name: i for i, name in enumerate(names)}
    rows = np.empty(kg.n_entities, dtype=np.int64)
    for i, name in enumerate(kg.entity_names):
        if name not in row_of:
            raise ValueError(f"{path}: no embedding row for entity {name!r}")
        rows[i] = row_of[name]
    return EmbeddingSet(emb.matrix[rows])


def structure_embeddings(
    cfg: ExperimentConfig,
    kg1: KnowledgeGraph,
    kg2: KnowledgeGraph,
    train_pairs: AnchorSet,
) -> tuple[EmbeddingSet, EmbeddingSet]:
    """Walk + skip-gram embeddings over the anchor-bridged union of both graphs."""
    graph = merge_graphs(kg1, kg2, train_pairs)
    walks = generate_walks(
        graph,
        RandomWalkConfig(
            beta=cfg.walk_beta,
            walks_per_node=cfg.walks_per_node,
            walk_length=cfg.walk_length,
            seed=cfg.seed,
        ),
    )
    emb, _ = train_skipgram(
        walks,
        graph.n_nodes,
        SkipGramConfig(
            dim=cfg.sg_dim,
            window=cfg.sg_window,
            negatives=cfg.sg_negatives,
            epochs=cfg.sg_epochs,
            learning_rate=cfg.sg_learning_rate,
            seed=cfg.seed,
        ),
    )
    return split_unified(emb, graph.offset)


@dataclass
class PreparedRun:
    """Everything needed to train and evaluate: graphs, splits, inputs, model."""

    cfg: ExperimentConfig
    kg1: KnowledgeGraph
    kg2: KnowledgeGraph
    anchors: AnchorSet
    train_pairs: AnchorSet
    test_pairs: AnchorSet
    model: AlignmentModel


def prepare_run(cfg: ExperimentConfig) -> PreparedRun:
    """Load, split, optionally mask, and encode; returns an untrained model."""
    cfg.validate()
    if len(cfg.mask_ratios) != 1:
        raise StageError("[config] prepare_run expects a single mask ratio; use run_grid")
    mask_ratio = cfg.mask_ratios[0]

    calendar = CalendarConfig(cfg.calendar_base_year, cfg.calendar_months)
    kg1 = _stage("load-kg1", load_kg, cfg.kg1_facts, cfg.temporal, calendar)
    kg2 = _stage("load-kg2", load_kg, cfg.kg2_facts, cfg.temporal, calendar)
    anchors = _stage("load-anchors", load_anchors, cfg.anchors, kg1, kg2)
    train_pairs, test_pairs = _stage(
        "split", split_anchors, anchors, cfg.train_fraction, cfg.seed
    )

    if cfg.mask_kind == "structure" and mask_ratio > 0:
        kg1 = _stage("mask-structure", mask_structure, kg1, mask_ratio, [cfg.seed, 11])
        kg2 = _stage("mask-structure", mask_structure, kg2, mask_ratio, [cfg.seed, 12])

    name1 = name2 = None
    if cfg.use_name:
        name1 = _stage("name-encoder", _load_name_embeddings, cfg, kg1, cfg.name_embeddings_1)
        name2 = _stage("name-encoder", _load_name_embeddings, cfg, kg2, cfg.name_embeddings_2)
        if cfg.mask_kind == "name" and mask_ratio > 0:
            name1, _ = _stage("mask-names", mask_names, name1, mask_ratio, [cfg.seed, 21])
            name2, _ = _stage("mask-names", mask_names, name2, mask_ratio, [cfg.seed, 22])
        if cfg.whitening:
            joint = EmbeddingSet(np.vstack([name1.matrix, name2.matrix]))
            transform = _stage("whitening", fit_whitening, joint, cfg.whitening_dim)
            name1 = apply_whitening(transform, name1)
            name2 = apply_whitening(transform, name2)

    time1 = time2 = None
    if cfg.use_time:
        if not cfg.temporal:
            raise StageError("[time-encoder] use_time requires a temporal dataset")
        time1 = _stage("time-encoder", entity_time_vectors, kg1)
        time2 = _stage("time-encoder", entity_time_vectors, kg2)

    dw1 = dw2 = None
    if cfg.use_structure:
        dw1, dw2 = _stage("structure-encoder", structure_embeddings, cfg, kg1, kg2, train_pairs)

    params = ModelParams.init(
        seed=cfg.seed,
        name_in=name1.dim if cfg.use_name else None,
        name_out=cfg.name_dim,
        use_time=cfg.use_time,
        t2v_k=cfg.t2v_k,
        time_out=cfg.time_dim,
        n_months=cfg.calendar_months,
        dw_in=dw1.dim if cfg.use_structure else None,
        dw_out=cfg.structure_dim,
    )
    model = AlignmentModel(
        params,
        SideInputs(name=name1, time_vectors=time1, structure=dw1),
        SideInputs(name=name2, time_vectors=time2, structure=dw2),
    )
    return PreparedRun(cfg, kg1, kg2, anchors, train_pairs, test_pairs, model)


def train_prepared(run: PreparedRun) -> list[float]:
    """Train the prepared model in place; returns per-epoch mean loss."""
    cfg = run.cfg
    train_cfg = TrainConfig(
        margin=cfg.margin,
        negatives=cfg.negatives,
        epochs=cfg.epochs,
        learning_rate=cfg.learning_rate,
        batch_size=cfg.batch_size,
        seed=cfg.seed,
    )
    result = _stage("train", train, run.model, run.train_pairs, run.kg2.n_entities, train_cfg)
    return result.epoch_losses


def evaluate_model(
    cfg: ExperimentConfig,
    model: AlignmentModel,
    kg1: KnowledgeGraph,
    kg2: KnowledgeGraph,
    test_pairs: AnchorSet,
) -> RankingReport:
    """Rank candidates for every test pair; neighborhood size is clamped to the
    candidate matrix shape."""
    pairs = list(test_pairs)
    src_side, tgt_side = (1, 2) if cfg.direction == "kg1->kg2" else (2, 1)
    if cfg.direction == "kg2->kg1":
        pairs = [(b, a) for a, b in pairs]
    tgt_kg = kg2 if tgt_side == 2 else kg1
    src_ids = np.array(sorted({p[0] for p in pairs}), dtype=np.int64)
    if cfg.candidates == "full":
        tgt_ids = np.arange(tgt_kg.n_entities, dtype=np.int64)
    else:
        tgt_ids = np.array(sorted({p[1] for p in pairs}), dtype=np.int64)
    sim = cosine_matrix(
        EmbeddingSet(model.forward(src_side, src_ids)),
        EmbeddingSet(model.forward(tgt_side, tgt_ids)),
    )
    k = min(cfg.csls_k, sim.values.shape[0], sim.values.shape[1])
    sim = csls_matrix(sim, k)
    return rank_and_score(sim, src_ids, tgt_ids, pairs, list(cfg.hits), cfg.direction)


@dataclass
class PipelineResult:
    report: RankingReport
    epoch_losses: list[float]
    out_dir: str


def run_pipeline(cfg: ExperimentConfig, out_dir: str | None = None) -> PipelineResult:
    """Execute one full run and write its report files."""
    out_dir = out_dir if out_dir is not None else cfg.out_dir
    if not out_dir:
        raise StageError("[config] out_dir not set")
    run = prepare_run(cfg)
    os.makedirs(out_dir, exist_ok=True)
    losses = train_prepared(run)
    report = _stage("evaluate", evaluate_model, cfg, run.model, run.kg1, run.kg2, run.test_pairs)
    _write_reports(out_dir, cfg, report, losses, run.test_pairs, run.kg1, run.kg2)
    return PipelineResult(report=report, epoch_losses=losses, out_dir=out_dir)


def _write_reports(out_dir, cfg, report, losses, test_pairs, kg1, kg2):
    with open(os.path.join(out_dir, "config.resolved"), "w", encoding="utf-8") as fh:
        fh.write(cfg.resolved_text())
    with open(os.path.join(out_dir, "loss.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epoch", "mean_loss"])
        for epoch, loss in enumerate(losses):
            writer.writerow([epoch, repr(loss)])
    with open(os.path.join(out_dir, "report.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["metric", "value"])
        for k in sorted(report.hits_at):
            writer.writerow([f"hits@{k}", f"{report.hits_at[k]:.6f}"])
        writer.writerow(["mrr", f"{report.mrr:.6f}"])
        writer.writerow(["pairs", report.n_pairs])
        writer.writerow(["direction", report.direction])
    pairs = list(test_pairs)
    if cfg.direction == "kg2->kg1":
        pairs = [(b, a) for a, b in pairs]
        src_names, tgt_names = kg2.entity_names, kg1.entity_names
    else:
        src_names, tgt_names = kg1.entity_names, kg2.entity_names
    with open(os.path.join(out_dir, "ranks.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["source", "target", "rank"])
        for (src, tgt), rank in zip(pairs, report.ranks):
            writer.writerow([src_names[src], tgt_names[tgt], int(rank)])


def run_grid(cfg: ExperimentConfig, out_dir: str | None = None) -> list[tuple[float, RankingReport]]:
    """One pipeline run per mask ratio plus a combined ``grid.csv``."""
    cfg.validate()
    out_dir = out_dir if out_dir is not None else cfg.out_dir
    if not out_dir:
        raise StageError("[config] out_dir not set")
    os.makedirs(out_dir, exist_ok=True)
    results = []
    for ratio in cfg.mask_ratios:
        sub_cfg = replace(cfg, mask_ratios=(ratio,))
        sub_dir = os.path.join(out_dir, f"ratio_{ratio:.2f}")
        results.append((ratio, run_pipeline(sub_cfg, sub_dir).report))
    with open(os.path.join(out_dir, "grid.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        ks = sorted(results[0][1].hits_at)
        writer.writerow(["ratio"] + [f"hits@{k}" for k in ks] + ["mrr"])
        for ratio, report in results:
            writer.writerow(
                [repr(float(ratio))]
                + [f"{report.hits_at[k]:.6f}" for k in ks]
                + [f"{report.mrr:.6f}"]
            )
    return results


def analyze_to_files(
    kg1: KnowledgeGraph, kg2: KnowledgeGraph, anchors: AnchorSet, out_dir: str
) -> str:
    """Heterogeneity report as key-value text plus per-graph histogram CSVs."""
    os.makedirs(out_dir, exist_ok=True)
    report = analyze_pair(kg1, kg2, anchors)
    with open(os.path.join(out_dir, "report.kv"), "w", encoding="utf-8") as fh:
        for key, value in report.as_key_values():
            fh.write(f"{key} = {value}\n")
    for label, stats in (("kg1", report.kg1), ("kg2", report.kg2)):
        path = os.path.join(out_dir, f"{label}_degree_hist.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["degree", "fraction"])
            for degree in sorted(stats.degree_histogram.buckets):
                writer.writerow([degree, repr(stats.degree_histogram.buckets[degree])])
    return report.format_table()
