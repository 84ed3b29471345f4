"""Degree-guided iterative subgraph sampling for aligned graph pairs.

Entities are deleted in batches with probability inversely proportional to
(degree + 1), so low-degree entities go first and the heavy tail of the
original degree distribution survives.  Anchor endpoints are protected until
no other entity remains deletable.  After both graphs hit their targets the
sampled degree distributions are validated against the originals with a
Jensen-Shannon divergence threshold, computed over log2-bucketed degrees
(exact-degree histograms are too granular for heavy-tailed graphs).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kg import AnchorSet, Fact, KnowledgeGraph, TimeSpan, round_half_up

__all__ = ["IdsConfig", "ids_sample", "js_divergence", "degree_counts", "log_degree_histogram"]


@dataclass(frozen=True)
class IdsConfig:
    target_kg1: int
    target_kg2: int
    batch_fraction: float = 0.05
    max_js_divergence: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.target_kg1 < 1 or self.target_kg2 < 1:
            raise ValueError("targets must be positive")
        if not 0.0 < self.batch_fraction < 1.0:
            raise ValueError("batch_fraction must lie in (0, 1)")
        if not 0.0 < self.max_js_divergence <= 1.0:
            raise ValueError("max_js_divergence must lie in (0, 1]")


def js_divergence(p: dict[int, float], q: dict[int, float]) -> float:
    """Base-2 Jensen-Shannon divergence between two degree histograms (in [0, 1])."""
    support = sorted(set(p) | set(q))
    pv = np.array([p.get(k, 0.0) for k in support], dtype=np.float64)
    qv = np.array([q.get(k, 0.0) for k in support], dtype=np.float64)
    m = 0.5 * (pv + qv)

    def kl(a, b):
        mask = a > 0
        return float(np.sum(a[mask] * np.log2(a[mask] / b[mask])))

    return 0.5 * kl(pv, m) + 0.5 * kl(qv, m)


def degree_counts(heads: np.ndarray, tails: np.ndarray, n: int) -> np.ndarray:
    return np.bincount(heads, minlength=n) + np.bincount(tails, minlength=n)


def log_degree_histogram(degrees: np.ndarray) -> dict[int, float]:
    """Degree histogram over log2 buckets: bucket = floor(log2(degree + 1))."""
    buckets = np.floor(np.log2(degrees + 1)).astype(np.int64)
    values, counts = np.unique(buckets, return_counts=True)
    total = degrees.size
    return {int(v): int(c) / total for v, c in zip(values, counts)}


class _SideState:
    def __init__(self, kg: KnowledgeGraph, target: int, protected: np.ndarray):
        if target > kg.n_entities:
            raise ValueError(
                f"target {target} exceeds graph size {kg.n_entities}"
            )
        self.kg = kg
        self.target = target
        self.alive = np.ones(kg.n_entities, dtype=bool)
        self.protected = protected
        self.original_hist = log_degree_histogram(kg.degrees())
        self.degrees = kg.degrees().astype(np.int64)

    @property
    def n_alive(self) -> int:
        return int(self.alive.sum())

    def recompute_degrees(self):
        keep = self.alive[self.kg.heads] & self.alive[self.kg.tails]
        self.degrees = degree_counts(
            self.kg.heads[keep], self.kg.tails[keep], self.kg.n_entities
        )

    def delete_batch(self, batch_fraction: float, rng: np.random.Generator):
        excess = self.n_alive - self.target
        if excess <= 0:
            return
        batch = min(excess, max(1, round_half_up(batch_fraction * self.n_alive)))
        candidates = np.flatnonzero(self.alive & ~self.protected)
        if candidates.size == 0:
            # Anchor protection is lifted only once nothing else is deletable.
            candidates = np.flatnonzero(self.alive)
        batch = min(batch, candidates.size)
        if batch == 0:
            raise ValueError("sampling target unreachable: no deletable entities")
        weights = 1.0 / (self.degrees[candidates] + 1.0)
        weights /= weights.sum()
        chosen = rng.choice(candidates, size=batch, replace=False, p=weights)
        self.alive[chosen] = False


def _rebuild(kg: KnowledgeGraph, alive: np.ndarray) -> tuple[KnowledgeGraph, np.ndarray]:
    """Induced sub-multigraph on surviving entities, IDs re-densified in old order."""
    old_ids = np.flatnonzero(alive)
    remap = np.full(kg.n_entities, -1, dtype=np.int64)
    remap[old_ids] = np.arange(old_ids.size)
    entity_names = [kg.entity_names[i] for i in old_ids]

    keep = alive[kg.heads] & alive[kg.tails]
    rel_remap: dict[int, int] = {}
    relation_names: list[str] = []
    facts: list[Fact] = []
    for i in np.flatnonzero(keep):
        old_rel = int(kg.rels[i])
        rel = rel_remap.get(old_rel)
        if rel is None:
            rel = len(relation_names)
            rel_remap[old_rel] = rel
            relation_names.append(kg.relation_names[old_rel])
        time = None
        if kg.temporal:
            time = TimeSpan(int(kg.time_begin[i]), int(kg.time_end[i]))
        facts.append(Fact(int(remap[kg.heads[i]]), rel, int(remap[kg.tails[i]]), time))
    sub = KnowledgeGraph(entity_names, relation_names, facts, kg.temporal, kg.calendar)
    return sub, remap


def ids_sample(
    kg1: KnowledgeGraph,
    kg2: KnowledgeGraph,
    anchors: AnchorSet,
    config: IdsConfig,
) -> tuple[KnowledgeGraph, KnowledgeGraph, AnchorSet]:
    """Shrink both graphs to their targets while preserving degree shape.

    Returns the induced sub-multigraphs and the surviving anchors.  Raises if
    either sampled degree distribution drifts beyond the configured
    Jensen-Shannon divergence from its original.
    """
    a1, a2 = anchors.arrays()
    prot1 = np.zeros(kg1.n_entities, dtype=bool)
    prot2 = np.zeros(kg2.n_entities, dtype=bool)
    prot1[a1] = True
    prot2[a2] = True

    sides = (
        _SideState(kg1, config.target_kg1, prot1),
        _SideState(kg2, config.target_kg2, prot2),
    )
    if sides[0].n_alive == sides[0].target and sides[1].n_alive == sides[1].target:
        return kg1, kg2, anchors

    rng = np.random.default_rng(config.seed)
    while any(s.n_alive > s.target for s in sides):
        for s in sides:
            s.delete_batch(config.batch_fraction, rng)
        for s in sides:
            s.recompute_degrees()

    sub1, remap1 = _rebuild(kg1, sides[0].alive)
    sub2, remap2 = _rebuild(kg2, sides[1].alive)

    surviving = [
        (int(remap1[e1]), int(remap2[e2]))
        for e1, e2 in anchors
        if sides[0].alive[e1] and sides[1].alive[e2]
    ]
    if not surviving:
        raise ValueError("sampling deleted every anchor pair")

    for label, side, sub in (("kg1", sides[0], sub1), ("kg2", sides[1], sub2)):
        div = js_divergence(side.original_hist, log_degree_histogram(sub.degrees()))
        if div > config.max_js_divergence:
            raise ValueError(
                f"{label}: degree distribution drifted too far "
                f"(JS divergence {div:.4f} > {config.max_js_divergence})"
            )
    return sub1, sub2, AnchorSet(surviving)
