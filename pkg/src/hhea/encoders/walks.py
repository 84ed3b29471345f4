"""Cross-graph random walks: merged adjacency plus distance-biased stepping.

The two graphs are joined into one node space (KG2 offset by KG1's size) with
bidirectional bridge edges on the training anchors, so walks can cross
between graphs and the resulting embeddings live in one comparable space.
Each step chooses among the current node's neighbors (previous node
excluded): candidates adjacent to the previous node carry weight ``1 - beta``,
candidates two hops from it carry weight ``beta``, normalized per step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..embeddings import EmbeddingSet
from ..kg import AnchorSet, KnowledgeGraph

__all__ = ["RandomWalkConfig", "UnifiedGraph", "merge_graphs", "generate_walks", "split_unified"]


@dataclass(frozen=True)
class RandomWalkConfig:
    beta: float = 0.9
    walks_per_node: int = 10
    walk_length: int = 40
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if self.walks_per_node < 1 or self.walk_length < 1:
            raise ValueError("walks_per_node and walk_length must be positive")


class UnifiedGraph:
    """Undirected adjacency over KG1 + KG2 nodes with distinct sorted neighbor lists.

    Each adjacency entry keeps a relation label (first one seen for that node
    pair); bridge edges carry ``bridge_relation``.  Walks sample over distinct
    neighbors, so parallel edges do not bias steps.
    """

    def __init__(
        self,
        n_nodes: int,
        edges_u: np.ndarray,
        edges_v: np.ndarray,
        offset: int,
        relations: np.ndarray | None = None,
        bridge_relation: int = -1,
    ):
        self.n_nodes = n_nodes
        self.offset = offset  # KG2 node IDs start here
        self.bridge_relation = bridge_relation
        if relations is None:
            relations = np.zeros(edges_u.shape[0], dtype=np.int64)
        src = np.concatenate([edges_u, edges_v])
        dst = np.concatenate([edges_v, edges_u])
        rel = np.concatenate([relations, relations])
        # Distinct neighbors per node: keep the first relation per (src, dst).
        if src.size:
            keys = src * np.int64(n_nodes) + dst
            order = np.argsort(keys, kind="stable")
            keys = keys[order]
            rel = rel[order]
            first = np.ones(keys.size, dtype=bool)
            first[1:] = keys[1:] != keys[:-1]
            keys, rel = keys[first], rel[first]
            src = keys // n_nodes
            dst = keys % n_nodes
        self.indptr = np.zeros(n_nodes + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n_nodes), out=self.indptr[1:])
        self.neighbor = dst.astype(np.int64)
        self.relation = rel.astype(np.int64)

    def neighbors(self, node: int) -> np.ndarray:
        """Sorted distinct neighbors."""
        return self.neighbor[self.indptr[node] : self.indptr[node + 1]]

    def neighbor_relations(self, node: int) -> np.ndarray:
        """Relation labels aligned with :meth:`neighbors`."""
        return self.relation[self.indptr[node] : self.indptr[node + 1]]

    def degree(self, node: int) -> int:
        return int(self.indptr[node + 1] - self.indptr[node])

    def adjacent(self, node: int, others: np.ndarray) -> np.ndarray:
        """Boolean mask: which of ``others`` neighbor ``node``."""
        nbrs = self.neighbors(node)
        pos = np.searchsorted(nbrs, others)
        pos = np.minimum(pos, nbrs.size - 1) if nbrs.size else pos
        if nbrs.size == 0:
            return np.zeros(others.shape, dtype=bool)
        return nbrs[pos] == others


def merge_graphs(
    kg1: KnowledgeGraph, kg2: KnowledgeGraph, train_anchors: AnchorSet
) -> UnifiedGraph:
    """Disjoint union of both graphs plus one bridge edge per training anchor.

    KG2 relation IDs are offset by KG1's relation count; bridges carry the
    reserved ID after both vocabularies.  Test anchors are never bridged.
    """
    n1 = kg1.n_entities
    bridge_relation = kg1.n_relations + kg2.n_relations
    a1, a2 = train_anchors.arrays()
    edges_u = np.concatenate([kg1.heads, kg2.heads + n1, a1])
    edges_v = np.concatenate([kg1.tails, kg2.tails + n1, a2 + n1])
    relations = np.concatenate(
        [
            kg1.rels,
            kg2.rels + kg1.n_relations,
            np.full(len(train_anchors), bridge_relation, dtype=np.int64),
        ]
    )
    return UnifiedGraph(
        n1 + kg2.n_entities,
        edges_u,
        edges_v,
        offset=n1,
        relations=relations,
        bridge_relation=bridge_relation,
    )


def step_weights(graph: UnifiedGraph, prev: int, candidates: np.ndarray, beta: float) -> np.ndarray:
    """Normalized pick probabilities over candidates from a node reached via ``prev``."""
    near = graph.adjacent(prev, candidates)
    w = np.where(near, 1.0 - beta, beta)
    return w / w.sum()


def generate_walks(graph: UnifiedGraph, config: RandomWalkConfig) -> list[list[int]]:
    """Distance-biased walks from every non-isolated node.

    Per-node RNG streams are derived from (seed, node), so output does not
    depend on scheduling.  A walk stops early when the candidate set empties.
    """
    walks: list[list[int]] = []
    for node in range(graph.n_nodes):
        if graph.degree(node) == 0:
            continue
        rng = np.random.default_rng([config.seed, node])
        for _ in range(config.walks_per_node):
            walk = [node]
            prev = -1
            cur = node
            while len(walk) < config.walk_length:
                nbrs = graph.neighbors(cur)
                if prev < 0:
                    nxt = int(nbrs[rng.integers(nbrs.size)])
                else:
                    candidates = nbrs[nbrs != prev]
                    if candidates.size == 0:
                        break
                    p = step_weights(graph, prev, candidates, config.beta)
                    nxt = int(candidates[rng.choice(candidates.size, p=p)])
                walk.append(nxt)
                prev, cur = cur, nxt
            walks.append(walk)
    return walks


def split_unified(embeddings: EmbeddingSet, offset: int) -> tuple[EmbeddingSet, EmbeddingSet]:
    """Cut a unified embedding table back into per-graph tables."""
    return (
        EmbeddingSet(embeddings.matrix[:offset]),
        EmbeddingSet(embeddings.matrix[offset:]),
    )
