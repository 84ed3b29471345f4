"""Heterogeneity statistics for a pair of aligned knowledge graphs.

Covers the usual dataset profile: per-graph density and degree distribution,
per-side anchor overlap, and a cross-graph neighborhood similarity score in
which aligned neighbor pairs count as shared dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kg import AnchorSet, KnowledgeGraph

__all__ = [
    "DegreeHistogram",
    "HeterogeneityReport",
    "density",
    "overlapping_ratio",
    "degree_distribution",
    "structure_similarity",
    "analyze_pair",
]


@dataclass
class DegreeHistogram:
    """Fraction of entities per degree value; fractions sum to 1."""

    buckets: dict[int, float] = field(default_factory=dict)


def density(kg: KnowledgeGraph) -> float:
    """Facts per entity."""
    if kg.n_entities == 0:
        raise ValueError("density of an empty graph is undefined")
    return kg.n_facts / kg.n_entities


def overlapping_ratio(kg: KnowledgeGraph, anchors: AnchorSet, side: int) -> float:
    """Fraction of the graph's entities that appear on the given anchor side."""
    ids = anchors.side(side)
    if ids.size and (ids.min() < 0 or ids.max() >= kg.n_entities):
        raise ValueError("anchor IDs out of range for this graph")
    return len(set(ids.tolist())) / kg.n_entities


def degree_distribution(kg: KnowledgeGraph) -> DegreeHistogram:
    degrees = kg.degrees()
    values, counts = np.unique(degrees, return_counts=True)
    n = kg.n_entities
    return DegreeHistogram({int(v): int(c) / n for v, c in zip(values, counts)})


def _distinct_neighbors(kg: KnowledgeGraph, entity: int) -> np.ndarray:
    return np.unique(kg.neighbors(entity))


def structure_similarity(
    kg1: KnowledgeGraph, kg2: KnowledgeGraph, anchors: AnchorSet
) -> float:
    """Mean cosine between aligned entities' 1-hop indicator vectors.

    The two entity spaces are made comparable through the anchors: every
    anchored entity is re-indexed to its anchor-pair IDs, so a neighbor on one
    side matches a neighbor on the other side exactly when the two form an
    anchor pair.  Unanchored neighbors occupy side-private dimensions and can
    never match.  A pair where either entity has no neighbors contributes 0.
    """
    if len(anchors) == 0:
        raise ValueError("structure similarity needs a non-empty anchor set")

    pair_ids_1: dict[int, list[int]] = {}
    pair_ids_2: dict[int, list[int]] = {}
    for p, (e1, e2) in enumerate(anchors):
        pair_ids_1.setdefault(e1, []).append(p)
        pair_ids_2.setdefault(e2, []).append(p)

    total = 0.0
    for e1, e2 in anchors:
        nbrs1 = _distinct_neighbors(kg1, e1)
        nbrs2 = _distinct_neighbors(kg2, e2)
        if nbrs1.size == 0 or nbrs2.size == 0:
            continue

        bits2: set[int] = set()
        norm2_sq = 0
        for m in nbrs2.tolist():
            ps = pair_ids_2.get(m)
            if ps is None:
                norm2_sq += 1
            else:
                norm2_sq += len(ps)
                bits2.update(ps)

        norm1_sq = 0
        common = 0
        for n in nbrs1.tolist():
            ps = pair_ids_1.get(n)
            if ps is None:
                norm1_sq += 1
            else:
                norm1_sq += len(ps)
                for p in ps:
                    if p in bits2:
                        common += 1
        total += common / np.sqrt(norm1_sq * norm2_sq)
    return total / len(anchors)


@dataclass
class KgStats:
    entities: int
    relations: int
    facts: int
    density: float
    degree_histogram: DegreeHistogram


@dataclass
class HeterogeneityReport:
    kg1: KgStats
    kg2: KgStats
    anchors: int
    overlap_kg1: float
    overlap_kg2: float
    structure_similarity: float

    def as_key_values(self) -> list[tuple[str, str]]:
        rows: list[tuple[str, str]] = []
        for label, stats, overlap in (
            ("kg1", self.kg1, self.overlap_kg1),
            ("kg2", self.kg2, self.overlap_kg2),
        ):
            rows.append((f"{label}.entities", str(stats.entities)))
            rows.append((f"{label}.relations", str(stats.relations)))
            rows.append((f"{label}.facts", str(stats.facts)))
            rows.append((f"{label}.density", f"{stats.density:.6f}"))
            rows.append((f"{label}.overlapping", f"{overlap:.6f}"))
        rows.append(("anchors", str(self.anchors)))
        rows.append(("structure_similarity", f"{self.structure_similarity:.6f}"))
        return rows

    def format_table(self) -> str:
        header = f"{'':<12}{'entities':>12}{'relations':>12}{'facts':>12}{'density':>12}{'overlap':>10}"
        lines = [header]
        for label, stats, overlap in (
            ("KG1", self.kg1, self.overlap_kg1),
            ("KG2", self.kg2, self.overlap_kg2),
        ):
            lines.append(
                f"{label:<12}{stats.entities:>12}{stats.relations:>12}"
                f"{stats.facts:>12}{stats.density:>12.3f}{overlap:>9.2%}"
            )
        lines.append(f"anchors: {self.anchors}")
        lines.append(f"structure similarity: {self.structure_similarity:.1%}")
        return "\n".join(lines)


def analyze_pair(
    kg1: KnowledgeGraph, kg2: KnowledgeGraph, anchors: AnchorSet
) -> HeterogeneityReport:
    return HeterogeneityReport(
        kg1=KgStats(
            kg1.n_entities, kg1.n_relations, kg1.n_facts, density(kg1), degree_distribution(kg1)
        ),
        kg2=KgStats(
            kg2.n_entities, kg2.n_relations, kg2.n_facts, density(kg2), degree_distribution(kg2)
        ),
        anchors=len(anchors),
        overlap_kg1=overlapping_ratio(kg1, anchors, 1),
        overlap_kg2=overlapping_ratio(kg2, anchors, 2),
        structure_similarity=structure_similarity(kg1, kg2, anchors),
    )
