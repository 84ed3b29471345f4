"""Candidate ranking: cosine similarity, hubness-corrected rescaling, Hits@k/MRR.

The rescaled score subtracts each point's mean similarity to its k nearest
neighbors on the other side (rows and columns), which penalizes hub entities
that are close to everything.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embeddings import EmbeddingSet

__all__ = ["SimilarityMatrix", "RankingReport", "cosine_matrix", "csls_matrix", "rank_and_score"]


@dataclass
class SimilarityMatrix:
    """(n_src, n_tgt) scores; zero-norm rows are flagged and score 0 everywhere."""

    values: np.ndarray
    zero_src_rows: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    zero_tgt_rows: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("similarity matrix must be 2-D")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("similarity matrix contains non-finite values")


def _normalized(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(matrix, axis=1)
    zero = np.flatnonzero(norms == 0)
    safe = np.where(norms == 0, 1.0, norms)
    return matrix / safe[:, None], zero


def cosine_matrix(src: EmbeddingSet, tgt: EmbeddingSet) -> SimilarityMatrix:
    if src.dim != tgt.dim:
        raise ValueError(f"dim mismatch: {src.dim} vs {tgt.dim}")
    src_n, zero_src = _normalized(src.matrix)
    tgt_n, zero_tgt = _normalized(tgt.matrix)
    return SimilarityMatrix(src_n @ tgt_n.T, zero_src, zero_tgt)


def csls_matrix(sim: SimilarityMatrix, k: int = 10) -> SimilarityMatrix:
    """Rescale: 2*sim(i,j) minus the mean of each side's k best scores."""
    values = sim.values
    n_src, n_tgt = values.shape
    if not 1 <= k <= min(n_src, n_tgt):
        raise ValueError(f"neighborhood size {k} exceeds matrix shape {values.shape}")
    r_src = np.partition(values, n_tgt - k, axis=1)[:, n_tgt - k :].mean(axis=1)
    r_tgt = np.partition(values, n_src - k, axis=0)[n_src - k :, :].mean(axis=0)
    return SimilarityMatrix(
        2.0 * values - r_src[:, None] - r_tgt[None, :],
        sim.zero_src_rows,
        sim.zero_tgt_rows,
    )


@dataclass
class RankingReport:
    ranks: np.ndarray  # per test pair, 1-based rank of the true counterpart
    hits_at: dict[int, float]
    mrr: float
    direction: str = "kg1->kg2"

    @property
    def n_pairs(self) -> int:
        return self.ranks.size


def rank_and_score(
    sim: SimilarityMatrix,
    src_ids: np.ndarray,
    tgt_ids: np.ndarray,
    test_pairs: list[tuple[int, int]],
    ks: list[int],
    direction: str = "kg1->kg2",
) -> RankingReport:
    """Rank candidates per test pair by descending score and aggregate metrics.

    ``src_ids``/``tgt_ids`` give the entity ID of each matrix row/column.
    Ties are broken by candidate column index, so results are deterministic
    and independent of test-pair order.
    """
    src_row = {int(e): i for i, e in enumerate(np.asarray(src_ids))}
    tgt_col = {int(e): j for j, e in enumerate(np.asarray(tgt_ids))}
    values = sim.values
    ranks = np.empty(len(test_pairs), dtype=np.int64)
    for i, (src, tgt) in enumerate(test_pairs):
        if src not in src_row:
            raise KeyError(f"test source entity {src} missing from similarity rows")
        if tgt not in tgt_col:
            raise KeyError(f"test target entity {tgt} missing from candidate columns")
        scores = values[src_row[src]]
        col = tgt_col[tgt]
        true_score = scores[col]
        rank = 1 + int((scores > true_score).sum()) + int((scores[:col] == true_score).sum())
        ranks[i] = rank
    hits = {int(k): float((ranks <= k).mean()) for k in ks}
    mrr = float((1.0 / ranks).mean())
    return RankingReport(ranks=ranks, hits_at=hits, mrr=mrr, direction=direction)
