"""Skip-gram with negative sampling over random-walk corpora, in plain numpy.

Positive pairs are (center, context) within a fixed window along each walk;
negatives are drawn from the walk unigram distribution raised to the 0.75
power.  Updates run in vectorized minibatches with deterministic seeding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..embeddings import EmbeddingSet

__all__ = ["SkipGramConfig", "train_skipgram"]

_BATCH = 4096


@dataclass(frozen=True)
class SkipGramConfig:
    dim: int = 64
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    seed: int = 0

    def __post_init__(self):
        if min(self.dim, self.window, self.negatives) < 1 or self.epochs < 0:
            raise ValueError("dim, window, negatives must be positive; epochs >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -30.0, 30.0)))


def _log_sigmoid(x: np.ndarray) -> np.ndarray:
    return -np.log1p(np.exp(-np.clip(x, -30.0, 30.0)))


def _extract_pairs(walks: list[list[int]], window: int) -> tuple[np.ndarray, np.ndarray]:
    centers: list[int] = []
    contexts: list[int] = []
    for walk in walks:
        length = len(walk)
        for i, center in enumerate(walk):
            lo = max(0, i - window)
            hi = min(length, i + window + 1)
            for j in range(lo, hi):
                if j != i:
                    centers.append(center)
                    contexts.append(walk[j])
    return np.asarray(centers, dtype=np.int64), np.asarray(contexts, dtype=np.int64)


def train_skipgram(
    walks: list[list[int]], n_nodes: int, config: SkipGramConfig
) -> tuple[EmbeddingSet, list[float]]:
    """Train node embeddings on walks; returns (embeddings, per-epoch mean loss).

    With ``epochs=0`` the returned table is exactly the seeded random
    initialization.
    """
    if not walks or all(len(w) == 0 for w in walks):
        raise ValueError("empty walk corpus")
    rng = np.random.default_rng(config.seed)
    dim = config.dim
    w_in = (rng.random((n_nodes, dim)) - 0.5) / dim
    w_out = np.zeros((n_nodes, dim))

    centers, contexts = _extract_pairs(walks, config.window)
    if centers.size == 0:
        raise ValueError("walks too short to form any training pair")

    counts = np.bincount(
        np.concatenate([np.asarray(w, dtype=np.int64) for w in walks]), minlength=n_nodes
    ).astype(np.float64)
    neg_probs = counts**0.75
    neg_cdf = np.cumsum(neg_probs / neg_probs.sum())

    losses: list[float] = []
    lr = config.learning_rate
    for _ in range(config.epochs):
        order = rng.permutation(centers.size)
        epoch_loss = 0.0
        for start in range(0, order.size, _BATCH):
            idx = order[start : start + _BATCH]
            c = centers[idx]
            o = contexts[idx]
            negs = np.searchsorted(neg_cdf, rng.random((idx.size, config.negatives)))

            v = w_in[c]  # (B, d)
            u_pos = w_out[o]  # (B, d)
            u_neg = w_out[negs]  # (B, K, d)

            s_pos = np.einsum("bd,bd->b", v, u_pos)
            s_neg = np.einsum("bd,bkd->bk", v, u_neg)
            epoch_loss += float(-_log_sigmoid(s_pos).sum() - _log_sigmoid(-s_neg).sum())

            g_pos = _sigmoid(s_pos) - 1.0  # (B,)
            g_neg = _sigmoid(s_neg)  # (B, K)

            # Per-node updates are averaged over their occurrences in the
            # batch; plain sums blow up on hub nodes that dominate a batch.
            c_counts = np.bincount(c, minlength=n_nodes)[c].astype(np.float64)
            out_idx = np.concatenate([o, negs.reshape(-1)])
            out_counts = np.bincount(out_idx, minlength=n_nodes)

            grad_v = (g_pos[:, None] * u_pos + np.einsum("bk,bkd->bd", g_neg, u_neg)) / c_counts[:, None]
            np.add.at(w_in, c, -lr * grad_v)
            np.add.at(w_out, o, -lr * (g_pos[:, None] * v) / out_counts[o][:, None].astype(np.float64))
            np.add.at(
                w_out,
                negs.reshape(-1),
                -lr
                * (g_neg[:, :, None] * v[:, None, :]).reshape(-1, dim)
                / out_counts[negs.reshape(-1)][:, None].astype(np.float64),
            )
        losses.append(epoch_loss / centers.size)
    return EmbeddingSet(w_in), losses
