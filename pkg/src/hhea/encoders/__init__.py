"""Per-entity embedding encoders: whitened names, periodic time, walk-based structure."""

from .skipgram import SkipGramConfig, train_skipgram
from .time2vec import Time2VecParams, entity_time_embedding, time2vec, time2vec_table
from .walks import RandomWalkConfig, UnifiedGraph, generate_walks, merge_graphs, split_unified
from .whitening import WhiteningTransform, apply_whitening, fit_whitening

__all__ = [
    "WhiteningTransform",
    "fit_whitening",
    "apply_whitening",
    "Time2VecParams",
    "time2vec",
    "time2vec_table",
    "entity_time_embedding",
    "RandomWalkConfig",
    "UnifiedGraph",
    "merge_graphs",
    "generate_walks",
    "split_unified",
    "SkipGramConfig",
    "train_skipgram",
]
