"""Feature whitening: zero-mean, identity-covariance projection with dim reduction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..embeddings import EmbeddingSet

__all__ = ["WhiteningTransform", "fit_whitening", "apply_whitening"]

# Eigenvalues below this are floored before inversion so near-degenerate
# directions cannot explode.
EIGENVALUE_FLOOR = 1e-10


@dataclass
class WhiteningTransform:
    """Column mean plus projection whose columns are eigenvectors scaled by 1/sqrt(eigenvalue)."""

    mean: np.ndarray
    projection: np.ndarray
    eigenvalues: np.ndarray  # descending, after flooring

    @property
    def in_dim(self) -> int:
        return self.projection.shape[0]

    @property
    def out_dim(self) -> int:
        return self.projection.shape[1]


def fit_whitening(embeddings: EmbeddingSet, out_dim: int) -> WhiteningTransform:
    """Fit on the population covariance and keep the top ``out_dim`` components."""
    x = embeddings.matrix
    n, d = x.shape
    if n < 2:
        raise ValueError("whitening needs at least 2 rows")
    if not 1 <= out_dim <= d:
        raise ValueError(f"out_dim {out_dim} not in [1, {d}]")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / n
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1][:out_dim]
    eigvals = np.maximum(eigvals[order], EIGENVALUE_FLOOR)
    projection = eigvecs[:, order] / np.sqrt(eigvals)
    return WhiteningTransform(mean=mean, projection=projection, eigenvalues=eigvals)


def apply_whitening(transform: WhiteningTransform, embeddings: EmbeddingSet) -> EmbeddingSet:
    if embeddings.dim != transform.in_dim:
        raise ValueError(
            f"dim mismatch: embeddings have {embeddings.dim}, transform expects {transform.in_dim}"
        )
    return EmbeddingSet((embeddings.matrix - transform.mean) @ transform.projection)
