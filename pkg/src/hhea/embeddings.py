"""Dense per-entity embedding sets and their text file format.

The interchange format is plain UTF-8: a ``N d`` header line, then one row
per entity, ``name v1 ... vd`` separated by single spaces.  Names may contain
spaces (values are parsed from the right), but never tabs or newlines.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EmbeddingSet",
    "read_embedding_file",
    "write_embedding_file",
    "trigram_name_embeddings",
]


@dataclass
class EmbeddingSet:
    """N x d real matrix keyed by dense entity ID."""

    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        if self.matrix.ndim != 2:
            raise ValueError("embedding matrix must be 2-D")
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("embedding matrix contains non-finite values")

    @property
    def entity_count(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]


def write_embedding_file(path: str, names: list[str], matrix: np.ndarray) -> None:
    """Write embeddings in the ``N d`` text format, one named row per entity."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != len(names):
        raise ValueError("names and matrix rows disagree")
    for name in names:
        if "\t" in name or "\n" in name or "\r" in name or not name:
            raise ValueError(f"embedding row name {name!r} is empty or has tab/newline")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"{matrix.shape[0]} {matrix.shape[1]}\n")
        for name, row in zip(names, matrix):
            fh.write(name + " " + " ".join(repr(float(v)) for v in row) + "\n")


def read_embedding_file(path: str) -> tuple[list[str], EmbeddingSet]:
    """Read the text format back; values are taken from the right so names may
    contain spaces."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        header = fh.readline()
        try:
            n, d = (int(tok) for tok in header.split())
        except ValueError:
            raise ValueError(f"{path}:1: bad header {header!r}") from None
        names: list[str] = []
        matrix = np.empty((n, d), dtype=np.float64)
        for i in range(n):
            line = fh.readline()
            if not line:
                raise ValueError(f"{path}: expected {n} rows, found {i}")
            parts = line.rstrip("\n").rsplit(" ", d)
            if len(parts) != d + 1 or not parts[0]:
                raise ValueError(f"{path}:{i + 2}: malformed row")
            names.append(parts[0])
            matrix[i] = [float(tok) for tok in parts[1:]]
        if fh.readline():
            raise ValueError(f"{path}: trailing content after {n} rows")
    return names, EmbeddingSet(matrix)


def _trigram_bucket(trigram: str, dim: int) -> int:
    digest = hashlib.md5(trigram.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") % dim


def trigram_name_embeddings(names: list[str], dim: int = 256) -> EmbeddingSet:
    """Hash character trigrams of each name into a fixed-dim count vector.

    Self-contained stand-in for pretrained name embeddings: identical names
    map to identical rows, and no model files are needed.
    """
    if dim < 1:
        raise ValueError("dim must be positive")
    matrix = np.zeros((len(names), dim), dtype=np.float64)
    for i, name in enumerate(names):
        padded = f"#{name}#"
        if len(padded) < 3:
            matrix[i, _trigram_bucket(padded, dim)] += 1.0
            continue
        for j in range(len(padded) - 2):
            matrix[i, _trigram_bucket(padded[j : j + 3], dim)] += 1.0
    return EmbeddingSet(matrix)
