"""Learnable time features: one linear component plus k cosine components.

Component 0 of the feature vector is ``omega[0] * t + phi[0]``; components
1..k are ``cos(omega[i] * t + phi[i])``, capturing periodicity at learnable
frequencies.  An entity's time embedding sums the features of all months it
occurs in, then applies a learnable linear projection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Time2VecParams", "time2vec", "time2vec_table", "entity_time_embedding"]


@dataclass
class Time2VecParams:
    omega: np.ndarray  # (k+1,) frequencies
    phi: np.ndarray  # (k+1,) phases

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=np.float64)
        self.phi = np.asarray(self.phi, dtype=np.float64)
        if self.omega.shape != self.phi.shape or self.omega.ndim != 1:
            raise ValueError("omega and phi must be 1-D vectors of equal length")
        if self.omega.size < 2:
            raise ValueError("need at least one periodic component (k >= 1)")
        if not (np.all(np.isfinite(self.omega)) and np.all(np.isfinite(self.phi))):
            raise ValueError("non-finite time parameters")

    @property
    def k(self) -> int:
        return self.omega.size - 1

    @classmethod
    def init(cls, k: int, n_months: int, seed: int) -> "Time2VecParams":
        """Frequencies log-uniform over [1/n_months, 1], phases uniform over [0, 2 pi)."""
        rng = np.random.default_rng(seed)
        log_lo, log_hi = np.log(1.0 / n_months), 0.0
        omega = np.exp(rng.uniform(log_lo, log_hi, size=k + 1))
        phi = rng.uniform(0.0, 2.0 * np.pi, size=k + 1)
        return cls(omega, phi)


def time2vec(t: float, params: Time2VecParams) -> np.ndarray:
    """Feature vector of one time point: linear component 0, cosine components 1..k."""
    raw = params.omega * t + params.phi
    out = np.cos(raw)
    out[0] = raw[0]
    return out


def time2vec_table(params: Time2VecParams, n_months: int) -> np.ndarray:
    """(n_months, k+1) table of features for every calendar month."""
    months = np.arange(n_months, dtype=np.float64)
    raw = np.outer(months, params.omega) + params.phi
    table = np.cos(raw)
    table[:, 0] = raw[:, 0]
    return table


def entity_time_embedding(
    time_vector: np.ndarray, params: Time2VecParams, projection: np.ndarray
) -> np.ndarray:
    """Sum the features of the active months and project; all-zero input gives zeros."""
    time_vector = np.asarray(time_vector, dtype=np.float64)
    table = time2vec_table(params, time_vector.shape[0])
    if projection.shape[0] != params.omega.size:
        raise ValueError("projection rows must match k+1")
    return (time_vector @ table) @ projection
