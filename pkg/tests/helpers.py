"""Shared oracles: finite-difference gradient checks and small random models."""

from __future__ import annotations

import numpy as np

from hhea.embeddings import EmbeddingSet
from hhea.encoders.time2vec import Time2VecParams
from hhea.training import AlignmentModel, ModelParams, SideInputs

FD_STEP = 1e-5


def oracle_csls(values, k):
    """Independent reference: sort each row/column, average the top k."""
    n_src, n_tgt = values.shape
    out = np.empty_like(values)
    for i in range(n_src):
        r_row = np.sort(values[i])[::-1][:k].mean()
        for j in range(n_tgt):
            r_col = np.sort(values[:, j])[::-1][:k].mean()
            out[i, j] = 2 * values[i, j] - r_row - r_col
    return out


def oracle_rank(scores, true_col):
    """1-based rank with ties broken by candidate index."""
    rank = 1
    for col, score in enumerate(scores):
        if score > scores[true_col] or (score == scores[true_col] and col < true_col):
            rank += 1
    return rank


def random_instance(seed, use_name=True, use_time=True, use_structure=True, margin=None):
    """Small random model + batch whose hinge terms sit safely away from the kink.

    Entities <= 10, dims <= 8, so finite differences stay cheap and stable.
    """
    for attempt in range(40):
        rng = np.random.default_rng([seed, attempt])
        n1, n2 = int(rng.integers(4, 11)), int(rng.integers(4, 11))
        n_months = 12
        inputs = []
        for n in (n1, n2):
            time_vectors = None
            if use_time:
                time_vectors = (rng.random((n, n_months)) < 0.4).astype(float)
                # Zero rows give zero embeddings, where the cosine gradient is
                # undefined; keep every entity observable.
                for row in time_vectors:
                    if not row.any():
                        row[int(rng.integers(n_months))] = 1.0
            inputs.append(
                SideInputs(
                    name=EmbeddingSet(rng.standard_normal((n, 5))) if use_name else None,
                    time_vectors=time_vectors,
                    structure=EmbeddingSet(rng.standard_normal((n, 6))) if use_structure else None,
                )
            )
        params = ModelParams(
            w_name=rng.standard_normal((5, 4)) if use_name else None,
            t2v=Time2VecParams(rng.uniform(0.05, 1.0, 4), rng.uniform(0, 2 * np.pi, 4))
            if use_time
            else None,
            w_time=rng.standard_normal((4, 3)) if use_time else None,
            w_dw=rng.standard_normal((6, 4)) if use_structure else None,
            n_months=n_months,
        )
        model = AlignmentModel(params, inputs[0], inputs[1])
        b, k = 4, 3
        positives = np.stack(
            [rng.integers(n1, size=b), rng.integers(n2, size=b)], axis=1
        ).astype(np.int64)
        negatives = rng.integers(n2, size=(b, k)).astype(np.int64)
        m = margin if margin is not None else float(rng.uniform(0.3, 1.0))

        if _hinges_away_from_kink(model, positives, negatives, m):
            return model, positives, negatives, m
    raise AssertionError("could not build a kink-free instance")


def _hinges_away_from_kink(model, positives, negatives, margin, guard=1e-3):
    u = model.forward(1, positives[:, 0])
    v = model.forward(2, positives[:, 1])
    w = model.forward(2, negatives.reshape(-1)).reshape(negatives.shape[0], negatives.shape[1], -1)
    nu = np.maximum(np.linalg.norm(u, axis=1), 1e-12)
    nv = np.maximum(np.linalg.norm(v, axis=1), 1e-12)
    nw = np.maximum(np.linalg.norm(w, axis=2), 1e-12)
    cos_pos = np.einsum("bd,bd->b", u, v) / (nu * nv)
    cos_neg = np.einsum("bd,bkd->bk", u, w) / (nu[:, None] * nw)
    hinge = margin - cos_pos[:, None] + cos_neg
    return bool(np.all(np.abs(hinge) > guard))


def finite_difference_errors(model, positives, negatives, margin, step=FD_STEP):
    """Max relative error per parameter tensor: analytic vs central differences."""
    _, grads = model.loss_and_grads(positives, negatives, margin)
    errors = {}
    for name, param in model.params.trainable().items():
        fd = np.zeros_like(param)
        flat = param.reshape(-1)
        fd_flat = fd.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + step
            up = model.loss_and_grads(positives, negatives, margin)[0]
            flat[i] = original - step
            down = model.loss_and_grads(positives, negatives, margin)[0]
            flat[i] = original
            fd_flat[i] = (up - down) / (2 * step)
        denom = max(np.linalg.norm(grads[name]), np.linalg.norm(fd), 1e-12)
        errors[name] = float(np.linalg.norm(grads[name] - fd) / denom)
    return errors
