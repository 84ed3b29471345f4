"""Multi-view fusion model and margin-ranking training.

Per entity, the model concatenates the enabled components:

* name:      frozen name embedding times a trainable projection,
* time:      summed periodic time features times a trainable projection
             (frequencies and phases are trainable too),
* structure: frozen walk embedding times a trainable projection.

Training minimizes a hinge over (anchor, negative) triples with cosine
distance inside the margin, using Adam-style adaptive steps.  All gradients
are computed analytically and are validated against finite differences in the
test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embeddings import EmbeddingSet
from .encoders.time2vec import Time2VecParams, time2vec_table
from .kg import AnchorSet

__all__ = [
    "SideInputs",
    "ModelParams",
    "AlignmentModel",
    "TrainConfig",
    "TrainResult",
    "sample_negatives",
    "train",
    "save_checkpoint",
    "load_checkpoint",
]

_NORM_FLOOR = 1e-12


@dataclass
class SideInputs:
    """Frozen per-entity inputs for one graph side."""

    name: EmbeddingSet | None = None
    time_vectors: np.ndarray | None = None  # (N, n_months) binary
    structure: EmbeddingSet | None = None

    def __post_init__(self):
        if self.time_vectors is not None:
            self.time_vectors = np.asarray(self.time_vectors, dtype=np.float64)


@dataclass
class ModelParams:
    """Trainable parameters; a ``None`` member means that component is disabled."""

    w_name: np.ndarray | None = None  # (d_name_in, d_name_out)
    t2v: Time2VecParams | None = None
    w_time: np.ndarray | None = None  # (k+1, d_time_out)
    w_dw: np.ndarray | None = None  # (d_dw_in, d_dw_out)
    n_months: int = 324

    def __post_init__(self):
        if (self.t2v is None) != (self.w_time is None):
            raise ValueError("time component needs both t2v params and w_time")
        if not (self.use_name or self.use_time or self.use_structure):
            raise ValueError("at least one component must be enabled")

    @property
    def use_name(self) -> bool:
        return self.w_name is not None

    @property
    def use_time(self) -> bool:
        return self.w_time is not None

    @property
    def use_structure(self) -> bool:
        return self.w_dw is not None

    @property
    def out_dim(self) -> int:
        dim = 0
        if self.use_name:
            dim += self.w_name.shape[1]
        if self.use_time:
            dim += self.w_time.shape[1]
        if self.use_structure:
            dim += self.w_dw.shape[1]
        return dim

    def trainable(self) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {}
        if self.use_name:
            out["w_name"] = self.w_name
        if self.use_time:
            out["omega"] = self.t2v.omega
            out["phi"] = self.t2v.phi
            out["w_time"] = self.w_time
        if self.use_structure:
            out["w_dw"] = self.w_dw
        return out

    @classmethod
    def init(
        cls,
        seed: int,
        *,
        name_in: int | None = None,
        name_out: int = 64,
        use_time: bool = True,
        t2v_k: int = 31,
        time_out: int = 64,
        n_months: int = 324,
        dw_in: int | None = None,
        dw_out: int = 64,
    ) -> "ModelParams":
        """Uniform 1/sqrt(fan-in) projections; seeded time frequencies and phases."""
        rng = np.random.default_rng(seed)

        def proj(d_in, d_out):
            return rng.uniform(-1.0, 1.0, size=(d_in, d_out)) / np.sqrt(d_in)

        w_name = proj(name_in, name_out) if name_in is not None else None
        t2v = w_time = None
        if use_time:
            t2v = Time2VecParams.init(t2v_k, n_months, seed=rng.integers(2**31))
            w_time = proj(t2v_k + 1, time_out)
        w_dw = proj(dw_in, dw_out) if dw_in is not None else None
        return cls(w_name=w_name, t2v=t2v, w_time=w_time, w_dw=w_dw, n_months=n_months)


class AlignmentModel:
    """Binds shared parameters to the two sides' frozen inputs."""

    def __init__(self, params: ModelParams, inputs1: SideInputs, inputs2: SideInputs):
        self.params = params
        self.inputs = {1: inputs1, 2: inputs2}
        for side in (1, 2):
            inp = self.inputs[side]
            if params.use_name and inp.name is None:
                raise ValueError(f"side {side}: name component enabled but no name input")
            if params.use_time and inp.time_vectors is None:
                raise ValueError(f"side {side}: time component enabled but no time vectors")
            if params.use_structure and inp.structure is None:
                raise ValueError(f"side {side}: structure component enabled but no input")

    def _forward_cached(self, side: int, ids: np.ndarray, table: np.ndarray):
        p = self.params
        inp = self.inputs[side]
        parts = []
        cache: dict[str, np.ndarray] = {}
        if p.use_name:
            cache["x_name"] = inp.name.matrix[ids]
            parts.append(cache["x_name"] @ p.w_name)
        if p.use_time:
            cache["tv"] = inp.time_vectors[ids]
            cache["feats"] = cache["tv"] @ table  # (B, k+1)
            parts.append(cache["feats"] @ p.w_time)
        if p.use_structure:
            cache["x_dw"] = inp.structure.matrix[ids]
            parts.append(cache["x_dw"] @ p.w_dw)
        return np.concatenate(parts, axis=1), cache

    def forward(self, side: int, ids: np.ndarray) -> np.ndarray:
        """Fused embeddings (len(ids), out_dim) for one side."""
        ids = np.asarray(ids, dtype=np.int64)
        table = (
            time2vec_table(self.params.t2v, self.params.n_months)
            if self.params.use_time
            else None
        )
        emb, _ = self._forward_cached(side, ids, table)
        return emb

    def _zero_grads(self) -> dict[str, np.ndarray]:
        return {name: np.zeros_like(arr) for name, arr in self.params.trainable().items()}

    def _backward_rows(
        self,
        cache: dict[str, np.ndarray],
        grad_rows: np.ndarray,
        grads: dict[str, np.ndarray],
        grad_table: np.ndarray | None,
    ):
        p = self.params
        offset = 0
        if p.use_name:
            d = p.w_name.shape[1]
            grads["w_name"] += cache["x_name"].T @ grad_rows[:, offset : offset + d]
            offset += d
        if p.use_time:
            d = p.w_time.shape[1]
            g = grad_rows[:, offset : offset + d]
            grads["w_time"] += cache["feats"].T @ g
            grad_table += cache["tv"].T @ (g @ p.w_time.T)
            offset += d
        if p.use_structure:
            grads["w_dw"] += cache["x_dw"].T @ grad_rows[:, offset:]

    def loss_and_grads(
        self,
        positives: np.ndarray,
        negatives: np.ndarray,
        margin: float,
    ) -> tuple[float, dict[str, np.ndarray]]:
        """Hinge loss over all (anchor, negative) triples plus analytic gradients.

        ``positives`` is (B, 2) of (KG1 id, KG2 id); ``negatives`` is (B, K) of
        KG2 ids.  Loss is the mean over the B*K triples of
        max(0, margin + cos_dist(src, pos) - cos_dist(src, neg)).
        """
        p = self.params
        positives = np.asarray(positives, dtype=np.int64)
        negatives = np.asarray(negatives, dtype=np.int64)
        b, k = negatives.shape
        table = time2vec_table(p.t2v, p.n_months) if p.use_time else None

        u, cache_u = self._forward_cached(1, positives[:, 0], table)
        v, cache_v = self._forward_cached(2, positives[:, 1], table)
        w, cache_w = self._forward_cached(2, negatives.reshape(-1), table)
        dim = u.shape[1]
        w = w.reshape(b, k, dim)

        nu = np.maximum(np.linalg.norm(u, axis=1), _NORM_FLOOR)
        nv = np.maximum(np.linalg.norm(v, axis=1), _NORM_FLOOR)
        nw = np.maximum(np.linalg.norm(w, axis=2), _NORM_FLOOR)

        cos_pos = np.einsum("bd,bd->b", u, v) / (nu * nv)
        cos_neg = np.einsum("bd,bkd->bk", u, w) / (nu[:, None] * nw)

        hinge = margin - cos_pos[:, None] + cos_neg
        active = hinge > 0
        n_triples = b * k
        loss = float(np.where(active, hinge, 0.0).sum() / n_triples)

        # d loss / d cosine
        dc_pos = -active.sum(axis=1) / n_triples  # (B,)
        dc_neg = active / n_triples  # (B, K)

        # Cosine gradients: d cos(u, v)/du = v/(|u||v|) - cos * u/|u|^2.
        gu = dc_pos[:, None] * (v / (nu * nv)[:, None] - cos_pos[:, None] * u / (nu**2)[:, None])
        gv = dc_pos[:, None] * (u / (nu * nv)[:, None] - cos_pos[:, None] * v / (nv**2)[:, None])
        coef = dc_neg / (nu[:, None] * nw)
        gu += np.einsum("bk,bkd->bd", coef, w) - (
            (dc_neg * cos_neg).sum(axis=1) / nu**2
        )[:, None] * u
        gw = coef[:, :, None] * u[:, None, :] - (
            (dc_neg * cos_neg) / nw**2
        )[:, :, None] * w

        grads = self._zero_grads()
        grad_table = np.zeros_like(table) if p.use_time else None
        self._backward_rows(cache_u, gu, grads, grad_table)
        self._backward_rows(cache_v, gv, grads, grad_table)
        self._backward_rows(cache_w, gw.reshape(b * k, dim), grads, grad_table)

        if p.use_time:
            # Table rows: [m*omega0 + phi0, cos(m*omega_i + phi_i)...].
            months = np.arange(p.n_months, dtype=np.float64)
            s = np.sin(np.outer(months, p.t2v.omega) + p.t2v.phi)
            g_omega = -(grad_table * s * months[:, None]).sum(axis=0)
            g_phi = -(grad_table * s).sum(axis=0)
            g_omega[0] = (grad_table[:, 0] * months).sum()
            g_phi[0] = grad_table[:, 0].sum()
            grads["omega"] = g_omega
            grads["phi"] = g_phi
        return loss, grads


def sample_negatives(
    anchors: AnchorSet | np.ndarray,
    count: int,
    n_target: int,
    seed,
) -> np.ndarray:
    """Per positive, ``count`` distinct target entities excluding the true counterpart."""
    pairs = np.asarray(anchors.pairs if isinstance(anchors, AnchorSet) else anchors, np.int64)
    if n_target - 1 < count:
        raise ValueError(f"cannot draw {count} negatives from {n_target - 1} candidates")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    out = np.empty((pairs.shape[0], count), dtype=np.int64)
    for row, (_, true_tgt) in enumerate(pairs):
        draw = rng.choice(n_target - 1, size=count, replace=False)
        out[row] = draw + (draw >= true_tgt)
    return out


@dataclass(frozen=True)
class TrainConfig:
    margin: float = 1.0
    negatives: int = 20
    epochs: int = 200
    learning_rate: float = 0.005
    batch_size: int = 512
    seed: int = 0

    def __post_init__(self):
        if self.margin <= 0 or self.learning_rate < 0:
            raise ValueError("margin must be positive and learning_rate non-negative")
        if min(self.negatives, self.batch_size) < 1 or self.epochs < 0:
            raise ValueError("negatives and batch_size must be positive; epochs >= 0")


class _Adam:
    """Per-parameter adaptive steps: decay 0.9/0.999, epsilon 1e-8."""

    BETA1, BETA2, EPS = 0.9, 0.999, 1e-8

    def __init__(self, params: dict[str, np.ndarray]):
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray], lr: float):
        self.t += 1
        for key, p in params.items():
            g = grads[key]
            self.m[key] = self.BETA1 * self.m[key] + (1 - self.BETA1) * g
            self.v[key] = self.BETA2 * self.v[key] + (1 - self.BETA2) * g**2
            m_hat = self.m[key] / (1 - self.BETA1**self.t)
            v_hat = self.v[key] / (1 - self.BETA2**self.t)
            p -= lr * m_hat / (np.sqrt(v_hat) + self.EPS)


@dataclass
class TrainResult:
    params: ModelParams
    epoch_losses: list[float] = field(default_factory=list)


def train(
    model: AlignmentModel,
    train_anchors: AnchorSet,
    n_target: int,
    config: TrainConfig,
) -> TrainResult:
    """Minibatch margin-ranking training over shuffled anchor batches.

    Negatives are resampled uniformly every epoch.  Deterministic under the
    config seed.  Raises on non-finite loss, naming the epoch.
    """
    pairs = np.asarray(train_anchors.pairs, dtype=np.int64)
    optimizer = _Adam(model.params.trainable())
    losses: list[float] = []
    for epoch in range(config.epochs):
        rng = np.random.default_rng([config.seed, epoch])
        order = rng.permutation(pairs.shape[0])
        negatives = sample_negatives(pairs, config.negatives, n_target, rng)
        epoch_loss = 0.0
        n_triples = 0
        for start in range(0, order.size, config.batch_size):
            idx = order[start : start + config.batch_size]
            loss, grads = model.loss_and_grads(
                pairs[idx], negatives[idx], config.margin
            )
            if not np.isfinite(loss):
                raise FloatingPointError(f"training diverged at epoch {epoch}")
            optimizer.step(model.params.trainable(), grads, config.learning_rate)
            epoch_loss += loss * idx.size * config.negatives
            n_triples += idx.size * config.negatives
        losses.append(epoch_loss / n_triples)
        emb = model.forward(1, pairs[:, 0])
        if not np.all(np.isfinite(np.linalg.norm(emb, axis=1))):
            raise FloatingPointError(f"non-finite embeddings after epoch {epoch}")
    return TrainResult(params=model.params, epoch_losses=losses)


def save_checkpoint(params: ModelParams, path: str) -> None:
    """Text checkpoint: metadata header, then one named-row block per parameter."""
    blocks: list[tuple[str, np.ndarray]] = []
    if params.use_name:
        blocks.append(("w_name", params.w_name))
    if params.use_time:
        blocks.append(("omega", params.t2v.omega.reshape(1, -1)))
        blocks.append(("phi", params.t2v.phi.reshape(1, -1)))
        blocks.append(("w_time", params.w_time))
    if params.use_structure:
        blocks.append(("w_dw", params.w_dw))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("# alignment model checkpoint v1\n")
        fh.write(f"# n_months = {params.n_months}\n")
        fh.write(f"# params = {','.join(name for name, _ in blocks)}\n")
        for name, matrix in blocks:
            fh.write(f"{name} {matrix.shape[0]} {matrix.shape[1]}\n")
            for i, row in enumerate(matrix):
                fh.write(f"{name}.{i} " + " ".join(repr(float(v)) for v in row) + "\n")


def load_checkpoint(path: str) -> ModelParams:
    matrices: dict[str, np.ndarray] = {}
    n_months = 324
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    pos = 0
    while pos < len(lines):
        line = lines[pos]
        pos += 1
        if not line:
            continue
        if line.startswith("#"):
            if "n_months" in line:
                n_months = int(line.split("=", 1)[1])
            continue
        name, rows, cols = line.split()
        rows, cols = int(rows), int(cols)
        matrix = np.empty((rows, cols), dtype=np.float64)
        for i in range(rows):
            parts = lines[pos].rsplit(" ", cols)
            matrix[i] = [float(tok) for tok in parts[1:]]
            pos += 1
        matrices[name] = matrix
    t2v = None
    if "omega" in matrices:
        t2v = Time2VecParams(matrices["omega"].ravel(), matrices["phi"].ravel())
    return ModelParams(
        w_name=matrices.get("w_name"),
        t2v=t2v,
        w_time=matrices.get("w_time"),
        w_dw=matrices.get("w_dw"),
        n_months=n_months,
    )
