"""Contrastive debiasing encoder.

A small feed-forward encoder (input -> 512 -> 256, ReLU) with a two-layer
projection head (256 -> 256 -> 128, ReLU between) is trained with the
normalized temperature-scaled cross-entropy loss over in-batch negatives:
each record is pulled toward its counterfactual positive and pushed away
from the other 2N-2 views in the batch. Optimization uses layer-wise
adaptive rate scaling with momentum. Downstream consumers read the 256-dim
pre-projection representation; the projection exists only inside the loss.

Everything is plain numpy with hand-derived gradients; a finite-difference
harness in the test suite checks them against central differences.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .counterfactual import cutout_rows, pair_matrices
from .dataset import FeatureTable
from .errors import (
    BatchTooSmall,
    DimensionMismatch,
    InvalidConfig,
    IoFailure,
    NonFiniteActivation,
    NonFiniteGradient,
    NonFiniteLoss,
)
from .numerics import RandomStream
from .preprocess import SensitiveProfile

__all__ = [
    "EncoderParams",
    "TrainConfig",
    "TrainReport",
    "init_params",
    "encoder_forward",
    "nt_xent_loss",
    "loss_gradients",
    "lars_step",
    "train",
    "embed",
    "embed_matrix",
    "save_checkpoint",
    "load_checkpoint",
]

NORM_EPS = 1e-8

_PARAM_NAMES = ("w1", "b1", "w2", "b2", "w3", "b3", "w4", "b4")


@dataclass
class EncoderParams:
    """Weights and biases; w_k maps (out, in), biases are (out,)."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray
    w4: np.ndarray
    b4: np.ndarray

    @property
    def dim(self) -> int:
        return self.w1.shape[1]

    @property
    def repr_dim(self) -> int:
        return self.w2.shape[0]

    def tensors(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in _PARAM_NAMES}

    def copy(self) -> "EncoderParams":
        return EncoderParams(**{k: v.copy() for k, v in self.tensors().items()})

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in self.tensors().values())


@dataclass
class TrainConfig:
    temperature: float = 0.5
    batch_size: int = 1024
    epochs: int = 100
    base_lr: float | None = None  # default 0.3 * effective_batch / 256
    lars_trust: float = 0.001
    weight_decay: float = 1e-6
    momentum: float = 0.9
    cutout_enabled: bool = False
    cutout_fraction: float = 0.2
    hidden_dim: int = 512
    repr_dim: int = 256
    proj_dim: int = 128
    seed: int = 0

    def validate(self) -> None:
        if self.temperature <= 0:
            raise InvalidConfig("temperature must be positive")
        if self.batch_size < 2:
            raise InvalidConfig("batch_size must be at least 2 pairs")
        if self.epochs < 1:
            raise InvalidConfig("epochs must be at least 1")
        if self.base_lr is not None and self.base_lr < 0:
            raise InvalidConfig("base_lr must be non-negative")
        if self.lars_trust <= 0 or self.weight_decay < 0:
            raise InvalidConfig("bad LARS hyperparameters")
        if not 0.0 <= self.momentum < 1.0:
            raise InvalidConfig("momentum must be in [0, 1)")
        if not 0.0 <= self.cutout_fraction <= 1.0:
            raise InvalidConfig("cutout_fraction must be in [0, 1]")
        if min(self.hidden_dim, self.repr_dim, self.proj_dim) < 1:
            raise InvalidConfig("layer widths must be positive")

    def to_dict(self) -> dict:
        return {
            "temperature": self.temperature,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "base_lr": self.base_lr,
            "lars_trust": self.lars_trust,
            "weight_decay": self.weight_decay,
            "momentum": self.momentum,
            "cutout_enabled": self.cutout_enabled,
            "cutout_fraction": self.cutout_fraction,
            "hidden_dim": self.hidden_dim,
            "repr_dim": self.repr_dim,
            "proj_dim": self.proj_dim,
            "seed": self.seed,
        }


@dataclass
class TrainReport:
    epoch_losses: list[float]
    final_loss: float
    wall_time_s: float
    config: dict
    n_pairs: int

    def to_dict(self) -> dict:
        return {
            "epoch_losses": self.epoch_losses,
            "final_loss": self.final_loss,
            "wall_time_s": self.wall_time_s,
            "config": self.config,
            "n_pairs": self.n_pairs,
        }


def init_params(dim: int, config: TrainConfig, stream: RandomStream) -> EncoderParams:
    """Glorot-uniform weights drawn layer by layer from the stream; zero biases."""
    shapes = [
        (config.hidden_dim, dim),
        (config.repr_dim, config.hidden_dim),
        (config.repr_dim, config.repr_dim),
        (config.proj_dim, config.repr_dim),
    ]
    tensors = {}
    for k, (out, into) in enumerate(shapes, start=1):
        bound = np.sqrt(6.0 / (into + out))
        tensors[f"w{k}"] = (stream.uniform(out * into).reshape(out, into) * 2.0 - 1.0) * bound
        tensors[f"b{k}"] = np.zeros(out)
    return EncoderParams(**tensors)


def _forward(params: EncoderParams, X: np.ndarray) -> dict[str, np.ndarray]:
    a1 = X @ params.w1.T + params.b1
    r1 = np.maximum(a1, 0.0)
    a2 = r1 @ params.w2.T + params.b2
    h = np.maximum(a2, 0.0)
    a3 = h @ params.w3.T + params.b3
    r3 = np.maximum(a3, 0.0)
    z = r3 @ params.w4.T + params.b4
    return {"x": X, "a1": a1, "r1": r1, "a2": a2, "h": h, "a3": a3, "r3": r3, "z": z}


def encoder_forward(params: EncoderParams, x) -> tuple[np.ndarray, np.ndarray]:
    """(representation h, projection z) for one input vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size != params.dim:
        raise DimensionMismatch(f"expected vector of dim {params.dim}, got shape {x.shape}")
    cache = _forward(params, x[None, :])
    h, z = cache["h"][0], cache["z"][0]
    if not (np.all(np.isfinite(h)) and np.all(np.isfinite(z))):
        raise NonFiniteActivation("encoder produced non-finite activations")
    return h, z


def _normalize_rows(Z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    norms = np.sqrt(np.einsum("ij,ij->i", Z, Z))
    m = np.maximum(norms, NORM_EPS)
    return Z / m[:, None], m, norms


def _nt_xent(Z: np.ndarray, pair_idx: np.ndarray, tau: float, want_grad: bool):
    """Loss (and optionally dLoss/dZ) of the in-batch contrastive objective.

    Similarity is cosine with norms clamped to NORM_EPS; each of the 2N rows
    is an anchor once and the loss is the mean of the per-anchor terms.
    """
    two_n = Z.shape[0]
    if two_n < 4 or two_n % 2 != 0:
        raise BatchTooSmall(f"need at least 2 pairs (4 views), got {two_n} views")
    Zh, m, _ = _normalize_rows(Z)
    S = (Zh @ Zh.T) / tau
    np.fill_diagonal(S, -np.inf)
    row_max = S.max(axis=1)
    E = np.exp(S - row_max[:, None])
    sum_e = E.sum(axis=1)
    lse = row_max + np.log(sum_e)
    pos = S[np.arange(two_n), pair_idx]
    loss = float(np.mean(lse - pos))
    if not np.isfinite(loss):
        raise NonFiniteLoss("contrastive loss is not finite")
    if not want_grad:
        return loss, None

    G = E / sum_e[:, None]
    G[np.arange(two_n), pair_idx] -= 1.0
    G /= two_n
    dZh = ((G + G.T) @ Zh) / tau
    rowdot = np.einsum("ij,ij->i", dZh, Zh)
    dZ = (dZh - rowdot[:, None] * Zh) / m[:, None]
    guarded = m <= NORM_EPS
    if np.any(guarded):
        dZ[guarded] = dZh[guarded] / NORM_EPS
    return loss, dZ


def nt_xent_loss(projections, tau: float, pair_index=None) -> float:
    """Public loss over 2N projection vectors.

    Pairing defaults to adjacent rows, (0,1), (2,3), ...; pass `pair_index`
    (an involution without fixed points) for any other layout.
    """
    Z = np.asarray(projections, dtype=np.float64)
    if Z.ndim != 2:
        raise DimensionMismatch("projections must form a 2-D array")
    two_n = Z.shape[0]
    if pair_index is None:
        pair_index = np.arange(two_n) ^ 1
    else:
        pair_index = np.asarray(pair_index, dtype=np.int64)
        if pair_index.shape != (two_n,) or np.any(pair_index[pair_index] != np.arange(two_n)):
            raise DimensionMismatch("pair_index must be an involution over the views")
        if np.any(pair_index == np.arange(two_n)):
            raise DimensionMismatch("a view cannot be its own positive")
    loss, _ = _nt_xent(Z, pair_index, tau, want_grad=False)
    return loss


def loss_gradients(
    params: EncoderParams,
    anchor_batch: np.ndarray,
    positive_batch: np.ndarray,
    config: TrainConfig,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean contrastive loss of a pair batch and its exact parameter gradients.

    Anchors and positives are stacked (pair(i) = i + N mod 2N) and pushed
    through the shared encoder; gradients flow through both views.
    """
    A = np.asarray(anchor_batch, dtype=np.float64)
    P = np.asarray(positive_batch, dtype=np.float64)
    if A.shape != P.shape or A.ndim != 2:
        raise DimensionMismatch("anchor and positive batches must share a 2-D shape")
    n = A.shape[0]
    X = np.vstack([A, P])
    cache = _forward(params, X)
    pair_idx = (np.arange(2 * n) + n) % (2 * n)
    loss, dz = _nt_xent(cache["z"], pair_idx, config.temperature, want_grad=True)

    grads: dict[str, np.ndarray] = {}
    grads["w4"] = dz.T @ cache["r3"]
    grads["b4"] = dz.sum(axis=0)
    da3 = (dz @ params.w4) * (cache["a3"] > 0)
    grads["w3"] = da3.T @ cache["h"]
    grads["b3"] = da3.sum(axis=0)
    da2 = (da3 @ params.w3) * (cache["a2"] > 0)
    grads["w2"] = da2.T @ cache["r1"]
    grads["b2"] = da2.sum(axis=0)
    da1 = (da2 @ params.w2) * (cache["a1"] > 0)
    grads["w1"] = da1.T @ cache["x"]
    grads["b1"] = da1.sum(axis=0)

    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient(f"non-finite gradient in {name}")
    return loss, grads


def lars_step(
    params: EncoderParams,
    grads: dict[str, np.ndarray],
    base_lr: float,
    trust: float,
    weight_decay: float,
    momentum: float = 0.9,
    state: dict[str, np.ndarray] | None = None,
) -> tuple[EncoderParams, dict[str, np.ndarray]]:
    """One layer-wise adaptive update.

    Per weight tensor: g <- grad + weight_decay * w, then the local rate is
    trust * ||w|| / ||g|| when both norms are positive (1 otherwise), and a
    momentum accumulator v <- momentum * v + local_lr * g drives the update
    w <- w - base_lr * v. Biases skip weight decay and trust scaling
    (local rate fixed at 1).
    """
    state = {} if state is None else state
    new_tensors = {}
    for name, w in params.tensors().items():
        g = grads[name]
        is_bias = w.ndim == 1
        if not is_bias and weight_decay:
            g = g + weight_decay * w
        if is_bias:
            local_lr = 1.0
        else:
            wn = float(np.linalg.norm(w))
            gn = float(np.linalg.norm(g))
            local_lr = trust * wn / gn if wn > 0.0 and gn > 0.0 else 1.0
        v = state.get(name)
        v = local_lr * g if v is None else momentum * v + local_lr * g
        state[name] = v
        new_tensors[name] = w - base_lr * v
    return EncoderParams(**new_tensors), state


def _batch_slices(n: int, batch: int) -> list[slice]:
    slices = [slice(s, min(s + batch, n)) for s in range(0, n, batch)]
    # A trailing single-pair batch cannot anchor the loss; fold it backward.
    if len(slices) > 1 and slices[-1].stop - slices[-1].start < 2:
        last = slices.pop()
        prev = slices.pop()
        slices.append(slice(prev.start, last.stop))
    return slices


def train(
    table: FeatureTable, profile: SensitiveProfile, config: TrainConfig
) -> tuple[EncoderParams, TrainReport]:
    """Fit the debiasing encoder on a (balanced) training table.

    Pairs are built once via the counterfactual mean swap; every epoch
    shuffles them, batches them (batch size clamped to the pair count),
    applies fresh cutout masks to both views when enabled, and takes one
    adaptive step per batch. A single stream seeded from the config drives
    initialization, shuffles, and masks, so a seed fixes the result bitwise.
    """
    config.validate()
    anchors, positives, _ = pair_matrices(table, profile)
    n = anchors.shape[0]
    if n < 2:
        raise BatchTooSmall("training needs at least 2 pairs")

    stream = RandomStream(config.seed)
    params = init_params(table.dim, config, stream)
    batch = min(config.batch_size, n)
    base_lr = config.base_lr if config.base_lr is not None else 0.3 * batch / 256.0
    state: dict[str, np.ndarray] = {}
    epoch_losses: list[float] = []
    t0 = time.perf_counter()

    for epoch in range(config.epochs):
        perm = stream.permutation(n)
        total, weight = 0.0, 0
        for b, sl in enumerate(_batch_slices(n, batch)):
            idx = perm[sl]
            A = anchors[idx]
            P = positives[idx]
            if config.cutout_enabled:
                A = cutout_rows(A, profile, config.cutout_fraction, stream)
                P = cutout_rows(P, profile, config.cutout_fraction, stream)
            try:
                loss, grads = loss_gradients(params, A, P, config)
            except (NonFiniteLoss, NonFiniteGradient) as exc:
                raise type(exc)(f"epoch {epoch}, batch {b}: {exc}") from exc
            params, state = lars_step(
                params,
                grads,
                base_lr,
                config.lars_trust,
                config.weight_decay,
                config.momentum,
                state,
            )
            total += loss * len(idx)
            weight += len(idx)
        epoch_losses.append(total / weight)

    report = TrainReport(
        epoch_losses=epoch_losses,
        final_loss=epoch_losses[-1],
        wall_time_s=time.perf_counter() - t0,
        config=config.to_dict(),
        n_pairs=n,
    )
    return params, report


def embed_matrix(params: EncoderParams, X: np.ndarray) -> np.ndarray:
    """Pre-projection representations (n, repr_dim) for a feature matrix."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != params.dim:
        raise DimensionMismatch(f"expected (n, {params.dim}) features, got {X.shape}")
    return _forward(params, X)["h"]


def embed(params: EncoderParams, table: FeatureTable) -> np.ndarray:
    """Representation per record, order preserved."""
    return embed_matrix(params, table.features)


def save_checkpoint(params: EncoderParams, config: TrainConfig, path: str) -> None:
    """Write an .npz checkpoint: every tensor at full precision plus a JSON
    config echo under the key `config_json`."""
    try:
        with open(path, "wb") as fh:
            np.savez(
                fh,
                config_json=np.array(json.dumps(config.to_dict(), sort_keys=True)),
                **params.tensors(),
            )
    except OSError as exc:
        raise IoFailure(f"cannot write checkpoint {path}: {exc}") from exc


def load_checkpoint(path: str) -> tuple[EncoderParams, TrainConfig]:
    try:
        with np.load(path) as data:
            tensors = {name: data[name] for name in _PARAM_NAMES}
            raw = json.loads(str(data["config_json"]))
    except OSError as exc:
        raise IoFailure(f"cannot read checkpoint {path}: {exc}") from exc
    return EncoderParams(**tensors), TrainConfig(**raw)
