"""Binary MLP with ReLU hidden layers, trained with AdamW on cross-entropy.

Pure numpy, single-threaded and bitwise deterministic for a fixed seed:
He-uniform initialization, inverted dropout during training only, full-batch
gradient steps by default, decoupled weight decay on the weight matrices
(biases are not decayed).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch, NonFiniteLoss
from .table import FeatureTable

HIDDEN_LAYERS_RANGE = (1, 12)
HIDDEN_UNITS_RANGE = (8, 512)
DROPOUT_RANGE = (0.0, 0.5)
LEARNING_RATE_RANGE = (1e-4, 1e-2)
EPOCH_LATTICE = tuple(range(100, 401, 25))
N_SVD_RANGE = (1, 3)


@dataclass
class TrainConfig:
    """Training and architecture settings.

    The *_RANGE constants above define the hyperparameter search space;
    values outside them are accepted here so that edge cases (e.g. a zero
    learning rate) remain expressible.
    """

    learning_rate: float = 1e-3
    epochs: int = 200
    weight_decay: float = 0.01
    batch_size: int | None = None  # None = full batch
    seed: int = 0
    n_svd: int = 3
    feature_set: str = "combined"
    hidden_layers: int = 2
    hidden_units: int = 64
    dropout: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class AdamWState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0


@dataclass
class MlpModel:
    layer_sizes: list[int]
    weights: list[np.ndarray]  # weights[i]: (layer_sizes[i], layer_sizes[i+1])
    biases: list[np.ndarray]
    dropout: float
    opt_state: AdamWState | None = field(default=None, repr=False)

    @property
    def d_in(self) -> int:
        return self.layer_sizes[0]

    @classmethod
    def init(
        cls,
        d_in: int,
        hidden_layers: int,
        hidden_units: int,
        dropout: float,
        rng: np.random.Generator,
    ) -> "MlpModel":
        lo, hi = HIDDEN_LAYERS_RANGE
        if not lo <= hidden_layers <= hi:
            raise ValueError(f"hidden_layers must be in [{lo}, {hi}]")
        lo, hi = HIDDEN_UNITS_RANGE
        if not lo <= hidden_units <= hi:
            raise ValueError(f"hidden_units must be in [{lo}, {hi}]")
        lo, hi = DROPOUT_RANGE
        if not lo <= dropout <= hi:
            raise ValueError(f"dropout must be in [{lo}, {hi}]")
        sizes = [d_in] + [hidden_units] * hidden_layers + [1]
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            bound = np.sqrt(6.0 / fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(sizes, weights, biases, dropout)

    def copy(self) -> "MlpModel":
        return MlpModel(
            list(self.layer_sizes),
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.dropout,
        )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def bce_from_logits(logits: np.ndarray, y: np.ndarray) -> float:
    """Mean binary cross-entropy, computed stably from logits."""
    z = logits
    loss = np.maximum(z, 0) - z * y + np.log1p(np.exp(-np.abs(z)))
    return float(loss.mean())


def _forward_pass(model: MlpModel, x: np.ndarray, train_mode: bool, rng):
    """Returns (logits, cache) where cache holds per-layer activations."""
    a = x
    acts = [a]
    drop_masks = []
    n_hidden = len(model.weights) - 1
    for i in range(n_hidden):
        z = a @ model.weights[i] + model.biases[i]
        a = np.maximum(z, 0.0)
        if train_mode and model.dropout > 0:
            keep = 1.0 - model.dropout
            mask = (rng.random(a.shape) < keep) / keep
            a = a * mask
            drop_masks.append(mask)
        else:
            drop_masks.append(None)
        acts.append(a)
    logits = (a @ model.weights[-1] + model.biases[-1])[:, 0]
    return logits, (acts, drop_masks)


def forward(
    model: MlpModel,
    x: np.ndarray,
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
) -> float:
    """Probability for one feature row; dropout only in train_mode."""
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    if x.shape[1] != model.d_in:
        raise DimensionMismatch(f"expected {model.d_in} features, got {x.shape[1]}")
    if train_mode and model.dropout > 0 and rng is None:
        raise ValueError("train_mode dropout requires an rng")
    logits, _ = _forward_pass(model, x, train_mode, rng)
    return float(_sigmoid(logits)[0])


def _backward_pass(model: MlpModel, cache, logits, y):
    """Gradients of mean BCE w.r.t. every weight and bias."""
    acts, drop_masks = cache
    n = y.size
    delta = ((_sigmoid(logits) - y) / n)[:, None]
    grads_w = [None] * len(model.weights)
    grads_b = [None] * len(model.biases)
    grads_w[-1] = acts[-1].T @ delta
    grads_b[-1] = delta.sum(axis=0)
    upstream = delta @ model.weights[-1].T
    for i in range(len(model.weights) - 2, -1, -1):
        if drop_masks[i] is not None:
            upstream = upstream * drop_masks[i]
        upstream = upstream * (acts[i + 1] > 0)
        grads_w[i] = acts[i].T @ upstream
        grads_b[i] = upstream.sum(axis=0)
        if i > 0:
            upstream = upstream @ model.weights[i].T
    return grads_w, grads_b


def compute_gradients(model: MlpModel, x: np.ndarray, y: np.ndarray):
    """Analytic BCE gradients without dropout (used by gradient checks)."""
    logits, cache = _forward_pass(model, x, train_mode=False, rng=None)
    return _backward_pass(model, cache, logits, y)


def _adamw_step(params, grads, state: AdamWState, lr, wd, beta1, beta2, eps, decay_mask):
    state.t += 1
    t = state.t
    for i, (p, g) in enumerate(zip(params, grads)):
        state.m[i] = beta1 * state.m[i] + (1 - beta1) * g
        state.v[i] = beta2 * state.v[i] + (1 - beta2) * g**2
        m_hat = state.m[i] / (1 - beta1**t)
        v_hat = state.v[i] / (1 - beta2**t)
        update = m_hat / (np.sqrt(v_hat) + eps)
        if decay_mask[i]:
            update = update + wd * p
        p -= lr * update


def train(
    model: MlpModel, data: FeatureTable, cfg: TrainConfig
) -> tuple[MlpModel, list[float]]:
    """Run cfg.epochs of AdamW on BCE; returns the model and per-epoch loss.

    Deterministic: the same (seed, config, data) reproduces the model
    bit-for-bit. Raises NonFiniteLoss if the loss leaves the float range.
    """
    if data.x.shape[1] != model.d_in:
        raise DimensionMismatch(f"expected {model.d_in} features, got {data.x.shape[1]}")
    model = model.copy()
    rng = np.random.default_rng(cfg.seed)
    params = model.weights + model.biases
    decay_mask = [True] * len(model.weights) + [False] * len(model.biases)
    state = AdamWState(
        m=[np.zeros_like(p) for p in params],
        v=[np.zeros_like(p) for p in params],
    )
    x_all, y_all = data.x, data.y.astype(np.float64)
    n = x_all.shape[0]
    batch = cfg.batch_size or n
    losses = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(n) if batch < n else np.arange(n)
        epoch_losses = []
        for start in range(0, n, batch):
            rows = order[start : start + batch]
            x, y = x_all[rows], y_all[rows]
            logits, cache = _forward_pass(model, x, train_mode=True, rng=rng)
            loss = bce_from_logits(logits, y)
            if not np.isfinite(loss):
                raise NonFiniteLoss(
                    f"loss became {loss} at epoch {epoch} (lr={cfg.learning_rate})"
                )
            epoch_losses.append(loss)
            grads_w, grads_b = _backward_pass(model, cache, logits, y)
            _adamw_step(
                params,
                grads_w + grads_b,
                state,
                cfg.learning_rate,
                cfg.weight_decay,
                cfg.beta1,
                cfg.beta2,
                cfg.eps,
                decay_mask,
            )
        losses.append(float(np.mean(epoch_losses)))
    model.opt_state = state
    return model, losses


def predict(model: MlpModel, table: FeatureTable) -> tuple[np.ndarray, np.ndarray]:
    """(probabilities, hard labels); label 1 iff p >= 0.5."""
    if table.x.shape[1] != model.d_in:
        raise DimensionMismatch(f"expected {model.d_in} features, got {table.x.shape[1]}")
    logits, _ = _forward_pass(model, table.x, train_mode=False, rng=None)
    probs = np.clip(_sigmoid(logits), 1e-12, 1.0 - 1e-12)
    return probs, (probs >= 0.5).astype(np.int64)
