"""Two-layer GCN with hand-written backward pass and Adam.

    logits = A_hat @ drop(relu(A_hat @ drop(X) @ W0)) @ W1
    probs  = softmax(logits)

Dropout is inverted (kept units scaled by ``1/(1-p)``) and applies to the
input features and to the hidden layer. There are no biases. Weight decay
``wd * 0.5 * ||W0||_F^2`` acts on the first layer only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .graph import SparseMatrix, spmm
from .rng import generator


@dataclass
class ModelParams:
    w0: np.ndarray
    w1: np.ndarray

    def copy(self) -> "ModelParams":
        return ModelParams(self.w0.copy(), self.w1.copy())

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return self.w0, self.w1


@dataclass
class Activations:
    """Everything the backward pass needs from one forward pass."""

    x_drop: np.ndarray  # dropped, rescaled input features
    hidden_pre: np.ndarray  # A_hat @ x_drop @ W0, before ReLU
    h1: np.ndarray  # relu(hidden_pre)
    hidden_scale: np.ndarray | None  # dropout multiplier on h1 (0 or 1/(1-p)); None in eval
    logits: np.ndarray
    probs: np.ndarray


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0

    @classmethod
    def zeros_like(cls, p: ModelParams) -> "AdamState":
        return cls([np.zeros_like(a) for a in p.arrays()], [np.zeros_like(a) for a in p.arrays()])


def init_params(num_features: int, hidden_dim: int, num_classes: int, seed: int = 0) -> ModelParams:
    """Glorot-uniform weights."""
    if min(num_features, hidden_dim, num_classes) < 1:
        raise ValueError(
            f"all layer sizes must be >= 1, got ({num_features}, {hidden_dim}, {num_classes})"
        )
    rng = generator(seed, "init")

    def glorot(fan_in: int, fan_out: int) -> np.ndarray:
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=(fan_in, fan_out))

    return ModelParams(glorot(num_features, hidden_dim), glorot(hidden_dim, num_classes))


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _dropout_scale(shape, p: float, rng: np.random.Generator) -> np.ndarray:
    return (rng.random(shape) >= p) / (1.0 - p)


def forward(
    a_hat: SparseMatrix,
    x: np.ndarray,
    p: ModelParams,
    dropout_p: float = 0.5,
    mode: str = "eval",
    seed: int | np.random.Generator | None = None,
) -> Activations:
    """Forward pass. ``seed`` (an int or a live generator) drives dropout in
    train mode and is ignored in eval mode."""
    if not 0.0 <= dropout_p < 1.0:
        raise ValueError(f"dropout_p must be in [0, 1), got {dropout_p}")
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    n = a_hat.num_rows
    if x.shape != (n, p.w0.shape[0]):
        raise ValueError(f"features have shape {x.shape}, expected ({n}, {p.w0.shape[0]})")
    if p.w1.shape[0] != p.w0.shape[1]:
        raise ValueError(f"W0 is {p.w0.shape} but W1 is {p.w1.shape}")

    train = mode == "train" and dropout_p > 0.0
    if train:
        rng = seed if isinstance(seed, np.random.Generator) else generator(seed or 0, "dropout")
        x_drop = x * _dropout_scale(x.shape, dropout_p, rng)
    else:
        x_drop = x
    hidden_pre = spmm(a_hat, x_drop @ p.w0)
    h1 = np.maximum(hidden_pre, 0.0)
    if train:
        hidden_scale = _dropout_scale(h1.shape, dropout_p, rng)
        h1_used = h1 * hidden_scale
    else:
        hidden_scale = None
        h1_used = h1
    logits = spmm(a_hat, h1_used @ p.w1)
    return Activations(x_drop, hidden_pre, h1, hidden_scale, logits, softmax(logits))


def masked_cross_entropy(probs: np.ndarray, labels: np.ndarray, mask: np.ndarray) -> float:
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        raise ValueError("mask selects no nodes")
    picked = probs[idx, labels[idx]]
    return float(-np.mean(np.log(np.maximum(picked, np.finfo(np.float64).tiny))))


def loss_and_grads(
    act: Activations,
    labels: np.ndarray,
    train_mask: np.ndarray,
    p: ModelParams,
    weight_decay: float,
    a_hat: SparseMatrix,
    x: np.ndarray | None = None,
) -> tuple[float, ModelParams]:
    """Masked mean cross-entropy plus first-layer L2, and its exact gradient.

    ``x`` is accepted for symmetry with ``forward``; the backward pass uses
    the dropped features recorded in ``act``.
    """
    idx = np.flatnonzero(train_mask)
    if idx.size == 0:
        raise ValueError("train_mask selects no nodes")
    loss = masked_cross_entropy(act.probs, labels, train_mask)
    loss += weight_decay * 0.5 * float(np.sum(p.w0 * p.w0))

    # softmax + cross-entropy: d loss / d logits = (probs - onehot) / |mask| on masked rows
    d_logits = np.zeros_like(act.probs)
    d_logits[idx] = act.probs[idx]
    d_logits[idx, labels[idx]] -= 1.0
    d_logits /= idx.size

    # A_hat is symmetric, so A_hat^T @ G == A_hat @ G
    d_hw = spmm(a_hat, d_logits)
    h1_used = act.h1 if act.hidden_scale is None else act.h1 * act.hidden_scale
    g_w1 = h1_used.T @ d_hw
    d_h1 = d_hw @ p.w1.T
    if act.hidden_scale is not None:
        d_h1 = d_h1 * act.hidden_scale
    d_pre = d_h1 * (act.hidden_pre > 0.0)
    d_xw = spmm(a_hat, d_pre)
    g_w0 = act.x_drop.T @ d_xw + weight_decay * p.w0
    return loss, ModelParams(g_w0, g_w1)


def adam_step(
    p: ModelParams,
    grads: ModelParams,
    state: AdamState,
    lr: float = 0.01,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> tuple[ModelParams, AdamState]:
    """Bias-corrected Adam; returns new params and state, inputs untouched."""
    for name, g in zip(("W0", "W1"), grads.arrays()):
        if not np.all(np.isfinite(g)):
            bad = int(np.count_nonzero(~np.isfinite(g)))
            raise NumericalError(f"non-finite gradient: {bad} entries of d/d{name} are NaN/inf")
    t = state.t + 1
    new_params, new_m, new_v = [], [], []
    for w, g, m, v in zip(p.arrays(), grads.arrays(), state.m, state.v):
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * (g * g)
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        new_params.append(w - lr * m_hat / (np.sqrt(v_hat) + eps))
        new_m.append(m)
        new_v.append(v)
    return ModelParams(*new_params), AdamState(new_m, new_v, t)
