"""Full-batch transductive training with validation early stopping."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .gcn import (
    AdamState,
    ModelParams,
    adam_step,
    forward,
    init_params,
    loss_and_grads,
    masked_cross_entropy,
)
from .graph import Graph, SparseMatrix, normalized_adjacency
from .rng import generator
from .selection import Split

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    max_epochs: int = 200
    patience: int = 10
    lr: float = 0.01
    dropout_p: float = 0.5
    weight_decay: float = 5e-4
    hidden_dim: int = 16
    seed: int = 0

    def validate(self) -> None:
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if not 1 <= self.patience <= self.max_epochs:
            raise ValueError(f"patience must be in [1, max_epochs], got {self.patience}")
        if self.lr <= 0:
            raise ValueError(f"lr must be positive, got {self.lr}")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError(f"dropout_p must be in [0, 1), got {self.dropout_p}")
        if self.weight_decay < 0:
            raise ValueError(f"weight_decay must be non-negative, got {self.weight_decay}")
        if self.hidden_dim < 1:
            raise ValueError(f"hidden_dim must be >= 1, got {self.hidden_dim}")


@dataclass
class TrainResult:
    test_accuracy: float
    test_loss: float
    stop_epoch: int  # 1-based epoch of the best monitored loss
    halt_epoch: int  # epoch at which the loop actually ended
    params: ModelParams
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    val_accuracy: list[float] = field(default_factory=list)


def evaluate(
    p: ModelParams,
    a_hat: SparseMatrix | Graph,
    x: np.ndarray,
    labels: np.ndarray,
    mask: np.ndarray,
) -> tuple[float, float]:
    """Eval-mode accuracy and mean cross-entropy (no weight decay) on ``mask``.

    Argmax ties go to the lowest class index (``np.argmax`` semantics).
    """
    if isinstance(a_hat, Graph):
        a_hat = normalized_adjacency(a_hat)
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        raise ValueError("evaluation mask selects no nodes")
    probs = forward(a_hat, x, p, mode="eval").probs
    return accuracy_and_loss(probs, labels, mask)


def accuracy_and_loss(probs: np.ndarray, labels: np.ndarray, mask: np.ndarray) -> tuple[float, float]:
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        raise ValueError("evaluation mask selects no nodes")
    acc = float(np.mean(np.argmax(probs[idx], axis=1) == labels[idx]))
    return acc, masked_cross_entropy(probs, labels, mask)


def train(
    g: Graph,
    x: np.ndarray,
    labels: np.ndarray,
    split: Split,
    cfg: TrainConfig = TrainConfig(),
    *,
    a_hat: SparseMatrix | None = None,
) -> TrainResult:
    """Train a fresh model on ``split.train_mask``.

    Each epoch: one train-mode forward/backward and Adam step, then an
    eval-mode pass for the validation loss. Training halts once the
    validation loss has failed to improve for ``cfg.patience`` epochs; the
    best-validation parameters are restored before scoring the test mask.
    If the validation mask is empty the training loss is monitored instead.
    If the test mask is empty the test metrics are NaN.
    """
    cfg.validate()
    labels = np.asarray(labels)
    x = np.asarray(x, dtype=np.float64)
    if a_hat is None:
        a_hat = normalized_adjacency(g)
    if not split.train_mask.any():
        raise ValueError("split has no training nodes")

    monitor_val = bool(split.val_mask.any())
    if not monitor_val:
        warnings.warn(
            "validation mask is empty; early stopping will monitor the training loss",
            RuntimeWarning,
            stacklevel=2,
        )

    num_classes = int(labels.max()) + 1
    params = init_params(x.shape[1], cfg.hidden_dim, num_classes, cfg.seed)
    state = AdamState.zeros_like(params)
    dropout_rng = generator(cfg.seed, "dropout")

    result = TrainResult(math.nan, math.nan, 0, 0, params)
    best_loss, best_epoch, best_params = math.inf, 0, params.copy()
    stale = 0
    for epoch in range(1, cfg.max_epochs + 1):
        act = forward(a_hat, x, params, cfg.dropout_p, "train", dropout_rng)
        loss, grads = loss_and_grads(act, labels, split.train_mask, params, cfg.weight_decay, a_hat, x)
        params, state = adam_step(params, grads, state, lr=cfg.lr)
        result.train_loss.append(loss)

        if monitor_val:
            probs = forward(a_hat, x, params, mode="eval").probs
            val_acc, monitored = accuracy_and_loss(probs, labels, split.val_mask)
            result.val_loss.append(monitored)
            result.val_accuracy.append(val_acc)
        else:
            monitored = loss

        if monitored < best_loss:
            best_loss, best_epoch, best_params = monitored, epoch, params.copy()
            stale = 0
        else:
            stale += 1
        result.halt_epoch = epoch
        if stale >= cfg.patience:
            break

    result.params = best_params
    result.stop_epoch = best_epoch
    if split.test_mask.any():
        result.test_accuracy, result.test_loss = evaluate(best_params, a_hat, x, labels, split.test_mask)
    log.debug(
        "trained: best epoch %d, halted %d, test acc %.4f",
        result.stop_epoch,
        result.halt_epoch,
        result.test_accuracy,
    )
    return result
