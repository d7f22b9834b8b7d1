"""
Robust-mode training: ELU hidden layers, softmax output, Adam.

train_robust minimizes the truncated GCE loss over the samples kept by the dynamic
pruning mask. During the warmup epochs every sample is kept and the plain GCE loss is
used; from then on the mask is re-estimated from the current model before each epoch.
train_cross_entropy is the same loop with cross-entropy (optionally on mixup batches).
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from config import (
    ADAM_BETA1,
    ADAM_BETA2,
    ADAM_EPSILON,
    BATCH_SIZE,
    EPOCHS,
    GCE_Q,
    LEARNING_RATE,
    PRUNE_WARMUP_EPOCHS,
    ROBUST_HIDDEN_ACTIVATION,
    ROBUST_OUTPUT_ACTIVATION,
    SAMPLE_RATE,
    TRUNCATION_K,
)
from data.augment import mixup, one_hot
from data.datasets import Dataset
from errors import ConfigError, ShapeError
from network.classic import check_layer_sizes
from network.history import EpochCallback, EpochStats
from network.mlp import Mlp, backward, check_finite, forward, init_weights, predict_mlp
from robust.loss import (
    check_k,
    check_q,
    cross_entropy_logit_gradient,
    cross_entropy_loss,
    gce_logit_gradient,
    truncated_loss,
)
from robust.optim import AdamState, adam_step
from robust.pruning import SampleWeights, prune_mask, true_class_probabilities

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RobustConfig:
    learning_rate: float = LEARNING_RATE
    epochs: int = EPOCHS
    batch_size: int = BATCH_SIZE
    seed: int = 0
    q: float = GCE_Q
    k: float = TRUNCATION_K
    sample_rate: float = SAMPLE_RATE
    prune_warmup_epochs: int = PRUNE_WARMUP_EPOCHS
    adam_beta1: float = ADAM_BETA1
    adam_beta2: float = ADAM_BETA2
    adam_epsilon: float = ADAM_EPSILON

    def __post_init__(self):
        if not 0.0 < self.learning_rate < 1.0:
            raise ConfigError(f"must lie in (0, 1), got {self.learning_rate}", "learning_rate")
        if self.epochs < 1:
            raise ConfigError(f"must be >= 1, got {self.epochs}", "epochs")
        if self.batch_size < 1:
            raise ConfigError(f"must be >= 1, got {self.batch_size}", "batch_size")
        check_q(self.q)
        check_k(self.k)
        if not 0.0 < self.sample_rate <= 1.0:
            raise ConfigError(f"must lie in (0, 1], got {self.sample_rate}", "sample_rate")
        if self.prune_warmup_epochs < 0:
            raise ConfigError(f"must be >= 0, got {self.prune_warmup_epochs}", "prune_warmup_epochs")
        for name in ("adam_beta1", "adam_beta2"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ConfigError(f"must lie in [0, 1), got {getattr(self, name)}", name)
        if not self.adam_epsilon > 0:
            raise ConfigError(f"must be > 0, got {self.adam_epsilon}", "adam_epsilon")


def truncated_loss_gradients(
    net: Mlp, batch: np.ndarray, labels: np.ndarray, q: float, k: float
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Per-sample truncated loss and the gradient of its batch mean."""
    probs, cache = forward(net, batch)
    p = probs[np.arange(probs.shape[0]), labels]
    delta = gce_logit_gradient(probs, labels, q, k) / probs.shape[0]
    return truncated_loss(p, q, k), backward(net, cache, delta)


def cross_entropy_gradients(
    net: Mlp, batch: np.ndarray, soft_targets: np.ndarray
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Per-sample cross-entropy and the gradient of its batch mean."""
    probs, cache = forward(net, batch)
    losses = (soft_targets * cross_entropy_loss(probs)).sum(axis=1)
    delta = cross_entropy_logit_gradient(probs, soft_targets) / probs.shape[0]
    return losses, backward(net, cache, delta)


@dataclass
class EpochResult:
    net: Mlp
    state: AdamState
    loss_sum: float
    loss_count: int


def run_epoch(
    net: Mlp,
    state: AdamState,
    dataset: Dataset,
    weights: SampleWeights,
    config: RobustConfig,
    rng: np.random.Generator,
    objective: str = "truncated",
    truncate: bool = True,
    mixup_alpha: Optional[float] = None,
    epoch: int = 0,
) -> EpochResult:
    """
    One shuffled pass. Batches are drawn over all rows and then filtered to the retained
    ones, so pruned rows never reach the forward pass; a batch with nothing retained is skipped.
    """
    n = dataset.size
    batch = min(config.batch_size, n)
    perm = rng.permutation(n)
    keep = weights.mask
    k = config.k if truncate else 0.0
    loss_sum, loss_count = 0.0, 0

    for b, start in enumerate(range(0, n, batch)):
        idx = perm[start:start + batch]
        idx = idx[keep[idx]]
        if idx.size == 0:
            continue
        x, y = dataset.features[idx], dataset.labels[idx]
        if objective == "truncated":
            losses, grads = truncated_loss_gradients(net, x, y, config.q, k)
        else:
            targets = one_hot(y, dataset.class_count)
            if mixup_alpha is not None:
                x, targets = mixup(x, targets, mixup_alpha, seed=int(rng.integers(2 ** 32)))
            losses, grads = cross_entropy_gradients(net, x, targets)
        check_finite(grads, epoch, b)
        params, state = adam_step(
            net.params(), grads, state, config.learning_rate,
            config.adam_beta1, config.adam_beta2, config.adam_epsilon,
        )
        net.set_params(params)
        loss_sum += float(losses.sum())
        loss_count += idx.size
    return EpochResult(net, state, loss_sum, loss_count)


def _fit(
    dataset: Dataset,
    layer_sizes: list[int],
    config: RobustConfig,
    objective: str,
    mixup_alpha: Optional[float],
    on_epoch: Optional[EpochCallback],
) -> Mlp:
    sizes = check_layer_sizes(dataset, layer_sizes)
    if dataset.size == 0:
        raise ShapeError("cannot train on an empty dataset")
    net = init_weights(sizes, config.seed, ROBUST_HIDDEN_ACTIVATION, ROBUST_OUTPUT_ACTIVATION)
    state = AdamState.zeros(net.params())
    rng = np.random.default_rng([config.seed, 1])
    weights = SampleWeights(w=np.ones(dataset.size, dtype=np.int8))

    for epoch in range(config.epochs):
        pruning = objective == "truncated" and epoch >= config.prune_warmup_epochs
        if pruning:
            probs = true_class_probabilities(net, dataset.features, dataset.labels)
            weights = prune_mask(probs, config.k, config.sample_rate, epoch)
        result = run_epoch(net, state, dataset, weights, config, rng, objective, pruning, mixup_alpha, epoch)
        net, state = result.net, result.state

        if on_epoch is not None:
            mean_loss = result.loss_sum / result.loss_count if result.loss_count else float("nan")
            accuracy = float(np.mean(predict_mlp(net, dataset.features) == dataset.labels))
            on_epoch(EpochStats(epoch, mean_loss, weights.retained, accuracy))
    return net


def train_robust(
    dataset: Dataset,
    layer_sizes: list[int],
    config: RobustConfig,
    on_epoch: Optional[EpochCallback] = None,
) -> Mlp:
    return _fit(dataset, layer_sizes, config, "truncated", None, on_epoch)


def train_cross_entropy(
    dataset: Dataset,
    layer_sizes: list[int],
    config: RobustConfig,
    mixup_alpha: Optional[float] = None,
    on_epoch: Optional[EpochCallback] = None,
) -> Mlp:
    """Same architecture and optimizer as train_robust with plain cross-entropy."""
    return _fit(dataset, layer_sizes, config, "cross_entropy", mixup_alpha, on_epoch)
