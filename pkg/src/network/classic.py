"""Classic-mode training: logistic units, squared error, mini-batch gradient descent."""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from config import CLASSIC_BATCH_SIZE, CLASSIC_EPOCHS, CLASSIC_LEARNING_RATE, CLASSIC_TARGET_ERROR
from data.augment import one_hot
from data.datasets import Dataset
from errors import ConfigError, ShapeError
from network.history import EpochCallback, EpochStats
from network.mlp import Mlp, apply_update, check_finite, init_weights, predict_mlp, squared_error_gradients

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    """target_error None (or +inf) disables the early-stop quality gate."""
    learning_rate: float = CLASSIC_LEARNING_RATE
    epochs: int = CLASSIC_EPOCHS
    batch_size: int = CLASSIC_BATCH_SIZE
    target_error: Optional[float] = CLASSIC_TARGET_ERROR
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.learning_rate < 1.0:
            raise ConfigError(f"must lie in (0, 1), got {self.learning_rate}", "learning_rate")
        if self.epochs < 1:
            raise ConfigError(f"must be >= 1, got {self.epochs}", "epochs")
        if self.batch_size < 1:
            raise ConfigError(f"must be >= 1, got {self.batch_size}", "batch_size")
        if self.target_error is not None and not self.target_error >= 0:
            raise ConfigError(f"must be >= 0, got {self.target_error}", "target_error")

    @property
    def gated(self) -> bool:
        return self.target_error is not None and not math.isinf(self.target_error)


def check_layer_sizes(dataset: Dataset, layer_sizes: list[int]) -> list[int]:
    sizes = [int(s) for s in layer_sizes]
    if len(sizes) < 2:
        raise ShapeError(f"need input and output layers, got {layer_sizes}")
    if sizes[0] != dataset.dimension or sizes[-1] != dataset.class_count:
        raise ShapeError(
            f"layer sizes {sizes} do not fit {dataset.dimension} features and {dataset.class_count} classes"
        )
    return sizes


def train_classic(
    dataset: Dataset,
    layer_sizes: list[int],
    config: TrainConfig,
    on_epoch: Optional[EpochCallback] = None,
) -> Mlp:
    """
    Shuffled mini-batch passes until the epoch-mean W reaches target_error or epochs run out.
    A dataset smaller than batch_size trains on full-dataset batches.
    """
    sizes = check_layer_sizes(dataset, layer_sizes)
    if dataset.size == 0:
        raise ShapeError("cannot train on an empty dataset")
    net = init_weights(sizes, config.seed)
    rng = np.random.default_rng([config.seed, 1])
    x, targets = dataset.features, one_hot(dataset.labels, dataset.class_count)
    n = dataset.size
    batch = min(config.batch_size, n)

    for epoch in range(config.epochs):
        perm = rng.permutation(n)
        total = 0.0
        for b, start in enumerate(range(0, n, batch)):
            idx = perm[start:start + batch]
            losses, grads = squared_error_gradients(net, x[idx], targets[idx])
            check_finite(grads, epoch, b)
            apply_update(net, grads, config.learning_rate)
            total += float(losses.sum())

        mean_loss = total / n
        if on_epoch is not None:
            accuracy = float(np.mean(predict_mlp(net, x) == dataset.labels))
            on_epoch(EpochStats(epoch, mean_loss, n, accuracy))
        if config.gated and mean_loss <= config.target_error:
            logger.debug("Target error %.3g reached after %d epochs", config.target_error, epoch + 1)
            break
    return net
