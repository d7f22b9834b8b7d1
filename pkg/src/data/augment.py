"""Mixup augmentation: convex combinations of sample pairs and their one-hot labels."""

from typing import Optional, Union

import numpy as np

from errors import DataError, ShapeError


def one_hot(labels, class_count: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    out = np.zeros((labels.shape[0], class_count))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def mixup(
    batch_features: np.ndarray,
    batch_onehot_labels: np.ndarray,
    alpha: float,
    seed: int,
    lam: Optional[Union[float, np.ndarray]] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Mix every sample with a randomly permuted partner.
    lam overrides the per-pair Beta(alpha, alpha) draws (scalar or one value per row).
    """
    x = np.asarray(batch_features, dtype=float)
    y = np.asarray(batch_onehot_labels, dtype=float)
    if x.shape[0] == 0:
        raise DataError("mixup needs a nonempty batch")
    if y.shape[0] != x.shape[0]:
        raise ShapeError(f"{x.shape[0]} feature rows but {y.shape[0]} label rows")
    if not alpha > 0:
        raise DataError(f"mixup alpha must be > 0, got {alpha}")

    rng = np.random.default_rng(seed)
    batch = x.shape[0]
    if lam is None:
        lam = rng.beta(alpha, alpha, size=batch)
    lam = np.broadcast_to(np.asarray(lam, dtype=float), (batch,))[:, None]
    perm = rng.permutation(batch)

    mixed_x = lam * x + (1.0 - lam) * x[perm]
    mixed_y = lam * y + (1.0 - lam) * y[perm]
    return mixed_x, mixed_y
