"""
Generalized cross-entropy L_q(p) = (1 - p^q) / q and its truncated form.

p is the predicted probability of the labelled class. Truncation flattens the loss to
L_q(k) for p <= k, which bounds the loss by (1 - k^q) / q and zeroes the gradient of
low-confidence samples. q = 1 gives the mean-absolute-error limb 1 - p.
"""

import numpy as np

from errors import ConfigError

CE_CLAMP = 1e-12


def check_q(q: float) -> None:
    if not 0.0 < q <= 1.0:
        raise ConfigError(f"must lie in (0, 1], got {q}", "q")


def check_k(k: float) -> None:
    if not 0.0 <= k < 1.0:
        raise ConfigError(f"must lie in [0, 1), got {k}", "k")


def gce_loss(p, q: float):
    check_q(q)
    p = np.asarray(p, dtype=float)
    return (1.0 - np.power(p, q)) / q


def loss_bound(q: float, k: float) -> float:
    """Plateau value (1 - k^q) / q, the upper bound of the truncated loss."""
    check_k(k)
    return float(gce_loss(k, q))


def truncated_loss(p, q: float, k: float):
    check_k(k)
    p = np.asarray(p, dtype=float)
    return np.where(p > k, gce_loss(p, q), gce_loss(k, q))


def cross_entropy_loss(p):
    """-ln(p) with p clamped below at 1e-12."""
    return -np.log(np.maximum(np.asarray(p, dtype=float), CE_CLAMP))


def gce_logit_gradient(probs: np.ndarray, labels: np.ndarray, q: float, k: float = 0.0) -> np.ndarray:
    """
    dL/dz for softmax probabilities: -p^q * (onehot - s) where p > k, 0 on the plateau.
    Rows are per sample; averaging is left to the caller.
    """
    check_q(q)
    check_k(k)
    rows = np.arange(probs.shape[0])
    p = probs[rows, labels]
    onehot = np.zeros_like(probs)
    onehot[rows, labels] = 1.0
    scale = np.where(p > k, -np.power(p, q), 0.0)
    return scale[:, None] * (onehot - probs)


def cross_entropy_logit_gradient(probs: np.ndarray, soft_targets: np.ndarray) -> np.ndarray:
    """dL/dz of -sum y log s for softmax outputs: s - y (targets may be mixed)."""
    return probs - soft_targets
