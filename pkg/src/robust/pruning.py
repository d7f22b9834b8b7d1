"""Sample-rate pruning: keep confident samples, drop the suspected ones from the gradient."""

import math
from dataclasses import dataclass

import numpy as np

from errors import ConfigError
from network.mlp import Mlp, forward


@dataclass(frozen=True, eq=False)
class SampleWeights:
    w: np.ndarray
    epoch_updated: int = -1

    @property
    def retained(self) -> int:
        return int(self.w.sum())

    @property
    def mask(self) -> np.ndarray:
        return self.w.astype(bool)


def retention_cap(sample_rate: float, n: int) -> int:
    # round first so 0.7 * 10 is 7, not 8
    return math.ceil(round(sample_rate * n, 9))


def prune_mask(true_class_probs, k: float, sample_rate: float, epoch: int = -1) -> SampleWeights:
    """
    Candidates are samples with p > k; at most ceil(sample_rate * N) of them survive,
    highest p first (ties by lower index). With no candidate the single most confident
    sample is kept.
    """
    if not 0.0 < sample_rate <= 1.0:
        raise ConfigError(f"must lie in (0, 1], got {sample_rate}", "sample_rate")
    p = np.asarray(true_class_probs, dtype=float)
    n = p.shape[0]
    ranked = np.lexsort((np.arange(n), -p))
    w = np.zeros(n, dtype=np.int8)
    if n == 0:
        return SampleWeights(w=w, epoch_updated=epoch)
    candidates = ranked[p[ranked] > k]
    if candidates.size == 0:
        candidates = ranked[:1]
    w[candidates[:retention_cap(sample_rate, n)]] = 1
    return SampleWeights(w=w, epoch_updated=epoch)


def true_class_probabilities(net: Mlp, features: np.ndarray, labels: np.ndarray) -> np.ndarray:
    probs, _ = forward(net, features)
    return probs[np.arange(probs.shape[0]), labels]
