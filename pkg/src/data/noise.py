"""Label-noise injection with an exact flip count."""

import logging
import math
from dataclasses import dataclass

import numpy as np

from errors import DataError

logger = logging.getLogger(__name__)

NOISE_KINDS = ("symmetric", "pair-asymmetric")


def round_half_up(x: float) -> int:
    """Count rounding used everywhere a rate is turned into a number of rows."""
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = "symmetric"
    rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise DataError(f"unknown noise kind {self.kind!r}; expected one of {NOISE_KINDS}")
        if not (0.0 <= self.rate <= 1.0) or math.isnan(self.rate):
            raise DataError(f"noise rate must lie in [0, 1], got {self.rate}")
        if self.seed < 0:
            raise DataError(f"noise seed must be unsigned, got {self.seed}")


@dataclass(frozen=True)
class LabelNoise:
    """Result of inject_noise; clean_labels is the untouched input."""
    noisy_labels: np.ndarray
    flip_mask: np.ndarray
    clean_labels: np.ndarray

    @property
    def flip_count(self) -> int:
        return int(self.flip_mask.sum())


def inject_noise(labels, spec: NoiseSpec, class_count: int) -> LabelNoise:
    """
    Flip exactly round(rate * N) labels, chosen without replacement.
    symmetric: uniform over the other C-1 classes; pair-asymmetric: c -> (c + 1) mod C.
    """
    clean = np.asarray(labels, dtype=np.int64)
    n = clean.shape[0]
    if n and (clean.min() < 0 or clean.max() >= class_count):
        raise DataError(f"labels must lie in 0..{class_count - 1}")
    n_flip = round_half_up(spec.rate * n)
    if n_flip > 0 and class_count < 2:
        raise DataError("label noise needs at least 2 classes")

    rng = np.random.default_rng(spec.seed)
    noisy = clean.copy()
    flip_mask = np.zeros(n, dtype=bool)
    if n_flip > 0:
        idx = rng.choice(n, size=n_flip, replace=False)
        if spec.kind == "symmetric":
            offsets = rng.integers(1, class_count, size=n_flip)
        else:
            offsets = np.ones(n_flip, dtype=np.int64)
        noisy[idx] = (clean[idx] + offsets) % class_count
        flip_mask[idx] = True

    logger.debug("%s noise rate=%.3f: %d of %d labels flipped", spec.kind, spec.rate, n_flip, n)
    return LabelNoise(noisy_labels=noisy, flip_mask=flip_mask, clean_labels=clean)
