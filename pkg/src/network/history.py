"""Per-epoch training statistics and their CSV log."""

import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Optional, Union

import pandas as pd

from config import CSV_FLOAT_FORMAT

logger = logging.getLogger(__name__)

LOG_COLUMNS = ["epoch", "mean_loss", "retained", "train_accuracy"]


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    mean_loss: float
    retained: int
    train_accuracy: float


EpochCallback = Callable[[EpochStats], None]


class TrainingLog:
    """Collects EpochStats; pass the instance itself as an on_epoch callback."""

    def __init__(self, path: Optional[Union[str, Path]] = None):
        self.path = Path(path) if path else None
        self.rows: list[EpochStats] = []

    def __call__(self, stats: EpochStats) -> None:
        self.rows.append(stats)
        logger.debug(
            "epoch %d: loss=%.6f retained=%d acc=%.4f",
            stats.epoch, stats.mean_loss, stats.retained, stats.train_accuracy,
        )

    @property
    def losses(self) -> list[float]:
        return [r.mean_loss for r in self.rows]

    def write(self) -> Optional[Path]:
        if self.path is None:
            return None
        self.path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame([asdict(r) for r in self.rows], columns=LOG_COLUMNS)
        frame.to_csv(self.path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        return self.path
