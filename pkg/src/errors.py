"""Exception hierarchy shared by every subpackage."""

from typing import Optional


class AmnnError(Exception):
    """Base class for all toolkit failures."""


class DataError(AmnnError, ValueError):
    """Dataset ingestion or invariant violation, optionally pinned to a CSV cell."""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[int] = None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class ConfigError(AmnnError, ValueError):
    """Invalid configuration; key_path names the offending key (dotted)."""

    def __init__(self, message: str, key_path: Optional[str] = None):
        self.message = message
        self.key_path = key_path
        super().__init__(f"{key_path}: {message}" if key_path else message)


class ShapeError(AmnnError, ValueError):
    """Array dimensions do not line up."""


class ClusteringError(AmnnError):
    """Density-peak clustering cannot proceed (degenerate spread, missing cutoff)."""


class TrainingError(AmnnError):
    """Training diverged; epoch and batch locate the failing update."""

    def __init__(self, message: str, epoch: Optional[int] = None, batch: Optional[int] = None):
        self.epoch = epoch
        self.batch = batch
        super().__init__(f"{message} (epoch {epoch}, batch {batch})" if epoch is not None else message)
