"""Dataset container, CSV ingestion, blob synthesis, stratified splitting and standardization."""

import logging
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
from sklearn.datasets import make_blobs

from config import CSV_FLOAT_FORMAT
from data.noise import NoiseSpec, inject_noise, round_half_up
from errors import DataError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix plus integer class ids; clean_labels is set only after noise injection."""
    features: np.ndarray
    labels: np.ndarray
    class_count: int
    clean_labels: Optional[np.ndarray] = None
    label_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        if features.ndim != 2:
            raise DataError(f"features must be a 2-D matrix, got shape {features.shape}")
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if labels.shape[0] != features.shape[0]:
            raise DataError(f"{features.shape[0]} feature rows but {labels.shape[0]} labels")
        if self.class_count < 1:
            raise DataError("class_count must be >= 1")
        if labels.size and (labels.min() < 0 or labels.max() >= self.class_count):
            raise DataError(f"labels must lie in 0..{self.class_count - 1}")
        if not np.all(np.isfinite(features)):
            raise DataError("feature values must be finite")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        if self.clean_labels is not None:
            clean = np.asarray(self.clean_labels, dtype=np.int64).reshape(-1)
            if clean.shape[0] != labels.shape[0]:
                raise DataError("clean_labels length differs from labels")
            if clean.size and (clean.min() < 0 or clean.max() >= self.class_count):
                raise DataError(f"clean_labels must lie in 0..{self.class_count - 1}")
            object.__setattr__(self, "clean_labels", clean)
        if not self.label_names:
            object.__setattr__(self, "label_names", tuple(str(c) for c in range(self.class_count)))

    @property
    def size(self) -> int:
        return self.features.shape[0]

    @property
    def dimension(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        clean = None if self.clean_labels is None else self.clean_labels[indices]
        return replace(self, features=self.features[indices], labels=self.labels[indices], clean_labels=clean)

    def class_histogram(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.class_count)


@dataclass(frozen=True)
class SynthSpec:
    """Gaussian blobs, one per class; class_counts overrides samples_per_class."""
    class_count: int = 3
    samples_per_class: int = 100
    dimension: int = 2
    center_separation: float = 10.0
    cluster_stddev: float = 1.0
    seed: int = 0
    class_counts: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if self.class_counts is not None:
            object.__setattr__(self, "class_counts", tuple(int(c) for c in self.class_counts))
            if len(self.class_counts) != self.class_count:
                raise DataError(f"class_counts has {len(self.class_counts)} entries for {self.class_count} classes")
        if self.class_count < 1 or self.dimension < 1 or min(self.counts()) < 1:
            raise DataError("class_count, dimension and every class count must be >= 1")
        for name in ("center_separation", "cluster_stddev"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise DataError(f"{name} must be finite and > 0, got {value}")

    def counts(self) -> list[int]:
        if self.class_counts is not None:
            return list(self.class_counts)
        return [self.samples_per_class] * self.class_count


# ------------------ ingestion ------------------

_EXTRA_FIELDS = re.compile(r"Expected (\d+) fields in line (\d+), saw (\d+)")


def _parse_float(cell: str) -> Optional[float]:
    try:
        return float(cell)
    except ValueError:
        return None


def _read_cells(path: Path) -> tuple[list[int], np.ndarray]:
    """Raw string cells of the non-blank rows and their 1-based file lines."""
    try:
        frame = pd.read_csv(
            path, header=None, dtype=str, keep_default_na=False, skip_blank_lines=False, encoding="utf-8"
        )
    except pd.errors.EmptyDataError:
        raise DataError("zero data rows")
    except pd.errors.ParserError as e:
        match = _EXTRA_FIELDS.search(str(e))
        if match is None:
            raise DataError(f"unparseable CSV: {e}") from e
        width, line, found = (int(g) for g in match.groups())
        raise DataError(f"ragged row: expected {width} columns, found {found}", row=line) from e
    except UnicodeDecodeError as e:
        raise DataError(f"{path} is not valid UTF-8: {e.reason} at byte {e.start}") from e

    # short rows come back padded with NaN; a blank line is NaN past an empty first cell
    cells = frame.to_numpy(dtype=object)
    missing = frame.isna().to_numpy()
    lines, rows = [], []
    for i, row in enumerate(cells):
        if missing[i, 1:].all() and (missing[i, 0] or row[0] == ""):
            continue
        if missing[i].any():
            found = int(np.argmax(missing[i]))
            raise DataError(f"ragged row: expected {cells.shape[1]} columns, found {found}", row=i + 1)
        lines.append(i + 1)
        rows.append(row)
    if not rows:
        raise DataError("zero data rows")
    return lines, np.array(rows, dtype=object)


def load_csv(
    path: Union[str, Path],
    label_column: Union[str, int] = -1,
    has_header: Optional[bool] = None,
) -> Dataset:
    """
    Read a comma-separated file into a Dataset. Rows and columns in errors are 1-based.
    Labels map to ids by first appearance. has_header=None detects a header: always when
    label_column is a name, otherwise when the first row holds a non-numeric feature cell.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"missing file: {path}")
    lines, cells = _read_cells(path)
    width = cells.shape[1]

    if isinstance(label_column, str):
        header = [str(h).strip() for h in cells[0]]
        if label_column not in header:
            raise DataError(f"label column {label_column!r} not in header")
        label_idx = header.index(label_column)
        has_header = True if has_header is None else has_header
    else:
        if not -width <= label_column < width:
            raise DataError(f"label column index {label_column} out of range for {width} columns")
        label_idx = label_column % width
    feature_idx = [c for c in range(width) if c != label_idx]

    if has_header is None:
        has_header = any(_parse_float(cells[0, c]) is None for c in feature_idx)
    if has_header:
        lines, cells = lines[1:], cells[1:]
    if not lines:
        raise DataError("zero data rows")

    features = np.empty((len(lines), len(feature_idx)))
    for r, line in enumerate(lines):
        for f, c in enumerate(feature_idx):
            cell = cells[r, c]
            value = _parse_float(cell)
            if value is None:
                raise DataError(f"non-numeric feature cell {cell!r}", row=line, column=c + 1)
            if not np.isfinite(value):
                raise DataError(f"non-finite feature cell {cell!r}", row=line, column=c + 1)
            features[r, f] = value
    names = pd.Series(cells[:, label_idx], dtype=str).str.strip()
    codes, uniques = pd.factorize(names, sort=False)

    logger.info("Loaded %s: %d rows, %d features, %d classes", path, features.shape[0], features.shape[1], len(uniques))
    return Dataset(features=features, labels=codes, class_count=len(uniques), label_names=tuple(uniques))


def write_csv(dataset: Dataset, path: Union[str, Path]) -> Path:
    """Write features and label names with a header x0..x{D-1},label."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(dataset.features, columns=[f"x{j}" for j in range(dataset.dimension)])
    frame["label"] = [dataset.label_names[y] for y in dataset.labels]
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n", encoding="utf-8")
    return path


# ------------------ synthesis ------------------

def _place_centers(rng: np.random.Generator, count: int, dimension: int, separation: float) -> np.ndarray:
    """Rejection-sample centers pairwise >= separation apart; the box grows if placement stalls."""
    half_width = separation * max(1.0, count ** (1.0 / dimension))
    centers: list[np.ndarray] = []
    misses = 0
    while len(centers) < count:
        candidate = rng.uniform(-half_width, half_width, size=dimension)
        if all(np.linalg.norm(candidate - c) >= separation for c in centers):
            centers.append(candidate)
            continue
        misses += 1
        if misses % 1000 == 0:
            half_width *= 1.5
    return np.array(centers)


def synthesize(spec: SynthSpec) -> Dataset:
    """Gaussian blobs, rows grouped by class in class order."""
    rng = np.random.default_rng(spec.seed)
    centers = _place_centers(rng, spec.class_count, spec.dimension, spec.center_separation)
    features, labels = make_blobs(
        n_samples=spec.counts(),
        centers=centers,
        cluster_std=spec.cluster_stddev,
        shuffle=False,
        random_state=int(rng.integers(2 ** 31)),
    )
    return Dataset(features=features, labels=labels, class_count=spec.class_count)


# ------------------ splitting and scaling ------------------

def _stratified_test_counts(counts: np.ndarray, n_test: int) -> np.ndarray:
    """Largest-remainder allocation of n_test rows across classes; ties go to lower class ids."""
    quotas = counts * n_test / counts.sum()
    base = np.floor(quotas).astype(np.int64)
    remainder = n_test - int(base.sum())
    order = np.lexsort((np.arange(len(counts)), -(quotas - base)))
    base[order[:remainder]] += 1
    return base


def split(dataset: Dataset, test_ratio: float, seed: int) -> tuple[Dataset, Dataset]:
    """
    Stratified train/test partition with round(test_ratio * N) test rows.
    Falls back to an unstratified draw when some present class has fewer than 2 members.
    """
    if not 0.0 <= test_ratio < 1.0:
        raise DataError(f"test_ratio must lie in [0, 1), got {test_ratio}")
    n = dataset.size
    if test_ratio > 0 and n < 2:
        raise DataError("splitting needs at least 2 rows")
    n_test = round_half_up(test_ratio * n)
    if n_test >= n:
        raise DataError(f"test_ratio {test_ratio} leaves an empty train set for N={n}")

    rng = np.random.default_rng(seed)
    counts = dataset.class_histogram()
    if n_test == 0:
        test_idx = np.empty(0, dtype=np.int64)
    elif counts[counts > 0].min() >= 2:
        per_class = _stratified_test_counts(counts, n_test)
        picks = [
            rng.permutation(np.flatnonzero(dataset.labels == c))[:per_class[c]]
            for c in range(dataset.class_count)
        ]
        test_idx = np.sort(np.concatenate(picks))
    else:
        logger.warning("A class has fewer than 2 rows; falling back to an unstratified split")
        test_idx = np.sort(rng.permutation(n)[:n_test])

    train_idx = np.setdiff1d(np.arange(n), test_idx, assume_unique=True)
    return dataset.subset(train_idx), dataset.subset(test_idx)


def apply_standardization(features: np.ndarray, means: np.ndarray, stddevs: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=float)
    scale = np.where(stddevs > 0, stddevs, 1.0)
    out = (features - means) / scale
    out[:, stddevs == 0] = 0.0
    return out


def standardize(
    train: Dataset, test: Optional[Dataset] = None
) -> tuple[Dataset, Optional[Dataset], np.ndarray, np.ndarray]:
    """Scale both sets by train statistics; zero-variance train features become 0 everywhere."""
    if train.size == 0:
        raise DataError("cannot standardize an empty train set")
    means = train.features.mean(axis=0)
    stddevs = train.features.std(axis=0)
    train_out = replace(train, features=apply_standardization(train.features, means, stddevs))
    test_out = None
    if test is not None:
        test_out = replace(test, features=apply_standardization(test.features, means, stddevs))
    return train_out, test_out, means, stddevs


def with_noise(dataset: Dataset, spec: NoiseSpec) -> Dataset:
    """Dataset whose labels are noisy and whose clean_labels shadow keeps the originals."""
    noise = inject_noise(dataset.labels, spec, dataset.class_count)
    clean = dataset.clean_labels if dataset.clean_labels is not None else noise.clean_labels
    return replace(dataset, labels=noise.noisy_labels, clean_labels=clean)
