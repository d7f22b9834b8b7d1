"""
Density-peak clustering.

Points are ranked by local density alpha (Gaussian kernel with cutoff l_z) and by beta,
the distance to the nearest point of higher density. Centers are points where both are
high; every other point inherits the cluster of its nearest higher-density neighbor.
"""

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
from scipy.spatial.distance import pdist, squareform

from config import CENTER_THRESHOLD, CSV_FLOAT_FORMAT, CUTOFF_PERCENT, DENSITY_BLOCK_ROWS
from errors import ClusteringError, ShapeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    d: np.ndarray
    cutoff: Optional[float] = None

    @property
    def size(self) -> int:
        return self.d.shape[0]

    def condensed(self) -> np.ndarray:
        """Upper-triangle distances, the N(N-1)/2 off-diagonal values."""
        return self.d[np.triu_indices(self.size, k=1)]


@dataclass(frozen=True, eq=False)
class DensityProfile:
    alpha: np.ndarray
    beta: np.ndarray

    @property
    def gamma(self) -> np.ndarray:
        return self.alpha * self.beta


@dataclass(frozen=True)
class CenterPolicy:
    """fixed: top-`count` gamma; auto: gamma > mean + threshold * std (at least one center)."""
    kind: str = "auto"
    count: Optional[int] = None
    threshold: float = CENTER_THRESHOLD

    def __post_init__(self):
        if self.kind not in ("fixed", "auto"):
            raise ClusteringError(f"unknown center policy {self.kind!r}")
        if self.kind == "fixed" and (self.count is None or self.count < 1):
            raise ClusteringError("fixed center policy needs count >= 1")


@dataclass(frozen=True, eq=False)
class ClusterModel:
    centers: np.ndarray
    assignments: np.ndarray

    @property
    def center_count(self) -> int:
        return len(self.centers)


# ------------------ distances and cutoff ------------------

def pairwise_distances(features: np.ndarray) -> DistanceMatrix:
    """Dense Euclidean distance matrix; the cutoff is left unset."""
    features = np.asarray(features, dtype=float)
    if features.ndim != 2:
        raise ShapeError(f"features must be a 2-D matrix, got shape {features.shape}")
    if features.shape[0] < 2:
        raise ClusteringError("pairwise distances need at least 2 points")
    return DistanceMatrix(d=squareform(pdist(features, metric="euclidean")))


def percentile_cutoff(distances: np.ndarray, percent: int = CUTOFF_PERCENT) -> float:
    """
    Sort the condensed distances ascending and take the value at 1-based position
    ceil((100 - percent) * M / 100), the lower boundary of the largest `percent`%.
    """
    values = np.sort(np.asarray(distances, dtype=float).ravel())
    m = values.shape[0]
    if m == 0 or values[-1] <= 0:
        raise ClusteringError("degenerate: zero spread")
    position = -(-(100 - percent) * m // 100)  # integer ceil
    cutoff = float(values[max(position, 1) - 1])
    if cutoff <= 0:
        cutoff = float(values[values > 0][0])
        logger.warning("Percentile cutoff is 0 on duplicate-heavy data; using smallest positive distance %.6g", cutoff)
    return cutoff


def cutoff_distance(dm: DistanceMatrix, percent: int = CUTOFF_PERCENT) -> float:
    return percentile_cutoff(dm.condensed(), percent)


def with_cutoff(dm: DistanceMatrix, percent: int = CUTOFF_PERCENT) -> DistanceMatrix:
    return replace(dm, cutoff=cutoff_distance(dm, percent))


# ------------------ alpha and beta ------------------

def local_density(dm: DistanceMatrix) -> np.ndarray:
    """alpha_i = sum over j != i of exp(-(l_ij / l_z)^2)."""
    if dm.cutoff is None or not dm.cutoff > 0:
        raise ClusteringError("cutoff distance is unset")
    n = dm.size
    alpha = np.empty(n)
    for start in range(0, n, DENSITY_BLOCK_ROWS):
        stop = min(start + DENSITY_BLOCK_ROWS, n)
        block = dm.d[start:stop] / dm.cutoff
        np.square(block, out=block)
        np.negative(block, out=block)
        np.exp(block, out=block)
        block[np.arange(stop - start), np.arange(start, stop)] = 0.0
        alpha[start:stop] = block.sum(axis=1)
    return alpha


def density_order(alpha: np.ndarray) -> np.ndarray:
    """Indices by decreasing alpha, ties by increasing index."""
    alpha = np.asarray(alpha, dtype=float)
    return np.lexsort((np.arange(alpha.shape[0]), -alpha))


def _nearest_higher(dm: DistanceMatrix, alpha: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    beta and the nearest-higher-density parent of every point. A point j is higher than i
    if it precedes i in density_order. The first point has no parent (-1) and takes
    beta = max_j l_ij.
    """
    order = density_order(alpha)
    n = order.shape[0]
    beta = np.empty(n)
    parent = np.full(n, -1, dtype=np.int64)
    top = order[0]
    beta[top] = dm.d[top].max()
    for pos in range(1, n):
        i = order[pos]
        higher = order[:pos]
        row = dm.d[i, higher]
        k = int(np.argmin(row))
        beta[i] = row[k]
        parent[i] = higher[k]
    return beta, parent


def delta_distance(dm: DistanceMatrix, alpha: np.ndarray) -> np.ndarray:
    if np.asarray(alpha).shape[0] != dm.size:
        raise ShapeError(f"alpha has {np.asarray(alpha).shape[0]} entries for {dm.size} points")
    beta, _ = _nearest_higher(dm, alpha)
    return beta


def density_profile(dm: DistanceMatrix) -> DensityProfile:
    alpha = local_density(dm)
    return DensityProfile(alpha=alpha, beta=delta_distance(dm, alpha))


# ------------------ centers and assignment ------------------

def select_centers(alpha: np.ndarray, beta: np.ndarray, policy: CenterPolicy = CenterPolicy()) -> np.ndarray:
    """Center indices ordered by decreasing gamma = alpha * beta (ties by lower index)."""
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if alpha.shape != beta.shape:
        raise ShapeError("alpha and beta lengths differ")
    gamma = alpha * beta
    ranked = np.lexsort((np.arange(gamma.shape[0]), -gamma))

    if policy.kind == "fixed":
        if policy.count > gamma.shape[0]:
            raise ClusteringError(f"cannot pick {policy.count} centers from {gamma.shape[0]} points")
        return ranked[:policy.count]

    threshold = gamma.mean() + policy.threshold * gamma.std()
    centers = ranked[gamma[ranked] > threshold]
    if centers.size == 0:
        centers = ranked[:1]
    return centers


def assign_points(dm: DistanceMatrix, alpha: np.ndarray, centers) -> np.ndarray:
    """
    Centers label themselves; everyone else takes the label of their nearest higher-density
    neighbor, visited in decreasing-alpha order. A parentless non-center (the global density
    peak when it was not picked) joins its nearest center.
    """
    centers = np.asarray(centers, dtype=np.int64)
    if centers.size == 0:
        raise ClusteringError("at least one center is required")
    _, parent = _nearest_higher(dm, alpha)
    labels = np.full(dm.size, -1, dtype=np.int64)
    labels[centers] = np.arange(centers.size)
    for i in density_order(alpha):
        if labels[i] >= 0:
            continue
        if parent[i] < 0:
            labels[i] = int(np.argmin(dm.d[i, centers]))
        else:
            labels[i] = labels[parent[i]]
    return labels


def fit_density_peaks(
    features: np.ndarray,
    policy: CenterPolicy = CenterPolicy(),
    percent: int = CUTOFF_PERCENT,
) -> tuple[ClusterModel, DensityProfile, DistanceMatrix]:
    """Full pipeline: distances, cutoff, alpha, beta, centers, assignments."""
    dm = with_cutoff(pairwise_distances(features), percent)
    profile = density_profile(dm)
    centers = select_centers(profile.alpha, profile.beta, policy)
    assignments = assign_points(dm, profile.alpha, centers)
    logger.info("Density peaks: %d points, cutoff %.6g, %d centers", dm.size, dm.cutoff, centers.size)
    return ClusterModel(centers=centers, assignments=assignments), profile, dm


def write_decision_graph(profile: DensityProfile, centers, path: Union[str, Path]) -> Path:
    """CSV with index, alpha, beta, gamma, is_center for offline plotting."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    is_center = np.zeros(profile.alpha.shape[0], dtype=bool)
    is_center[np.asarray(centers, dtype=np.int64)] = True
    frame = pd.DataFrame({
        "index": np.arange(profile.alpha.shape[0]),
        "alpha": profile.alpha,
        "beta": profile.beta,
        "gamma": profile.gamma,
        "is_center": is_center.astype(int),
    })
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    return path
