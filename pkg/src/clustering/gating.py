"""Fuzzy membership of samples to cluster centers and hard routing to subnetworks."""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from config import MEMBERSHIP_DENOM
from errors import ClusteringError, ShapeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MembershipMatrix:
    """
    G x N memberships g[k, i] = exp(-||u_i - z_k||^2 / denom), held as their exponents
    so that far samples keep an ordering after exp underflows. g floors at the smallest
    positive normal float, so it stays in (0, 1]; route on log_g.
    """
    log_g: np.ndarray
    denom: float = MEMBERSHIP_DENOM

    @property
    def g(self) -> np.ndarray:
        return np.maximum(np.exp(self.log_g), np.finfo(float).tiny)

    @property
    def center_count(self) -> int:
        return self.log_g.shape[0]


def fuzzy_membership(features: np.ndarray, center_points: np.ndarray, denom: float = MEMBERSHIP_DENOM) -> MembershipMatrix:
    features = np.atleast_2d(np.asarray(features, dtype=float))
    center_points = np.atleast_2d(np.asarray(center_points, dtype=float))
    if center_points.shape[0] == 0:
        raise ClusteringError("membership needs at least one center")
    if not denom > 0:
        raise ClusteringError(f"membership denominator must be > 0, got {denom}")
    if features.shape[1] != center_points.shape[1]:
        raise ShapeError(f"features have {features.shape[1]} columns, centers {center_points.shape[1]}")
    sq = cdist(center_points, features, metric="sqeuclidean")
    return MembershipMatrix(log_g=-sq / denom, denom=denom)


def route(membership: MembershipMatrix) -> np.ndarray:
    """Subnet per sample: argmax over centers, ties to the lowest center index."""
    if membership.center_count < 1:
        raise ClusteringError("routing needs at least one center")
    return np.argmax(membership.log_g, axis=0)


def surviving_centers(routes: np.ndarray, center_count: int) -> np.ndarray:
    """Center indices that attract at least one sample, in original order."""
    counts = np.bincount(routes, minlength=center_count)
    survivors = np.flatnonzero(counts > 0)
    if survivors.size < center_count:
        logger.info("Dropping %d empty subnet(s)", center_count - survivors.size)
    return survivors
