"""
Adaptive modular neural network: cluster the training set by density peaks, route each
sample to the subnet of its nearest center, and train one network per routed subset.
"""

import logging
from dataclasses import dataclass, replace
from typing import Callable, Optional, Union

import numpy as np

from clustering.density_peak import CenterPolicy, ClusterModel, fit_density_peaks
from clustering.gating import fuzzy_membership, route, surviving_centers
from config import CENTER_THRESHOLD, CUTOFF_PERCENT, MEMBERSHIP_DENOM
from data.datasets import Dataset
from errors import ConfigError, ShapeError
from network.classic import train_classic
from network.mlp import Mlp, predict_mlp

logger = logging.getLogger(__name__)

Trainer = Callable[..., Mlp]


@dataclass(frozen=True)
class ClusteringConfig:
    policy: str = "auto"
    centers: Optional[int] = None
    threshold: float = CENTER_THRESHOLD
    denom: float = MEMBERSHIP_DENOM
    cutoff_percent: int = CUTOFF_PERCENT

    def __post_init__(self):
        if self.policy not in ("auto", "fixed"):
            raise ConfigError(f"must be 'auto' or 'fixed', got {self.policy!r}", "policy")
        if self.policy == "fixed" and (self.centers is None or self.centers < 1):
            raise ConfigError("fixed policy needs centers >= 1", "centers")
        if not self.denom > 0:
            raise ConfigError(f"must be > 0, got {self.denom}", "denom")
        if not 0 < self.cutoff_percent < 100:
            raise ConfigError(f"must lie in (0, 100), got {self.cutoff_percent}", "cutoff_percent")

    def center_policy(self) -> CenterPolicy:
        return CenterPolicy(kind=self.policy, count=self.centers, threshold=self.threshold)


@dataclass(eq=False)
class AmnnModel:
    """center_points[k] is the center that routes to subnets[k]."""
    center_points: np.ndarray
    denom: float
    subnets: list[Mlp]
    cluster_model: Optional[ClusterModel] = None

    def __post_init__(self):
        if len(self.subnets) < 1 or len(self.subnets) != self.center_points.shape[0]:
            raise ShapeError(f"{self.center_points.shape[0]} centers for {len(self.subnets)} subnets")

    @property
    def input_size(self) -> int:
        return self.center_points.shape[1]

    def route(self, features: np.ndarray) -> np.ndarray:
        return route(fuzzy_membership(features, self.center_points, self.denom))


def train_amnn(
    dataset: Dataset,
    clustering: ClusteringConfig,
    layer_sizes: list[int],
    config,
    trainer: Trainer = train_classic,
) -> AmnnModel:
    """
    Subnet k trains on its routed subset with seed config.seed + k. Centers that attract
    no training sample are dropped and routing is recomputed over the survivors.
    """
    cluster_model, _, _ = fit_density_peaks(dataset.features, clustering.center_policy(), clustering.cutoff_percent)
    center_points = dataset.features[cluster_model.centers]

    routes = route(fuzzy_membership(dataset.features, center_points, clustering.denom))
    survivors = surviving_centers(routes, center_points.shape[0])
    if survivors.size < center_points.shape[0]:
        center_points = center_points[survivors]
        routes = route(fuzzy_membership(dataset.features, center_points, clustering.denom))

    subnets = []
    for k in range(center_points.shape[0]):
        subset = dataset.subset(np.flatnonzero(routes == k))
        logger.info("Subnet %d: %d samples", k, subset.size)
        subnets.append(trainer(subset, layer_sizes, replace(config, seed=config.seed + k)))
    return AmnnModel(center_points=center_points, denom=clustering.denom, subnets=subnets, cluster_model=cluster_model)


def predict(model: Union[AmnnModel, Mlp], features: np.ndarray) -> np.ndarray:
    """Class ids: plain argmax for an Mlp; route-then-argmax for an AMNN."""
    features = np.atleast_2d(np.asarray(features, dtype=float))
    if isinstance(model, Mlp):
        return predict_mlp(model, features)
    if features.shape[1] != model.input_size:
        raise ShapeError(f"features have {features.shape[1]} columns, model expects {model.input_size}")
    routes = model.route(features)
    out = np.zeros(features.shape[0], dtype=np.int64)
    for k, subnet in enumerate(model.subnets):
        rows = np.flatnonzero(routes == k)
        if rows.size:
            out[rows] = predict_mlp(subnet, features[rows])
    return out
