"""Adam with bias-corrected moments, written as a pure function over parameter lists."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from config import ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON
from errors import ConfigError, ShapeError


@dataclass(eq=False)
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0

    @classmethod
    def zeros(cls, params: list[np.ndarray]) -> "AdamState":
        return cls(m=[np.zeros_like(p) for p in params], v=[np.zeros_like(p) for p in params], t=0)


def adam_step(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = ADAM_BETA1,
    beta2: float = ADAM_BETA2,
    eps: float = ADAM_EPSILON,
    t: Optional[int] = None,
) -> tuple[list[np.ndarray], AdamState]:
    """Returns new parameters and state; t defaults to state.t + 1."""
    t = state.t + 1 if t is None else t
    if t < 1:
        raise ConfigError(f"Adam step counter must be >= 1, got {t}", "t")
    if len(params) != len(grads) or any(p.shape != g.shape for p, g in zip(params, grads)):
        raise ShapeError("parameter and gradient shapes differ")

    bc1 = 1.0 - beta1 ** t
    bc2 = 1.0 - beta2 ** t
    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * (g * g)
        new_params.append(p - lr * (m / bc1) / (np.sqrt(v / bc2) + eps))
        new_m.append(m)
        new_v.append(v)
    return new_params, AdamState(m=new_m, v=new_v, t=t)
