"""
Multilayer perceptron with an explicit forward pass and hand-derived backpropagation.

Classic mode (logistic units, squared error W = 1/2 sum (v - v_bar)^2) follows the
textbook BP rules: the output error signal is eps_t = (v_bar - v) * v_bar * (1 - v_bar),
the hidden signal is (eps @ lambda^T) * P * (1 - P), and every weight moves by
-zeta * (signal x input). Biases are weights on a constant-1 input.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import expit, softmax

from errors import ShapeError, TrainingError

HIDDEN_ACTIVATIONS = ("logistic", "elu")
OUTPUT_ACTIVATIONS = ("logistic", "softmax")


@dataclass(eq=False)
class Mlp:
    """weights[l] has shape (layer_sizes[l], layer_sizes[l + 1]); the last pair is the output layer."""
    layer_sizes: list[int]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    hidden_activation: str = "logistic"
    output_activation: str = "logistic"

    def __post_init__(self):
        if self.hidden_activation not in HIDDEN_ACTIVATIONS:
            raise ShapeError(f"unknown hidden activation {self.hidden_activation!r}")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ShapeError(f"unknown output activation {self.output_activation!r}")
        if len(self.weights) != len(self.layer_sizes) - 1 or len(self.biases) != len(self.weights):
            raise ShapeError("weights/biases do not match layer_sizes")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            expected = (self.layer_sizes[l], self.layer_sizes[l + 1])
            if w.shape != expected or b.shape != (expected[1],):
                raise ShapeError(f"layer {l}: weight {w.shape}, bias {b.shape}, expected {expected}")

    @property
    def input_size(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_size(self) -> int:
        return self.layer_sizes[-1]

    def params(self) -> list[np.ndarray]:
        """Parameter arrays in update order: W0, b0, W1, b1, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def set_params(self, params: list[np.ndarray]) -> None:
        self.weights = list(params[0::2])
        self.biases = list(params[1::2])


@dataclass(eq=False)
class ForwardCache:
    """pre_activations[l] and activations[l] belong to layer l + 1; activations[-1] is the output."""
    inputs: np.ndarray
    pre_activations: list[np.ndarray] = field(default_factory=list)
    activations: list[np.ndarray] = field(default_factory=list)


def init_weights(
    layer_sizes: list[int],
    seed: int,
    hidden_activation: str = "logistic",
    output_activation: str = "logistic",
) -> Mlp:
    """Uniform fan-based weights in +-sqrt(6 / (fan_in + fan_out)), zero biases."""
    sizes = [int(s) for s in layer_sizes]
    if len(sizes) < 2 or min(sizes) < 1:
        raise ShapeError(f"need at least 2 layers of size >= 1, got {layer_sizes}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return Mlp(sizes, weights, biases, hidden_activation, output_activation)


def _elu(z: np.ndarray) -> np.ndarray:
    return np.where(z > 0, z, np.expm1(np.minimum(z, 0.0)))


def _hidden(z: np.ndarray, kind: str) -> np.ndarray:
    return expit(z) if kind == "logistic" else _elu(z)


def _hidden_derivative(z: np.ndarray, a: np.ndarray, kind: str) -> np.ndarray:
    if kind == "logistic":
        return a * (1.0 - a)
    return np.where(z > 0, 1.0, a + 1.0)


def forward(net: Mlp, batch: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    x = np.atleast_2d(np.asarray(batch, dtype=float))
    if x.shape[1] != net.input_size:
        raise ShapeError(f"batch has {x.shape[1]} features, network expects {net.input_size}")
    cache = ForwardCache(inputs=x)
    a = x
    last = len(net.weights) - 1
    for l, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w + b
        if l < last:
            a = _hidden(z, net.hidden_activation)
        elif net.output_activation == "softmax":
            a = softmax(z, axis=1)
        else:
            a = expit(z)
        cache.pre_activations.append(z)
        cache.activations.append(a)
    return a, cache


def backward(net: Mlp, cache: ForwardCache, output_delta: np.ndarray) -> list[np.ndarray]:
    """
    Gradients for W0, b0, W1, b1, ... given dLoss/d(output pre-activation).
    Any batch averaging must already be folded into output_delta.
    """
    grads: list[np.ndarray] = [None] * (2 * len(net.weights))
    delta = output_delta
    for l in range(len(net.weights) - 1, -1, -1):
        inputs = cache.inputs if l == 0 else cache.activations[l - 1]
        grads[2 * l] = inputs.T @ delta
        grads[2 * l + 1] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ net.weights[l].T) * _hidden_derivative(
                cache.pre_activations[l - 1], cache.activations[l - 1], net.hidden_activation
            )
    return grads


def squared_error(expected, actual) -> np.ndarray:
    """W = 1/2 sum (v - v_bar)^2 over the last axis (a scalar for vectors, one value per row for batches)."""
    v = np.asarray(expected, dtype=float)
    v_bar = np.asarray(actual, dtype=float)
    if v.shape != v_bar.shape:
        raise ShapeError(f"expected shape {v.shape} differs from actual {v_bar.shape}")
    return 0.5 * np.square(v - v_bar).sum(axis=-1)


def squared_error_gradients(net: Mlp, batch: np.ndarray, targets: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """Per-sample W and the gradient of the batch-mean W (logistic output layer)."""
    if net.output_activation != "logistic":
        raise ShapeError("classic backprop needs a logistic output layer")
    outputs, cache = forward(net, batch)
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    losses = squared_error(targets, outputs)
    eps = (outputs - targets) * outputs * (1.0 - outputs) / outputs.shape[0]
    return losses, backward(net, cache, eps)


def apply_update(net: Mlp, grads: list[np.ndarray], learning_rate: float) -> Mlp:
    net.set_params([p - learning_rate * g for p, g in zip(net.params(), grads)])
    return net


def check_finite(grads: list[np.ndarray], epoch: Optional[int] = None, batch: Optional[int] = None) -> None:
    if not all(np.all(np.isfinite(g)) for g in grads):
        raise TrainingError("non-finite gradient", epoch=epoch, batch=batch)


def backprop_step(
    net: Mlp,
    batch: np.ndarray,
    targets: np.ndarray,
    learning_rate: float,
    epoch: Optional[int] = None,
    batch_index: Optional[int] = None,
) -> Mlp:
    """One gradient-descent update of every weight and bias on the batch-mean squared error."""
    if np.atleast_2d(batch).shape[0] == 0:
        raise ShapeError("backprop needs a nonempty batch")
    _, grads = squared_error_gradients(net, batch, targets)
    check_finite(grads, epoch, batch_index)
    return apply_update(net, grads, learning_rate)


def predict_mlp(net: Mlp, features: np.ndarray) -> np.ndarray:
    """Argmax of the output layer; ties resolve to the lowest class id."""
    outputs, _ = forward(net, features)
    return np.argmax(outputs, axis=1)
