"""Multilayer perceptron with Hermite or sigmoid hidden units and explicit backpropagation"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import expit

from src.errors import ConfigError, NumericalFailure
from src.hermite.hermite import eval_basis, eval_derivative_basis

logger = logging.getLogger(__name__)

# Standard deviation of the Gaussian weight initialization
INIT_STD = 0.1

ActivationKind = Literal["hermite", "sigmoid"]


@dataclass(frozen=True)
class Activation:
    """Hidden-unit activation; hermite neuron j of a layer uses degree j mod (D+1)"""

    kind: ActivationKind = "hermite"
    max_degree: int = 5

    def __post_init__(self):
        if self.kind not in ("hermite", "sigmoid"):
            raise ConfigError(f"unknown activation {self.kind!r}")
        if self.max_degree < 0:
            raise ConfigError(f"hermite degree must be non-negative, got {self.max_degree}")

    def degrees(self, width: int) -> np.ndarray:
        return np.arange(width) % (self.max_degree + 1)


def activation_eval(
    descriptor: Activation, z: ArrayLike, degree: int = 0
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Activation value and derivative at z.

    Args:
        descriptor: Activation descriptor
        z: Pre-activation (scalar or array)
        degree: Hermite degree of the neuron, ignored for sigmoid

    Returns:
        (φ(z), φ'(z))
    """
    z = np.asarray(z, dtype=float)
    if descriptor.kind == "sigmoid":
        s = expit(z)
        return s, s * (1.0 - s)
    return eval_basis(degree, z)[degree], eval_derivative_basis(degree, z)[degree]


def layer_activation(descriptor: Activation, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Apply the activation to a (width, P) block of pre-activations, neuron by neuron"""
    if descriptor.kind == "sigmoid":
        return activation_eval(descriptor, z)
    width = z.shape[0]
    rows = np.arange(width)
    degrees = descriptor.degrees(width)
    D = int(degrees.max())
    values = eval_basis(D, z)[degrees, rows]
    derivs = eval_derivative_basis(D, z)[degrees, rows]
    return values, derivs


@dataclass
class NetworkParams:
    """Per-layer weights (out×in) and biases of an MLP mapping (x, y) to ψ̄"""

    weights: List[np.ndarray]
    biases: List[np.ndarray]
    activation: Activation = field(default_factory=Activation)
    seed: Optional[int] = None

    def __post_init__(self):
        if not self.weights or len(self.weights) != len(self.biases):
            raise ConfigError("network needs one bias vector per weight matrix")
        if self.weights[0].shape[1] != 2 or self.weights[-1].shape[0] != 1:
            raise ConfigError("network must map 2 inputs to 1 output")
        for layer, (w, b) in enumerate(zip(self.weights, self.biases)):
            if b.shape != (w.shape[0],):
                raise ConfigError(f"layer {layer}: bias shape {b.shape} for weights {w.shape}")
            if layer and w.shape[1] != self.weights[layer - 1].shape[0]:
                raise ConfigError(f"layer {layer} does not chain onto layer {layer - 1}")

    @property
    def sizes(self) -> List[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    def flatten(self) -> np.ndarray:
        return np.concatenate([np.concatenate([w.ravel(), b]) for w, b in zip(self.weights, self.biases)])

    def with_flat(self, vector: np.ndarray) -> "NetworkParams":
        """New parameters with the same layout, values taken from a flat vector"""
        weights, biases, start = [], [], 0
        for w, b in zip(self.weights, self.biases):
            weights.append(vector[start:start + w.size].reshape(w.shape).copy())
            start += w.size
            biases.append(vector[start:start + b.size].copy())
            start += b.size
        if start != vector.size:
            raise ConfigError(f"flat vector has {vector.size} entries, expected {start}")
        return NetworkParams(weights, biases, self.activation, self.seed)

    def copy(self) -> "NetworkParams":
        return self.with_flat(self.flatten())

    def rows(self) -> Iterable[Tuple[int, int, int, float]]:
        """(layer, row, col, value) records; biases use col = -1"""
        for layer, (w, b) in enumerate(zip(self.weights, self.biases)):
            for (row, col), value in np.ndenumerate(w):
                yield layer, row, col, float(value)
            for row, value in enumerate(b):
                yield layer, row, -1, float(value)


def params_from_rows(
    rows: Iterable[Tuple[int, int, int, float]],
    activation: Activation,
    seed: Optional[int] = None,
) -> NetworkParams:
    """Rebuild parameters from (layer, row, col, value) records"""
    records = [(int(l), int(r), int(c), float(v)) for l, r, c, v in rows]
    if not records:
        raise ConfigError("no parameter records")
    layers = max(r[0] for r in records) + 1
    weights, biases = [], []
    for layer in range(layers):
        entries = [r for r in records if r[0] == layer]
        out = max(r[1] for r in entries) + 1
        cols = max(r[2] for r in entries) + 1
        w, b = np.zeros((out, cols)), np.zeros(out)
        for _, row, col, value in entries:
            if col < 0:
                b[row] = value
            else:
                w[row, col] = value
        weights.append(w)
        biases.append(b)
    return NetworkParams(weights, biases, activation, seed)


def init_params(arch: Sequence[int], activation: Activation, seed: int) -> NetworkParams:
    """
    Gaussian weights (std 0.1) and zero biases, deterministic in the seed.

    Args:
        arch: Layer sizes, first 2 and last 1
        activation: Hidden-unit activation
        seed: RNG seed

    Returns:
        NetworkParams
    """
    arch = list(arch)
    if len(arch) < 2 or arch[0] != 2 or arch[-1] != 1 or min(arch) < 1:
        raise ConfigError(f"architecture must run from 2 inputs to 1 output, got {arch}")
    if seed < 0:
        raise ConfigError(f"seed must be non-negative, got {seed}")
    rng = np.random.default_rng(seed)
    weights = [rng.normal(0.0, INIT_STD, size=(n_out, n_in)) for n_in, n_out in zip(arch[:-1], arch[1:])]
    biases = [np.zeros(n_out) for n_out in arch[1:]]
    return NetworkParams(weights, biases, activation, seed)


@dataclass
class ForwardTrace:
    """Everything forward computed, kept for backpropagation"""

    inputs: np.ndarray
    pre_activations: List[np.ndarray]
    activations: List[np.ndarray]
    derivatives: List[np.ndarray]
    output: Union[float, np.ndarray]


@dataclass
class Gradients:
    weights: List[np.ndarray]
    biases: List[np.ndarray]

    def flatten(self) -> np.ndarray:
        return np.concatenate([np.concatenate([w.ravel(), b]) for w, b in zip(self.weights, self.biases)])


def forward(params: NetworkParams, point: ArrayLike) -> ForwardTrace:
    """
    Forward pass z_l = W_l·a_{l-1} + b_l, hidden a_l = φ(z_l), linear output.

    Args:
        params: Network parameters
        point: One (x, y) pair or a (P, 2) array of points

    Returns:
        ForwardTrace; output is a float for a single point, a (P,) array otherwise
    """
    points = np.asarray(point, dtype=float)
    single = points.ndim == 1
    a = np.atleast_2d(points).T
    inputs = a
    pre_activations, activations, derivatives = [], [], []
    last = len(params.weights) - 1
    for layer, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = w @ a + b[:, None]
        if layer < last:
            a, d = layer_activation(params.activation, z)
            derivatives.append(d)
        else:
            a = z
        if not np.all(np.isfinite(a)):
            raise NumericalFailure(f"non-finite activations in layer {layer}")
        pre_activations.append(z)
        activations.append(a)
    output = a[0]
    return ForwardTrace(
        inputs=inputs,
        pre_activations=pre_activations,
        activations=activations,
        derivatives=derivatives,
        output=float(output[0]) if single else output,
    )


def backpropagate(params: NetworkParams, trace: ForwardTrace, output_delta: ArrayLike) -> Gradients:
    """
    Chain rule from ∂loss/∂ψ̄ at every traced point down to every parameter.

    Args:
        params: Parameters the trace was computed with
        trace: Forward trace
        output_delta: ∂loss/∂ψ̄ per point

    Returns:
        Gradients summed over the traced points
    """
    if len(trace.pre_activations) != len(params.weights) or any(
        z.shape[0] != w.shape[0] for z, w in zip(trace.pre_activations, params.weights)
    ):
        raise ConfigError("forward trace does not match the network parameters")
    delta = np.asarray(output_delta, dtype=float).reshape(1, -1)
    if delta.shape[1] != trace.inputs.shape[1]:
        raise ConfigError(f"{delta.shape[1]} output deltas for {trace.inputs.shape[1]} traced points")

    layers = len(params.weights)
    grad_w: List[np.ndarray] = [None] * layers
    grad_b: List[np.ndarray] = [None] * layers
    for layer in reversed(range(layers)):
        previous = trace.inputs if layer == 0 else trace.activations[layer - 1]
        grad_w[layer] = delta @ previous.T
        grad_b[layer] = delta.sum(axis=1)
        if layer:
            delta = (params.weights[layer].T @ delta) * trace.derivatives[layer - 1]
    return Gradients(grad_w, grad_b)


def backward(params: NetworkParams, trace: ForwardTrace, target: ArrayLike) -> Gradients:
    """
    Gradients of the mean squared error between ψ and ψ̄ over the traced points.

    The output delta is -2(ψ - ψ̄)/P, so w ← w - λ∇ descends; a single point
    gives the gradient of (ψ - ψ̄)².
    """
    predicted = np.atleast_1d(np.asarray(trace.output, dtype=float))
    target = np.broadcast_to(np.asarray(target, dtype=float), predicted.shape)
    return backpropagate(params, trace, -2.0 * (target - predicted) / predicted.size)


@dataclass
class NetworkModel:
    """Network wrapped as a vectorized field ψ̄(x, y)"""

    params: NetworkParams

    def __call__(self, x: ArrayLike, y: ArrayLike) -> np.ndarray:
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        points = np.column_stack([x.ravel(), y.ravel()])
        return np.asarray(forward(self.params, points).output).reshape(x.shape)
