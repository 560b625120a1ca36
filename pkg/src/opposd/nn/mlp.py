"""
opposd.nn.mlp — Fixed-depth dense feedforward networks.

    x -> [W0 x + b0 -> ReLU] -> ... -> W_L h + b_L -> head

Weights are stored (fan_in, fan_out) so a batch (B, fan_in) multiplies
from the left. Hidden activation is always ReLU; the output head is one
of linear, softmax or softplus.

Parameters are exposed as an ordered list of named matrices
(W0, b0, W1, b1, ...) which the optimizer, the gradient checker and the
checkpoint format all share.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from opposd.errors import OpposdError
from opposd.nn.functional import HEADS, apply_head, head_backward, relu, relu_grad

# 2-D float64 array in C (row-major) order.
DenseMatrix = NDArray[np.float64]


class ShapeError(OpposdError):
    """Input or gradient shape does not match the network."""
    pass


@dataclass
class MlpParams:
    """Weights and biases of one network.

    Attributes:
        layer_sizes: (input, hidden..., output)
        weights: one (fan_in, fan_out) matrix per layer
        biases: one (1, fan_out) row per layer
        head: output transform (linear, softmax, softplus)
    """
    layer_sizes: list[int]
    weights: list[DenseMatrix] = field(default_factory=list)
    biases: list[DenseMatrix] = field(default_factory=list)
    head: str = "linear"

    def __post_init__(self) -> None:
        if self.head not in HEADS:
            raise ShapeError(f"Unknown head '{self.head}', expected one of {HEADS}")
        if len(self.layer_sizes) < 2:
            raise ShapeError("layer_sizes needs at least input and output sizes")
        n_layers = len(self.layer_sizes) - 1
        if len(self.weights) != n_layers or len(self.biases) != n_layers:
            raise ShapeError(
                f"Expected {n_layers} weight/bias pairs, got "
                f"{len(self.weights)}/{len(self.biases)}"
            )
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            fan_in, fan_out = self.layer_sizes[i], self.layer_sizes[i + 1]
            if w.shape != (fan_in, fan_out) or b.shape != (1, fan_out):
                raise ShapeError(
                    f"Layer {i}: expected W {(fan_in, fan_out)} and b {(1, fan_out)}, "
                    f"got {w.shape} and {b.shape}"
                )

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.layer_sizes[-1]

    def arrays(self) -> list[DenseMatrix]:
        """Parameters in canonical order (W0, b0, W1, b1, ...)."""
        out: list[DenseMatrix] = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def names(self) -> list[str]:
        out: list[str] = []
        for i in range(len(self.weights)):
            out.extend((f"W{i}", f"b{i}"))
        return out

    @property
    def n_params(self) -> int:
        return sum(a.size for a in self.arrays())

    def flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays()])

    def set_flat(self, vector: np.ndarray) -> None:
        """Overwrite all parameters in place from a flat vector."""
        if vector.shape != (self.n_params,):
            raise ShapeError(f"Expected flat vector of {self.n_params}, got {vector.shape}")
        offset = 0
        for a in self.arrays():
            a[...] = vector[offset:offset + a.size].reshape(a.shape)
            offset += a.size

    def copy(self) -> MlpParams:
        return copy.deepcopy(self)


def init_mlp(
    layer_sizes: list[int],
    head: str,
    rng: np.random.Generator,
) -> MlpParams:
    """He-normal hidden layers, 1/fan_in output layer, zero biases."""
    sizes = [int(s) for s in layer_sizes]
    weights: list[DenseMatrix] = []
    biases: list[DenseMatrix] = []
    n_layers = len(sizes) - 1
    for i in range(n_layers):
        fan_in, fan_out = sizes[i], sizes[i + 1]
        gain = 1.0 if i == n_layers - 1 else 2.0
        weights.append(rng.normal(0.0, np.sqrt(gain / fan_in), size=(fan_in, fan_out)))
        biases.append(np.zeros((1, fan_out)))
    return MlpParams(layer_sizes=sizes, weights=weights, biases=biases, head=head)


def zeros_like_params(params: MlpParams) -> list[DenseMatrix]:
    return [np.zeros_like(a) for a in params.arrays()]


def _check_inputs(params: MlpParams, inputs: np.ndarray) -> np.ndarray:
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != params.n_inputs:
        raise ShapeError(
            f"Input dimension mismatch: network expects {params.n_inputs}, "
            f"got shape {np.shape(inputs)}"
        )
    return x


def _forward(params: MlpParams, x: np.ndarray):
    """Forward pass keeping every pre-activation for backprop."""
    acts = [x]
    pre: list[np.ndarray] = []
    h = x
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ w + b
        pre.append(z)
        h = z if i == last else relu(z)
        if i != last:
            acts.append(h)
    out = apply_head(params.head, pre[-1])
    return out, pre, acts


def mlp_forward(params: MlpParams, inputs: np.ndarray) -> np.ndarray:
    """Batch forward pass, shape (B, layer_sizes[-1])."""
    x = _check_inputs(params, inputs)
    out, _, _ = _forward(params, x)
    return out


def mlp_logits(params: MlpParams, inputs: np.ndarray) -> np.ndarray:
    """Pre-head outputs (logits for a softmax head)."""
    x = _check_inputs(params, inputs)
    _, pre, _ = _forward(params, x)
    return pre[-1]


def mlp_backward(
    params: MlpParams,
    inputs: np.ndarray,
    upstream: np.ndarray,
    through_head: bool = True,
) -> tuple[list[DenseMatrix], np.ndarray]:
    """Gradients of the scalar loss sum(upstream * output).

    Args:
        params: network
        inputs: batch (B, n_inputs)
        upstream: dLoss/d(output), shape (B, n_outputs)
        through_head: if False, ``upstream`` is taken w.r.t. the pre-head
            values (e.g. softmax logits) and the head is skipped.

    Returns:
        (parameter gradients in ``params.arrays()`` order, input gradients)
    """
    x = _check_inputs(params, inputs)
    g = np.asarray(upstream, dtype=np.float64)
    if g.ndim == 1 and params.n_outputs == 1:
        g = g[:, None]
    if g.shape != (x.shape[0], params.n_outputs):
        raise ShapeError(
            f"Upstream gradient shape {g.shape} does not match output "
            f"{(x.shape[0], params.n_outputs)}"
        )

    out, pre, acts = _forward(params, x)
    dz = head_backward(params.head, pre[-1], out, g) if through_head else g

    n_layers = len(params.weights)
    grads: list[DenseMatrix] = [np.empty(0)] * (2 * n_layers)
    for i in range(n_layers - 1, -1, -1):
        grads[2 * i] = acts[i].T @ dz
        grads[2 * i + 1] = dz.sum(axis=0, keepdims=True)
        dh = dz @ params.weights[i].T
        if i > 0:
            dz = dh * relu_grad(pre[i - 1])
    return grads, dh
