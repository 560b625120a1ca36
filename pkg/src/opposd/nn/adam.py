"""
opposd.nn.adam — Adam with additive L2 weight decay.

    g <- g + weight_decay * theta
    m <- beta1 m + (1 - beta1) g
    v <- beta2 v + (1 - beta2) g^2
    theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)

The state lives next to the parameters it updates and is carried across
actor updates (ratio and critic optimizers are never reset).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from opposd.errors import NumericError
from opposd.nn.mlp import DenseMatrix, MlpParams, ShapeError


@dataclass
class AdamState:
    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps_stability: float = 1e-8
    weight_decay: float = 0.0
    step_count: int = 0
    first_moment: list[DenseMatrix] = field(default_factory=list)
    second_moment: list[DenseMatrix] = field(default_factory=list)

    @classmethod
    def for_params(cls, params: MlpParams, learning_rate: float,
                   weight_decay: float = 0.0) -> AdamState:
        return cls(
            learning_rate=learning_rate,
            weight_decay=weight_decay,
            first_moment=[np.zeros_like(a) for a in params.arrays()],
            second_moment=[np.zeros_like(a) for a in params.arrays()],
        )


def adam_step(
    state: AdamState,
    params: MlpParams,
    gradients: list[DenseMatrix],
) -> tuple[MlpParams, AdamState]:
    """Apply one Adam update in place and return (params, state)."""
    arrays = params.arrays()
    if len(gradients) != len(arrays):
        raise ShapeError(f"Expected {len(arrays)} gradient arrays, got {len(gradients)}")
    for name, g, a in zip(params.names(), gradients, arrays):
        if g.shape != a.shape:
            raise ShapeError(f"Gradient {name}: shape {g.shape} != parameter {a.shape}")
        if not np.all(np.isfinite(g)):
            raise NumericError(
                f"Non-finite gradient for {name} at Adam step {state.step_count + 1} "
                f"(max |g| over finite entries: "
                f"{np.max(np.abs(g[np.isfinite(g)]), initial=0.0):.3e})"
            )

    state.step_count += 1
    t = state.step_count
    bias1 = 1.0 - state.beta1 ** t
    bias2 = 1.0 - state.beta2 ** t
    for a, g, m, v in zip(arrays, gradients, state.first_moment, state.second_moment):
        if state.weight_decay:
            g = g + state.weight_decay * a
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        a -= state.learning_rate * (m / bias1) / (np.sqrt(v / bias2) + state.eps_stability)
    return params, state
