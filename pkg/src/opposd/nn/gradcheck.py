"""
opposd.nn.gradcheck — Central finite-difference gradient verification.

The relative error is the largest absolute difference between analytic and
numerical gradients divided by the largest gradient magnitude, so tiny
components do not dominate the report.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from opposd.nn.mlp import DenseMatrix, MlpParams

LossFn = Callable[[MlpParams], tuple[float, list[DenseMatrix]]]


@dataclass
class GradCheckReport:
    max_rel_error: float
    max_abs_error: float
    n_params: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.max_rel_error <= self.tolerance)


def numerical_gradient(
    fn: Callable[[np.ndarray], float],
    x: np.ndarray,
    step: float = 1e-5,
) -> np.ndarray:
    """Central differences of a scalar function of a flat vector."""
    x = np.array(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for i in range(x.size):
        orig = x[i]
        x[i] = orig + step
        up = fn(x)
        x[i] = orig - step
        down = fn(x)
        x[i] = orig
        grad[i] = (up - down) / (2.0 * step)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> tuple[float, float]:
    diff = float(np.max(np.abs(analytic - numeric), initial=0.0))
    scale = max(float(np.max(np.abs(analytic), initial=0.0)),
                float(np.max(np.abs(numeric), initial=0.0)), 1e-12)
    return diff / scale, diff


def gradient_check(
    model: MlpParams,
    loss_fn: LossFn,
    tolerance: float = 1e-4,
    step: float = 1e-5,
) -> GradCheckReport:
    """Compare ``loss_fn``'s analytic gradient with central differences.

    ``model`` is restored to its original parameters before returning.
    """
    original = model.flat()
    _, grads = loss_fn(model)
    analytic = np.concatenate([g.ravel() for g in grads])

    def scalar(flat: np.ndarray) -> float:
        model.set_flat(flat)
        loss, _ = loss_fn(model)
        return float(loss)

    try:
        numeric = numerical_gradient(scalar, original, step)
    finally:
        model.set_flat(original)

    rel, diff = relative_error(analytic, numeric)
    return GradCheckReport(
        max_rel_error=rel,
        max_abs_error=diff,
        n_params=original.size,
        tolerance=tolerance,
    )
