"""
opposd.ratio.kernel — RBF kernel and bandwidth selection.

    k(x, y) = exp(-||x - y||^2 / (2 h^2))

The median heuristic takes the median of the positive pairwise distances
of (a subsample of) the normalized states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist

from opposd.errors import ConfigError

BANDWIDTH_MODES = ("median", "fixed")
MEDIAN_SUBSAMPLE = 1000


@dataclass
class KernelConfig:
    bandwidth: float = 1.0
    bandwidth_mode: str = "median"
    kind: str = "rbf"

    def __post_init__(self) -> None:
        if self.kind != "rbf":
            raise ConfigError(f"unsupported kernel '{self.kind}'", field="ratio.kernel")
        if self.bandwidth_mode not in BANDWIDTH_MODES:
            raise ConfigError(
                f"'{self.bandwidth_mode}' is not one of {BANDWIDTH_MODES}",
                field="ratio.bandwidth_mode",
            )
        if not np.isfinite(self.bandwidth) or self.bandwidth <= 0.0:
            raise ConfigError(f"must be finite and > 0, got {self.bandwidth}",
                              field="ratio.bandwidth")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "bandwidth": self.bandwidth,
                "bandwidth_mode": self.bandwidth_mode}


def rbf_kernel(x: np.ndarray, y: np.ndarray, bandwidth: float) -> float:
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError(f"Kernel arguments differ in dimension: {x.shape} vs {y.shape}")
    return float(np.exp(-np.sum((x - y) ** 2) / (2.0 * bandwidth ** 2)))


def kernel_matrix(x: np.ndarray, y: np.ndarray, bandwidth: float) -> np.ndarray:
    """K[i, j] = k(x_i, y_j)."""
    return np.exp(-0.5 * cdist(x, y, "sqeuclidean") / bandwidth ** 2)


def median_bandwidth(
    states: np.ndarray,
    rng: np.random.Generator | None = None,
    max_points: int = MEDIAN_SUBSAMPLE,
) -> float:
    """Median positive pairwise distance; 1.0 if every point coincides."""
    x = np.asarray(states, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 2:
        raise ValueError("median_bandwidth needs at least 2 points")
    if x.shape[0] > max_points:
        rng = rng or np.random.default_rng(0)
        x = x[rng.choice(x.shape[0], size=max_points, replace=False)]
    dists = pdist(x, "euclidean")
    dists = dists[dists > 0.0]
    if dists.size == 0:
        return 1.0
    return float(np.median(dists))
