"""opposd.ratio — Kernel estimation of the state-distribution ratio."""

from opposd.ratio.kernel import KernelConfig, kernel_matrix, median_bandwidth, rbf_kernel
from opposd.ratio.loss import RatioSide, average_loss, delta, discounted_loss, expected_residual
from opposd.ratio.model import (
    RatioBatch, RatioConfig, RatioModel,
    fit_ratio, load_ratio_model, make_ratio_batch,
    ratio_loss, ratio_loss_average, ratio_loss_discounted,
    ratio_update_step, save_ratio_model,
)
from opposd.ratio.oracle import CoverageError, TabularRatio, exact_ratio_tabular

__all__ = [
    "KernelConfig", "kernel_matrix", "median_bandwidth", "rbf_kernel",
    "RatioSide", "average_loss", "delta", "discounted_loss", "expected_residual",
    "RatioBatch", "RatioConfig", "RatioModel",
    "fit_ratio", "load_ratio_model", "make_ratio_batch",
    "ratio_loss", "ratio_loss_average", "ratio_loss_discounted",
    "ratio_update_step", "save_ratio_model",
    "CoverageError", "TabularRatio", "exact_ratio_tabular",
]
