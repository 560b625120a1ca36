"""opposd.data — Logged datasets, smoothing and mini-batch sampling."""

from opposd.data.collect import collect_dataset
from opposd.data.dataset import (
    Dataset, DatasetError, NormalizationStats, Transition, TransitionBatch,
    compute_normalization,
)
from opposd.data.io import (
    DatasetParseError, UnsupportedVersionError, load_dataset, save_dataset,
)
from opposd.data.propensity import importance_ratios, target_probs
from opposd.data.sampler import DiscountedSampler, sample_minibatch_dgamma, uniform_sampler
from opposd.data.smoothing import DEFAULT_EPSILON, epsilon_smooth

__all__ = [
    "collect_dataset",
    "Dataset", "DatasetError", "NormalizationStats", "Transition", "TransitionBatch",
    "compute_normalization",
    "DatasetParseError", "UnsupportedVersionError", "load_dataset", "save_dataset",
    "importance_ratios", "target_probs",
    "DiscountedSampler", "sample_minibatch_dgamma", "uniform_sampler",
    "DEFAULT_EPSILON", "epsilon_smooth",
]
