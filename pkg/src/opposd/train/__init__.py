"""opposd.train — Training loop, configuration, checkpoints and metrics."""

from opposd.train.checkpoint import CheckpointRecord, CheckpointStore, TrainingState
from opposd.train.config import TrainConfig, VariantPlan, discount_variant_dispatch
from opposd.train.metrics import METRIC_COLUMNS, MetricsWriter, read_metrics
from opposd.train.loop import TrainError, TrainResult, prepare_dataset, train

__all__ = [
    "CheckpointRecord", "CheckpointStore", "TrainingState",
    "TrainConfig", "VariantPlan", "discount_variant_dispatch",
    "METRIC_COLUMNS", "MetricsWriter", "read_metrics",
    "TrainError", "TrainResult", "prepare_dataset", "train",
]
