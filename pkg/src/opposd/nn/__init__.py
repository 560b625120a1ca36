"""opposd.nn — Dense networks, Adam and gradient checking."""

from opposd.nn.adam import AdamState, adam_step
from opposd.nn.checkpoint import CheckpointError, load_params, save_params
from opposd.nn.functional import entropy_of_policy, log_softmax, softmax, softplus
from opposd.nn.gradcheck import GradCheckReport, gradient_check
from opposd.nn.mlp import (
    DenseMatrix, MlpParams, ShapeError,
    init_mlp, mlp_backward, mlp_forward, mlp_logits,
)

__all__ = [
    "AdamState", "adam_step",
    "CheckpointError", "load_params", "save_params",
    "entropy_of_policy", "log_softmax", "softmax", "softplus",
    "GradCheckReport", "gradient_check",
    "DenseMatrix", "MlpParams", "ShapeError",
    "init_mlp", "mlp_backward", "mlp_forward", "mlp_logits",
]
