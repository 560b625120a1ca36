"""opposd.critic — Off-policy lambda-return critic."""

from opposd.critic.model import (
    CriticConfig, CriticModel,
    critic_loss, critic_update_round, load_critic_model, save_critic_model, warm_start_critic,
)
from opposd.critic.returns import RHO_CLIP, dataset_lambda_returns, lambda_returns, masked_q

__all__ = [
    "CriticConfig", "CriticModel",
    "critic_loss", "critic_update_round", "load_critic_model", "save_critic_model",
    "warm_start_critic",
    "RHO_CLIP", "dataset_lambda_returns", "lambda_returns", "masked_q",
]
