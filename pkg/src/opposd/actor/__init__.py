"""opposd.actor — Softmax actor, corrected policy gradient, behavior cloning."""

from opposd.actor.cloning import behavior_clone, cloning_loss
from opposd.actor.gradient import ActorGradient, actor_gradient, offpac_actor_gradient
from opposd.actor.model import ActorModel, load_actor_model, save_actor_model

__all__ = [
    "behavior_clone", "cloning_loss",
    "ActorGradient", "actor_gradient", "offpac_actor_gradient",
    "ActorModel", "load_actor_model", "save_actor_model",
]
