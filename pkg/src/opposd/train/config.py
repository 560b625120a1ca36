"""
opposd.train.config — Training hyper-parameters and variant dispatch.

Defaults are the cart-pole column of the experiment table: gamma 1,
lambda 0, entropy 0.01, all learning rates 1e-3, actor/critic batches 5000,
ratio batch 200, 10 critic and 50 ratio steps per actor update, ratio
weight decay 1e-5, 2000 cloning iterations and 500-step critic/ratio warm
starts.

Discount variants:

    average             gamma = 1 ratio loss, uniform step sampling
    discounted_w_only   discounted ratio loss on d_gamma batches,
                        actor batches uniform over steps
    discounted_full     discounted ratio loss, d_gamma batches for the
                        ratio and the actor
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from opposd.errors import ConfigError

logger = logging.getLogger(__name__)

ALGORITHMS = ("opposd", "offpac")
DISCOUNT_VARIANTS = ("average", "discounted_w_only", "discounted_full")


@dataclass
class TrainConfig:
    seed: int
    gamma: float = 1.0
    lam: float = 0.0
    entropy_coefficient: float = 0.01
    lr_actor: float = 1e-3
    lr_critic: float = 1e-3
    lr_ratio: float = 1e-3
    batch_actor: int = 5000
    batch_critic: int = 5000
    batch_ratio: int = 200
    n_critic: int = 10
    n_ratio: int = 50
    weight_decay_ratio: float = 1e-5
    bc_iterations: int = 2000
    warm_start_critic: int = 500
    warm_start_ratio: int = 500
    total_actor_updates: int = 10000
    checkpoint_interval: int = 100
    epsilon_smoothing: float = 0.0
    algorithm: str = "opposd"
    discount_variant: str = "average"
    actor_hidden: list[int] = field(default_factory=lambda: [32])
    critic_hidden: list[int] = field(default_factory=lambda: [32])
    ratio_hidden: list[int] = field(default_factory=lambda: [32])
    bandwidth_mode: str = "median"
    bandwidth: float = 1.0
    normalize_states: bool = True
    actor_projection: np.ndarray | None = None
    n_trajectories: int = 500
    mc_eval_interval: int = 0
    mc_eval_episodes: int = 20

    def __post_init__(self) -> None:
        def bad(name: str, message: str) -> ConfigError:
            return ConfigError(message, field=f"train.{name}")

        for name in ("lr_actor", "lr_critic", "lr_ratio"):
            if not getattr(self, name) > 0.0:
                raise bad(name, f"must be > 0, got {getattr(self, name)}")
        for name in ("batch_actor", "batch_critic", "batch_ratio", "checkpoint_interval",
                     "n_trajectories", "mc_eval_episodes"):
            if int(getattr(self, name)) < 1:
                raise bad(name, f"must be >= 1, got {getattr(self, name)}")
        for name in ("n_critic", "n_ratio", "bc_iterations", "warm_start_critic",
                     "warm_start_ratio", "total_actor_updates", "mc_eval_interval"):
            if int(getattr(self, name)) < 0:
                raise bad(name, f"must be >= 0, got {getattr(self, name)}")
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigError(f"must be in (0, 1], got {self.gamma}", field="train.gamma")
        if not 0.0 <= self.lam <= 1.0:
            raise bad("lam", f"must be in [0, 1], got {self.lam}")
        if self.entropy_coefficient < 0.0:
            raise bad("entropy_coefficient", "must be >= 0")
        if self.weight_decay_ratio < 0.0:
            raise bad("weight_decay_ratio", "must be >= 0")
        if not 0.0 <= self.epsilon_smoothing < 1.0:
            raise bad("epsilon_smoothing", f"must be in [0, 1), got {self.epsilon_smoothing}")
        if self.algorithm not in ALGORITHMS:
            raise bad("algorithm", f"'{self.algorithm}' is not one of {ALGORITHMS}")
        if self.discount_variant not in DISCOUNT_VARIANTS:
            raise bad("discount_variant",
                      f"'{self.discount_variant}' is not one of {DISCOUNT_VARIANTS}")
        if self.gamma == 1.0 and self.discount_variant != "average":
            raise bad("discount_variant", "gamma = 1 only supports the 'average' variant")

    def header(self) -> dict[str, object]:
        """Identifying fields for the metrics header."""
        return {
            "algorithm": self.algorithm,
            "discount_variant": self.discount_variant,
            "gamma": self.gamma,
            "lam": self.lam,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class VariantPlan:
    ratio_loss: str
    ratio_sampling_gamma: float
    actor_sampling_gamma: float


def discount_variant_dispatch(config: TrainConfig) -> VariantPlan:
    """Map the discount variant to ratio loss and sampling choices."""
    variant = config.discount_variant
    if variant == "average":
        if config.gamma < 1.0:
            logger.warning(
                "discount_variant=average with gamma=%s: the ratio targets the "
                "undiscounted distribution while the critic discounts", config.gamma,
            )
        return VariantPlan("average", 1.0, 1.0)
    if config.gamma >= 1.0:
        raise ConfigError("gamma = 1 only supports the 'average' variant",
                          field="train.discount_variant")
    if variant == "discounted_w_only":
        return VariantPlan("discounted", config.gamma, 1.0)
    return VariantPlan("discounted", config.gamma, config.gamma)
