"""opposd.mdp — Environments, tabular MDPs and exact oracles."""

from opposd.mdp.augmented import build_augmented_mdp, extend_policy, support_set
from opposd.mdp.cartpole import (
    CartPoleConfig, CartPoleEnv, CartPoleState,
    cartpole_reset, cartpole_reset_one, cartpole_step, cartpole_step_one,
)
from opposd.mdp.env import (
    Env, Policy, TabularEnv, TabularPolicy, UniformPolicy,
    one_hot, rollout_returns, sample_actions,
)
from opposd.mdp.families import (
    FeatureSoftmaxFamily, PolicyFamily, TabularSoftmaxFamily,
    exact_policy_gradient, normalized_return, offpac_gradient_exact,
)
from opposd.mdp.hard_example import HardExample, HardExampleAlphaFamily, alpha_policy
from opposd.mdp.registry import list_envs, make_env, register_env, reset_registry
from opposd.mdp.tabular import (
    MdpError, PolicyTable, TabularMdp,
    discount_mass, exact_occupancy, exact_return, exact_value,
    load_mdp, random_policy_table, random_tabular_mdp, save_mdp,
)

__all__ = [
    "build_augmented_mdp", "extend_policy", "support_set",
    "CartPoleConfig", "CartPoleEnv", "CartPoleState",
    "cartpole_reset", "cartpole_reset_one", "cartpole_step", "cartpole_step_one",
    "Env", "Policy", "TabularEnv", "TabularPolicy", "UniformPolicy",
    "one_hot", "rollout_returns", "sample_actions",
    "FeatureSoftmaxFamily", "PolicyFamily", "TabularSoftmaxFamily",
    "exact_policy_gradient", "normalized_return", "offpac_gradient_exact",
    "HardExample", "HardExampleAlphaFamily", "alpha_policy",
    "list_envs", "make_env", "register_env", "reset_registry",
    "MdpError", "PolicyTable", "TabularMdp",
    "discount_mass", "exact_occupancy", "exact_return", "exact_value",
    "load_mdp", "random_policy_table", "random_tabular_mdp", "save_mdp",
]
