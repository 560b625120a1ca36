r"""
opposd.mdp.hard_example — Five-state MDP where Off-PAC fails.

    s0 --l--> s1 --l--> s3 (reward 1) --> T
       \            \-r-> 1/2 s3, 1/2 s4
        \-r-> s2 --l--> s4 (reward 0) --> T
                    \-r-> 1/2 s3, 1/2 s4

Actions: 0 = l(eft), 1 = r(ight). gamma = 1, horizon 4, start in s0.
T is absorbing with zero reward.

The policy family pi_alpha picks l with probability 1 at s0 and plays
(l: alpha, r: 1 - alpha) at the aliased pair {s1, s2}. The behavior is
uniform. Under Off-PAC the gradient in alpha is zero (s1 and s2 are equally
visited under mu), while the true gradient is positive: pi_alpha only ever
reaches s1, where l is strictly better.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from opposd.mdp.tabular import MdpError, PolicyTable, TabularMdp

S0, S1, S2, S3, S4, TERMINAL = range(6)
LEFT, RIGHT = 0, 1
STATE_NAMES = ("s0", "s1", "s2", "s3", "s4", "T")
HORIZON = 4


def hard_example_mdp() -> TabularMdp:
    p = np.zeros((6, 2, 6))
    p[S0, LEFT, S1] = 1.0
    p[S0, RIGHT, S2] = 1.0
    p[S1, LEFT, S3] = 1.0
    p[S1, RIGHT, [S3, S4]] = 0.5
    p[S2, LEFT, S4] = 1.0
    p[S2, RIGHT, [S3, S4]] = 0.5
    p[[S3, S4, TERMINAL], :, TERMINAL] = 1.0
    r = np.zeros((6, 2))
    r[S3, :] = 1.0
    p0 = np.zeros(6)
    p0[S0] = 1.0
    return TabularMdp(p, r, gamma=1.0, initial_dist=p0, horizon=HORIZON)


def alpha_policy(alpha: float) -> PolicyTable:
    """pi_alpha: l everywhere except the aliased pair, which plays (alpha, 1-alpha)."""
    if not 0.0 <= alpha <= 1.0:
        raise MdpError(f"alpha must be in [0, 1], got {alpha}")
    probs = np.zeros((6, 2))
    probs[:, LEFT] = 1.0
    probs[[S1, S2], LEFT] = alpha
    probs[[S1, S2], RIGHT] = 1.0 - alpha
    return PolicyTable(probs)


def uniform_behavior() -> PolicyTable:
    return PolicyTable.uniform(6, 2)


def aliased_features() -> np.ndarray:
    """(6, 4) projection merging s1/s2 and s3/s4."""
    phi = np.zeros((6, 4))
    phi[S0, 0] = 1.0
    phi[[S1, S2], 1] = 1.0
    phi[[S3, S4], 2] = 1.0
    phi[TERMINAL, 3] = 1.0
    return phi


@dataclass
class HardExampleAlphaFamily:
    """One-parameter family theta = (alpha,) for the exact gradient oracles."""
    n_params: int = field(default=1, init=False)

    def policy(self, theta: np.ndarray) -> PolicyTable:
        return alpha_policy(float(np.asarray(theta).ravel()[0]))

    def jacobian(self, theta: np.ndarray) -> np.ndarray:
        jac = np.zeros((6, 2, 1))
        jac[[S1, S2], LEFT, 0] = 1.0
        jac[[S1, S2], RIGHT, 0] = -1.0
        return jac


@dataclass
class HardExample:
    """Bundle of the MDP, its behavior and the alpha family."""
    mdp: TabularMdp = field(default_factory=hard_example_mdp)
    behavior: PolicyTable = field(default_factory=uniform_behavior)
    family: HardExampleAlphaFamily = field(default_factory=HardExampleAlphaFamily)

    def policy(self, alpha: float) -> PolicyTable:
        return alpha_policy(alpha)
