"""
opposd.mdp.tabular — Tabular MDPs and their exact oracles.

    TabularMdp      (P, r, gamma, p0, horizon)
    PolicyTable     pi[s][a]
    exact_value     V, Q by linear solve (gamma < 1) or absorbing-chain
                    solve (gamma = 1)
    exact_occupancy normalized discounted occupancy by truncated power
                    iteration

Returns are un-normalized discounted sums unless ``normalize=True``, which
divides by the discount mass sum_{t<T} gamma^t.

JSON form (dense arrays)::

    {"transition": [[[...]]], "reward": [[...]], "gamma": 0.9,
     "initial_dist": [...], "horizon": 200, "behavior": [[...]]}

``behavior`` is optional and only read by the tabular environment.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from opposd.errors import OpposdError

logger = logging.getLogger(__name__)

ROW_TOL = 1e-12
OCCUPANCY_TAIL = 1e-10
MAX_OCCUPANCY_ITERATIONS = 1_000_000


class MdpError(OpposdError):
    """Invalid MDP or policy, or an unsupported exact solve."""
    pass


@dataclass
class PolicyTable:
    """Stationary stochastic policy over a finite MDP."""
    probs: np.ndarray

    def __post_init__(self) -> None:
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if self.probs.ndim != 2:
            raise MdpError(f"Policy table must be 2-D, got shape {self.probs.shape}")
        if np.any(self.probs < 0.0):
            raise MdpError("Policy table has negative entries")
        rows = self.probs.sum(axis=1)
        if np.any(np.abs(rows - 1.0) > 1e-9):
            bad = int(np.argmax(np.abs(rows - 1.0)))
            raise MdpError(f"Policy row {bad} sums to {rows[bad]!r}, expected 1")

    @property
    def n_states(self) -> int:
        return self.probs.shape[0]

    @property
    def n_actions(self) -> int:
        return self.probs.shape[1]

    @classmethod
    def uniform(cls, n_states: int, n_actions: int) -> PolicyTable:
        return cls(np.full((n_states, n_actions), 1.0 / n_actions))


@dataclass
class TabularMdp:
    """Finite MDP with explicit dynamics.

    Attributes:
        transition: P[s, a, s']
        reward: r[s, a] in [0, 1]
        gamma: discount in (0, 1]
        initial_dist: p0[s]
        horizon: episode length; required for gamma = 1 occupancies
    """
    transition: np.ndarray
    reward: np.ndarray
    gamma: float
    initial_dist: np.ndarray
    horizon: int | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.transition = np.asarray(self.transition, dtype=np.float64)
        self.reward = np.asarray(self.reward, dtype=np.float64)
        self.initial_dist = np.asarray(self.initial_dist, dtype=np.float64)
        self.gamma = float(self.gamma)
        if self.transition.ndim != 3 or self.transition.shape[0] != self.transition.shape[2]:
            raise MdpError(f"transition must be (S, A, S), got {self.transition.shape}")
        s, a, _ = self.transition.shape
        if self.reward.shape != (s, a):
            raise MdpError(f"reward must be {(s, a)}, got {self.reward.shape}")
        if self.initial_dist.shape != (s,):
            raise MdpError(f"initial_dist must be ({s},), got {self.initial_dist.shape}")
        if not 0.0 < self.gamma <= 1.0:
            raise MdpError(f"gamma must be in (0, 1], got {self.gamma}")
        if np.any(self.transition < 0.0) or np.any(
            np.abs(self.transition.sum(axis=2) - 1.0) > ROW_TOL
        ):
            raise MdpError("each P[s][a] must be a distribution (sum 1 +- 1e-12)")
        if np.any(self.initial_dist < 0.0) or abs(self.initial_dist.sum() - 1.0) > ROW_TOL:
            raise MdpError("initial_dist must be a distribution (sum 1 +- 1e-12)")
        if np.any(self.reward < 0.0) or np.any(self.reward > 1.0):
            raise MdpError("rewards must lie in [0, 1]")
        if self.horizon is not None:
            self.horizon = int(self.horizon)
            if self.horizon < 1:
                raise MdpError(f"horizon must be >= 1, got {self.horizon}")

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]

    @property
    def n_actions(self) -> int:
        return self.transition.shape[1]

    def absorbing_states(self) -> np.ndarray:
        """Boolean mask of zero-reward states that self-loop under every action."""
        idx = np.arange(self.n_states)
        loops = np.all(self.transition[idx, :, idx] == 1.0, axis=1)
        return loops & np.all(self.reward == 0.0, axis=1)


def _check_pair(mdp: TabularMdp, policy: PolicyTable) -> None:
    if policy.probs.shape != (mdp.n_states, mdp.n_actions):
        raise MdpError(
            f"Policy shape {policy.probs.shape} does not match MDP "
            f"{(mdp.n_states, mdp.n_actions)}"
        )


def induced_chain(mdp: TabularMdp, policy: PolicyTable) -> tuple[np.ndarray, np.ndarray]:
    """(P_pi[s, s'], r_pi[s]) under ``policy``."""
    _check_pair(mdp, policy)
    p_pi = np.einsum("sa,sat->st", policy.probs, mdp.transition)
    r_pi = np.einsum("sa,sa->s", policy.probs, mdp.reward)
    return p_pi, r_pi


def discount_mass(gamma: float, horizon: int | None) -> float:
    """sum_{t<horizon} gamma^t (infinite sum when horizon is None)."""
    if horizon is None:
        if gamma >= 1.0:
            raise MdpError("gamma = 1 needs a finite horizon to normalize returns")
        return 1.0 / (1.0 - gamma)
    if gamma == 1.0:
        return float(horizon)
    return (1.0 - gamma ** horizon) / (1.0 - gamma)


def _episodic_values(p_pi: np.ndarray, r_pi: np.ndarray) -> np.ndarray:
    """Undiscounted values on a chain whose recurrent classes carry no reward."""
    n = p_pi.shape[0]
    graph = csr_matrix(p_pi > 0.0)
    n_comp, labels = connected_components(graph, directed=True, connection="strong")
    recurrent = np.zeros(n, dtype=bool)
    for c in range(n_comp):
        members = labels == c
        leaving = p_pi[np.ix_(members, ~members)].sum()
        if leaving <= ROW_TOL:
            recurrent |= members
    if np.any(r_pi[recurrent] > 0.0):
        bad = np.flatnonzero(recurrent & (r_pi > 0.0))
        raise MdpError(
            f"gamma = 1 with a rewarding recurrent class (states {bad.tolist()}); "
            f"average-reward exact solve is not supported"
        )
    values = np.zeros(n)
    transient = ~recurrent
    if np.any(transient):
        p_tt = p_pi[np.ix_(transient, transient)]
        values[transient] = np.linalg.solve(np.eye(p_tt.shape[0]) - p_tt, r_pi[transient])
    return values


def exact_value(
    mdp: TabularMdp,
    policy: PolicyTable,
    normalize: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Exact V[s] and Q[s, a] of ``policy``.

    gamma < 1 solves V = r_pi + gamma P_pi V directly. gamma = 1 requires
    every recurrent class of the induced chain to be reward-free (episodic
    absorption) and solves on the transient states.
    """
    p_pi, r_pi = induced_chain(mdp, policy)
    if mdp.gamma < 1.0:
        v = np.linalg.solve(np.eye(mdp.n_states) - mdp.gamma * p_pi, r_pi)
    else:
        v = _episodic_values(p_pi, r_pi)
    q = mdp.reward + mdp.gamma * np.einsum("sat,t->sa", mdp.transition, v)
    if normalize:
        scale = discount_mass(mdp.gamma, mdp.horizon)
        v, q = v / scale, q / scale
    return v, q


def exact_return(mdp: TabularMdp, policy: PolicyTable, normalize: bool = False) -> float:
    """Expected return from p0."""
    v, _ = exact_value(mdp, policy, normalize=normalize)
    return float(mdp.initial_dist @ v)


def exact_occupancy(
    mdp: TabularMdp,
    policy: PolicyTable,
    horizon: int | None = None,
) -> np.ndarray:
    """Normalized discounted occupancy sum_t gamma^t d_t / sum_t gamma^t.

    gamma < 1 iterates until gamma^t < 1e-10 unless an explicit ``horizon``
    is given. gamma = 1 truncates at ``horizon`` (default ``mdp.horizon``),
    which matches the per-step average of a padded dataset of that length.
    """
    p_pi, _ = induced_chain(mdp, policy)
    if mdp.gamma == 1.0:
        # Truncated at the dataset horizon, not a multiple of it: the
        # undiscounted ratio target is d^pi / d^mu over exactly the steps a
        # padded dataset holds, absorbing padding included.
        horizon = horizon if horizon is not None else mdp.horizon
        if horizon is None:
            raise MdpError("gamma = 1 occupancy needs a finite horizon")
        n_steps = int(horizon)
    elif horizon is not None:
        n_steps = int(horizon)
    else:
        n_steps = int(np.ceil(np.log(OCCUPANCY_TAIL) / np.log(mdp.gamma))) + 1

    if n_steps > MAX_OCCUPANCY_ITERATIONS:
        raise MdpError(
            f"Occupancy did not converge: {n_steps} iterations needed for "
            f"gamma={mdp.gamma!r} (cap {MAX_OCCUPANCY_ITERATIONS})"
        )

    d_t = mdp.initial_dist.copy()
    acc = np.zeros(mdp.n_states)
    weight = 1.0
    total = 0.0
    for _ in range(n_steps):
        acc += weight * d_t
        total += weight
        d_t = d_t @ p_pi
        weight *= mdp.gamma
    return acc / total


# ─────────────────────────────────────────────
# RANDOM INSTANCES
# ─────────────────────────────────────────────
def random_tabular_mdp(
    n_states: int,
    n_actions: int,
    rng: np.random.Generator,
    gamma: float = 0.9,
    horizon: int | None = None,
    concentration: float = 1.0,
) -> TabularMdp:
    """Dirichlet transitions, uniform [0, 1] rewards, Dirichlet p0."""
    transition = rng.dirichlet(np.full(n_states, concentration), size=(n_states, n_actions))
    transition /= transition.sum(axis=2, keepdims=True)
    reward = rng.uniform(0.0, 1.0, size=(n_states, n_actions))
    p0 = rng.dirichlet(np.ones(n_states))
    return TabularMdp(transition, reward, gamma, p0 / p0.sum(), horizon=horizon)


def random_policy_table(
    n_states: int,
    n_actions: int,
    rng: np.random.Generator,
    zero_prob: float = 0.0,
) -> PolicyTable:
    """Dirichlet rows; each entry is zeroed with ``zero_prob`` (one action survives)."""
    probs = rng.dirichlet(np.ones(n_actions), size=n_states)
    if zero_prob > 0.0:
        mask = rng.uniform(size=probs.shape) < zero_prob
        keep = rng.integers(n_actions, size=n_states)
        mask[np.arange(n_states), keep] = False
        probs = np.where(mask, 0.0, probs)
    probs /= probs.sum(axis=1, keepdims=True)
    return PolicyTable(probs)


# ─────────────────────────────────────────────
# JSON
# ─────────────────────────────────────────────
def mdp_to_dict(mdp: TabularMdp, behavior: PolicyTable | None = None) -> dict[str, Any]:
    data: dict[str, Any] = {
        "transition": mdp.transition.tolist(),
        "reward": mdp.reward.tolist(),
        "gamma": mdp.gamma,
        "initial_dist": mdp.initial_dist.tolist(),
        "horizon": mdp.horizon,
    }
    if behavior is not None:
        data["behavior"] = behavior.probs.tolist()
    return data


def mdp_from_dict(data: dict[str, Any]) -> tuple[TabularMdp, PolicyTable | None]:
    try:
        mdp = TabularMdp(
            transition=np.array(data["transition"], dtype=np.float64),
            reward=np.array(data["reward"], dtype=np.float64),
            gamma=data["gamma"],
            initial_dist=np.array(data["initial_dist"], dtype=np.float64),
            horizon=data.get("horizon"),
        )
    except KeyError as e:
        raise MdpError(f"Tabular MDP is missing field {e}") from e
    behavior = None
    if data.get("behavior") is not None:
        behavior = PolicyTable(np.array(data["behavior"], dtype=np.float64))
    return mdp, behavior


def save_mdp(mdp: TabularMdp, path: str | Path, behavior: PolicyTable | None = None) -> None:
    Path(path).write_text(json.dumps(mdp_to_dict(mdp, behavior)))


def load_mdp(path: str | Path) -> tuple[TabularMdp, PolicyTable | None]:
    p = Path(path)
    if not p.exists():
        raise MdpError(f"Tabular MDP file not found: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise MdpError(f"{p}: invalid JSON at line {e.lineno}, column {e.colno}") from e
    return mdp_from_dict(data)
