"""
opposd.ratio.oracle — Exact state ratios on tabular MDPs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from opposd.errors import OpposdError
from opposd.mdp.tabular import PolicyTable, TabularMdp, exact_occupancy

COVERAGE_TOL = 1e-12


class CoverageError(OpposdError):
    """Target visits a state the behavior never reaches."""
    pass


def exact_ratio_tabular(
    mdp: TabularMdp,
    target: PolicyTable,
    behavior: PolicyTable,
    horizon: int | None = None,
) -> np.ndarray:
    """w[s] = d^pi(s) / d^mu(s); 0 where both occupancies vanish."""
    d_pi = exact_occupancy(mdp, target, horizon)
    d_mu = exact_occupancy(mdp, behavior, horizon)
    uncovered = (d_mu <= COVERAGE_TOL) & (d_pi > COVERAGE_TOL)
    if np.any(uncovered):
        states = np.flatnonzero(uncovered).tolist()
        raise CoverageError(
            f"Target policy reaches states {states} that the behavior policy never visits"
        )
    w = np.zeros(mdp.n_states)
    covered = d_mu > COVERAGE_TOL
    w[covered] = d_pi[covered] / d_mu[covered]
    return w


@dataclass
class TabularRatio:
    """Lookup ratio over one-hot states; s_abs (all zeros) maps to ``absorbing_value``."""
    values: np.ndarray
    absorbing_value: float = 0.0

    def predict(self, states: np.ndarray) -> np.ndarray:
        states = np.atleast_2d(states)
        out = self.values[np.argmax(states, axis=1)].astype(np.float64)
        return np.where(np.any(states != 0.0, axis=1), out, self.absorbing_value)
