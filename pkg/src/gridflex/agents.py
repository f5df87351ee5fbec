"""Reference controllers: a time-of-day rule-based baseline, a random agent,
and a tabular Q-learning agent over a discretized state space.

The rule-based controller defines the normalization denominator used by the
scoring harness, so its schedule and rates are fixed constants of this
package, not tunables.
"""

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

# Night hours charge storage, day hours discharge it; rates are chosen so a
# full daily cycle is attempted across each window.
DEFAULT_CHARGE_HOURS = frozenset([22, 23, 24, 1, 2, 3, 4, 5, 6, 7, 8])
DEFAULT_DISCHARGE_HOURS = frozenset(range(9, 22))


@dataclass
class RbcPolicy:
    charge_hours: frozenset = DEFAULT_CHARGE_HOURS
    discharge_hours: frozenset = DEFAULT_DISCHARGE_HOURS
    charge_rate: float = 1.0 / len(DEFAULT_CHARGE_HOURS)
    discharge_rate: float = 1.0 / len(DEFAULT_DISCHARGE_HOURS)

    def __post_init__(self):
        if self.charge_hours & self.discharge_hours:
            raise ValueError("charge and discharge hours must be disjoint")

    def act(self, hour: int, action_dims: Sequence[int]) -> List[List[float]]:
        """Identical schedule for every building: one action value per storage device."""
        if not 1 <= hour <= 24:
            raise ValueError(f"hour must be in 1..24, got {hour}")
        if hour in self.charge_hours:
            value = self.charge_rate
        elif hour in self.discharge_hours:
            value = -self.discharge_rate
        else:
            value = 0.0
        return [[value] * d for d in action_dims]


class RandomAgent:
    """Uniform actions in [-1, 1], seeded."""

    def __init__(self, seed: int = 0):
        self.rng = np.random.default_rng(seed)

    def act(self, action_dims: Sequence[int]) -> List[List[float]]:
        return [[float(v) for v in self.rng.uniform(-1.0, 1.0, d)] for d in action_dims]


def discretize(
    state: Sequence[float],
    low: Sequence[float],
    high: Sequence[float],
    bins: Sequence[int],
) -> Tuple[int, ...]:
    """Uniform binning per dimension; values clipped into [low, high], and the
    upper boundary maps to the last bin."""
    out = []
    for v, lo, hi, n in zip(state, low, high, bins):
        if n < 1:
            raise ValueError("bin count must be >= 1")
        if hi <= lo:
            out.append(0)
            continue
        v = min(max(v, lo), hi)
        out.append(min(int((v - lo) / (hi - lo) * n), n - 1))
    return tuple(out)


@dataclass
class QTable:
    """Sparse state-action value table; unseen pairs read as 0."""

    alpha: float = 0.5
    gamma: float = 0.9
    values: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], float] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must be in [0, 1]")

    def get(self, s: Tuple[int, ...], a: Tuple[int, ...]) -> float:
        return self.values.get((s, a), 0.0)

    def update(
        self,
        s: Tuple[int, ...],
        a: Tuple[int, ...],
        reward: float,
        s_next: Tuple[int, ...],
        actions: Sequence[Tuple[int, ...]],
    ) -> float:
        best_next = max(self.get(s_next, a2) for a2 in actions)
        q = self.get(s, a)
        q = q + self.alpha * (reward + self.gamma * best_next - q)
        self.values[(s, a)] = q
        return q

    def save(self, path: str) -> None:
        with open(path, "w") as f:
            for (s, a), v in sorted(self.values.items()):
                f.write(f"{','.join(map(str, s))}\t{','.join(map(str, a))}\t{v!r}\n")

    @classmethod
    def load(cls, path: str, alpha: float = 0.5, gamma: float = 0.9) -> "QTable":
        table = cls(alpha=alpha, gamma=gamma)
        with open(path) as f:
            for line in f:
                s_str, a_str, v_str = line.rstrip("\n").split("\t")
                s = tuple(int(x) for x in s_str.split(",")) if s_str else ()
                a = tuple(int(x) for x in a_str.split(",")) if a_str else ()
                table.values[(s, a)] = float(v_str)
        return table


DEFAULT_ACTION_LEVELS = (-0.33, 0.0, 0.33)


class TabularQAgent:
    """Q-learning over binned state features and a small discrete action grid
    for one building."""

    def __init__(
        self,
        state_low: Sequence[float],
        state_high: Sequence[float],
        state_bins: Sequence[int],
        n_action_dims: int,
        action_levels: Sequence[float] = DEFAULT_ACTION_LEVELS,
        alpha: float = 0.5,
        gamma: float = 0.9,
        epsilon: float = 1.0,
        seed: int = 0,
    ):
        self.state_low = list(state_low)
        self.state_high = list(state_high)
        self.state_bins = list(state_bins)
        self.action_levels = list(action_levels)
        self.action_grid = list(
            itertools.product(range(len(self.action_levels)), repeat=n_action_dims)
        )
        self.table = QTable(alpha=alpha, gamma=gamma)
        self.epsilon = epsilon
        self.rng = np.random.default_rng(seed)

    def discretize(self, state: Sequence[float]) -> Tuple[int, ...]:
        return discretize(state, self.state_low, self.state_high, self.state_bins)

    def greedy_action(self, s: Tuple[int, ...]) -> Tuple[int, ...]:
        # Ties break toward the lowest action index; the grid is lexicographic.
        best = self.action_grid[0]
        best_q = self.table.get(s, best)
        for a in self.action_grid[1:]:
            q = self.table.get(s, a)
            if q > best_q:
                best, best_q = a, q
        return best

    def act(self, state: Sequence[float], greedy: bool = False) -> Tuple[int, ...]:
        s = self.discretize(state)
        if not greedy and self.epsilon > 0.0 and self.rng.random() < self.epsilon:
            return self.action_grid[self.rng.integers(len(self.action_grid))]
        return self.greedy_action(s)

    def action_values(self, a: Tuple[int, ...]) -> List[float]:
        return [self.action_levels[i] for i in a]

    def learn(
        self,
        state: Sequence[float],
        action: Tuple[int, ...],
        reward: float,
        next_state: Sequence[float],
    ) -> float:
        return self.table.update(
            self.discretize(state), action, reward, self.discretize(next_state), self.action_grid
        )


def default_feature_indices(state_names: Sequence[str]) -> List[int]:
    """Indices of the default Q-learning features within a building's state vector."""
    wanted = [n for n in ("hour", "cooling_storage_soc", "dhw_storage_soc") if n in state_names]
    if not wanted:
        raise ValueError("state vector exposes none of the default Q-learning features")
    return [list(state_names).index(n) for n in wanted]
