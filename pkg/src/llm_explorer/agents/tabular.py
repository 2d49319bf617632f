from __future__ import annotations

import numpy as np

from ..core import ExplorationStrategy, RngStream
from .exploration import epsilon_greedy


def tabular_q_update(table: np.ndarray, transition, alpha: float = 0.1, gamma: float = 0.99) -> np.ndarray:
    """In-place one-step Q-learning on ``(s, a, r, s2, done)``; returns the table."""
    s, a, r, s2, done = transition
    bootstrap = 0.0 if done else gamma * table[s2].max()
    table[s, a] += alpha * (r + bootstrap - table[s, a])
    return table


class TabularQAgent:
    def __init__(self, n_states: int, n_actions: int, alpha: float = 0.1, gamma: float = 0.99):
        self.table = np.zeros((n_states, n_actions))
        self.alpha = alpha
        self.gamma = gamma

    def select_action(self, s: int, strategy: ExplorationStrategy, epsilon: float, rng: RngStream) -> int:
        return epsilon_greedy(self.table[s], strategy, epsilon, rng)

    def update(self, s, a, r, s2, done) -> None:
        tabular_q_update(self.table, (s, a, r, s2, done), self.alpha, self.gamma)

    def greedy_policy(self) -> np.ndarray:
        return self.table.argmax(axis=1)
