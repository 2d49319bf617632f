from __future__ import annotations

import numpy as np

from ..core import RngStream
from .base import ActionSpec, StepResult

# action index -> (d_row, d_col)
MOVES = ((-1, 0), (0, 1), (0, -1), (1, 0))


class GridWorld:
    """5x5 grid: start (0,0), goal (4,4) worth +1, trap (2,2) worth -1.

    Actions: 0 up, 1 right, 2 left, 3 down. Bumping a wall leaves the agent
    in place. Both special cells end the episode.
    """

    env_id = "gridworld"
    name = "GridWorld"
    state_dim = 2

    def __init__(self, size: int = 5, horizon: int = 50, goal=(4, 4), trap=(2, 2), start=(0, 0)):
        self.size = size
        self.horizon = horizon
        self.goal = tuple(goal)
        self.trap = tuple(trap)
        self.start = tuple(start)
        self.action_spec = ActionSpec.discrete(4)
        self.n_states = size * size
        self.state_low = np.zeros(2)
        self.state_high = np.full(2, float(size - 1))
        self.cell = self.start
        self.t = 0

    def is_terminal_cell(self, cell) -> bool:
        return tuple(cell) in (self.goal, self.trap)

    def _move(self, cell, action: int):
        dr, dc = MOVES[action]
        r = min(max(cell[0] + dr, 0), self.size - 1)
        c = min(max(cell[1] + dc, 0), self.size - 1)
        nxt = (r, c)
        if nxt == self.goal:
            return nxt, 1.0, True
        if nxt == self.trap:
            return nxt, -1.0, True
        return nxt, 0.0, False

    def reset(self, rng: RngStream | None = None) -> np.ndarray:
        self.cell = self.start
        self.t = 0
        return np.array(self.cell, dtype=np.float64)

    def step(self, action) -> StepResult:
        a = self.action_spec.validate(action)
        self.cell, reward, terminal = self._move(self.cell, a)
        self.t += 1
        truncated = not terminal and self.t >= self.horizon
        return StepResult(np.array(self.cell, dtype=np.float64), reward, terminal or truncated, truncated)

    def initial_state_index(self) -> int:
        return self.start[0] * self.size + self.start[1]

    def state_index(self, state) -> int:
        return int(round(state[0])) * self.size + int(round(state[1]))

    def cell_of(self, s: int) -> tuple[int, int]:
        return divmod(s, self.size)

    def transition(self, s: int, a: int) -> tuple[int, float, bool]:
        cell = self.cell_of(s)
        if self.is_terminal_cell(cell):
            return s, 0.0, True
        nxt, reward, terminal = self._move(cell, a)
        return nxt[0] * self.size + nxt[1], reward, terminal
