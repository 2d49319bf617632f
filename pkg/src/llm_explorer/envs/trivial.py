from __future__ import annotations

import numpy as np

from ..core import RngStream
from .base import ActionSpec, StepResult


class SingleStateEnv:
    """One state, two do-nothing actions, zero reward. Oracle sanity case."""

    env_id = "single_state"
    name = "SingleState"
    state_dim = 1
    state_low = np.zeros(1)
    state_high = np.ones(1)

    def __init__(self, horizon: int = 1):
        self.horizon = horizon
        self.action_spec = ActionSpec.discrete(2)
        self.n_states = 1
        self.t = 0

    def reset(self, rng: RngStream | None = None) -> np.ndarray:
        self.t = 0
        return np.zeros(1)

    def step(self, action) -> StepResult:
        self.action_spec.validate(action)
        self.t += 1
        truncated = self.t >= self.horizon
        return StepResult(np.zeros(1), 0.0, truncated, truncated)

    def initial_state_index(self) -> int:
        return 0

    def state_index(self, state) -> int:
        return 0

    def transition(self, s: int, a: int) -> tuple[int, float, bool]:
        return 0, 0.0, False
