from __future__ import annotations

import numpy as np

from ..core import RngStream
from .base import ActionSpec, StepResult

STEP_SCALE = 0.1


class PointMass:
    """Point in [-1, 1]^2 pushed by displacement actions toward a fixed goal.

    Reward is minus the Euclidean distance to the goal after each move.
    """

    env_id = "pointmass"
    name = "PointMass"
    state_dim = 2
    state_low = np.array([-1.0, -1.0])
    state_high = np.array([1.0, 1.0])

    def __init__(self, horizon: int = 50, goal=(0.5, 0.5), init_spread: float = 0.05):
        self.horizon = horizon
        self.goal = np.array(goal, dtype=np.float64)
        self.init_spread = init_spread
        self.action_spec = ActionSpec.continuous((-1.0, -1.0), (1.0, 1.0))
        self.position = np.zeros(2)
        self.t = 0

    def reset(self, rng: RngStream | None = None) -> np.ndarray:
        if rng is None:
            self.position = np.zeros(2)
        else:
            self.position = rng.gen.uniform(-self.init_spread, self.init_spread, size=2)
        self.t = 0
        return self.position.copy()

    def step(self, action) -> StepResult:
        a = self.action_spec.validate(action)
        self.position = np.clip(self.position + STEP_SCALE * a, self.state_low, self.state_high)
        reward = -float(np.linalg.norm(self.position - self.goal))
        self.t += 1
        truncated = self.t >= self.horizon
        return StepResult(self.position.copy(), reward, truncated, truncated)
