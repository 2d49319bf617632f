from __future__ import annotations

import numpy as np

from ..core import RngStream
from .base import ActionSpec, StepResult

N_POSITIONS = 10
TOP = N_POSITIONS - 1
PERIOD = 4
# lane -> phases during which a car occupies it
HAZARDS = {3: (0, 1), 6: (2, 3)}


class ToyFreeway:
    """One-dimensional road crossing with two timed hazard lanes.

    Positions run 0..9. Actions: 0 no-op, 1 up, 2 down. Phase is the step
    count mod 4 and a lane's occupancy is judged at the phase reached by
    the move. Moving into an occupied lane sends the agent back to 0;
    arriving at 9 scores +1 and restarts at 0.
    """

    env_id = "toy_freeway"
    name = "Freeway"
    state_dim = 2
    state_low = np.array([0.0, 0.0])
    state_high = np.array([float(TOP), float(PERIOD - 1)])

    def __init__(self, horizon: int = 100):
        self.horizon = horizon
        self.action_spec = ActionSpec.discrete(3)
        self.n_states = N_POSITIONS * PERIOD
        self.position = 0
        self.t = 0

    @staticmethod
    def occupied(lane: int, phase: int) -> bool:
        return phase in HAZARDS.get(lane, ())

    @staticmethod
    def _move(position: int, phase: int, action: int) -> tuple[int, int, float]:
        """Pure transition on (position, phase) -> (position, phase, reward)."""
        target = position + (1 if action == 1 else -1 if action == 2 else 0)
        target = min(max(target, 0), TOP)
        next_phase = (phase + 1) % PERIOD
        reward = 0.0
        if target != position and ToyFreeway.occupied(target, next_phase):
            target = 0
        elif target == TOP:
            reward = 1.0
            target = 0
        return target, next_phase, reward

    def _state(self) -> np.ndarray:
        return np.array([float(self.position), float(self.t % PERIOD)])

    def reset(self, rng: RngStream | None = None) -> np.ndarray:
        self.position = 0
        self.t = 0
        return self._state()

    def step(self, action) -> StepResult:
        a = self.action_spec.validate(action)
        self.position, _, reward = self._move(self.position, self.t % PERIOD, a)
        self.t += 1
        truncated = self.t >= self.horizon
        return StepResult(self._state(), reward, truncated, truncated)

    def initial_state_index(self) -> int:
        return 0

    def state_index(self, state) -> int:
        return int(round(state[0])) * PERIOD + int(round(state[1]))

    def transition(self, s: int, a: int) -> tuple[int, float, bool]:
        position, phase = divmod(s, PERIOD)
        position, phase, reward = self._move(position, phase, a)
        return position * PERIOD + phase, reward, False
