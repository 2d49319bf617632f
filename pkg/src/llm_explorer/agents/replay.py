from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import RngStream
from ..errors import EmptyBuffer


@dataclass
class Batch:
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    # 1.0 only for true terminal transitions; horizon cut-offs stay 0 and bootstrap
    dones: np.ndarray

    def __len__(self) -> int:
        return self.rewards.shape[0]


class ReplayBuffer:
    """Fixed-capacity ring of transitions stored in preallocated arrays."""

    def __init__(self, capacity: int, state_dim: int, action_dim: int | None = None):
        self.capacity = capacity
        self.discrete = action_dim is None
        self.states = np.zeros((capacity, state_dim))
        self.next_states = np.zeros((capacity, state_dim))
        if self.discrete:
            self.actions = np.zeros(capacity, dtype=np.int64)
        else:
            self.actions = np.zeros((capacity, action_dim))
        self.rewards = np.zeros(capacity)
        self.dones = np.zeros(capacity)
        self.size = 0
        self._next = 0

    def __len__(self) -> int:
        return self.size

    def push(self, state, action, reward, next_state, done) -> None:
        i = self._next
        self.states[i] = state
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_states[i] = next_state
        self.dones[i] = float(done)
        self._next = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int, rng: RngStream) -> Batch:
        """Uniform minibatch; without replacement unless the buffer is smaller than the batch."""
        if self.size == 0:
            raise EmptyBuffer("cannot sample from an empty replay buffer")
        if self.size >= batch_size:
            idx = rng.gen.choice(self.size, batch_size, replace=False)
        else:
            idx = rng.gen.integers(0, self.size, size=batch_size)
        return Batch(
            self.states[idx],
            self.actions[idx],
            self.rewards[idx],
            self.next_states[idx],
            self.dones[idx],
        )

    def metadata(self) -> dict:
        return {"capacity": self.capacity, "size": self.size, "next": self._next}
