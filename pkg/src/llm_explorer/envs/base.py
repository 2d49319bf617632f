"""Uniform environment interface and shared value types."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from ..core import RngStream
from ..errors import InvalidAction


@dataclass(frozen=True)
class ActionSpec:
    kind: str  # "discrete" | "continuous"
    n: int = 0
    low: tuple[float, ...] = ()
    high: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind == "discrete":
            if self.n < 2:
                raise ValueError("discrete action space needs n >= 2")
        elif self.kind == "continuous":
            if len(self.low) != len(self.high) or not self.low:
                raise ValueError("continuous bounds must be non-empty and equal length")
            if any(lo >= hi for lo, hi in zip(self.low, self.high)):
                raise ValueError("need low < high in every dimension")
        else:
            raise ValueError(f"unknown action kind {self.kind!r}")

    @classmethod
    def discrete(cls, n: int) -> "ActionSpec":
        return cls("discrete", n=n)

    @classmethod
    def continuous(cls, low, high) -> "ActionSpec":
        return cls("continuous", low=tuple(float(v) for v in low), high=tuple(float(v) for v in high))

    @property
    def is_discrete(self) -> bool:
        return self.kind == "discrete"

    @property
    def dim(self) -> int:
        return len(self.low)

    @property
    def low_array(self) -> np.ndarray:
        return np.array(self.low)

    @property
    def high_array(self) -> np.ndarray:
        return np.array(self.high)

    def validate(self, action):
        """Return ``action`` in canonical form or raise :class:`InvalidAction`."""
        if self.is_discrete:
            if isinstance(action, (bool, np.bool_)) or not isinstance(action, (int, np.integer)):
                raise InvalidAction(f"discrete action must be an integer, got {action!r}")
            if not 0 <= int(action) < self.n:
                raise InvalidAction(f"action {action} outside 0..{self.n - 1}")
            return int(action)
        a = np.asarray(action, dtype=np.float64).reshape(-1)
        if a.size != self.dim:
            raise InvalidAction(f"expected {self.dim}-dim action, got {a.size}")
        if not np.all(np.isfinite(a)):
            raise InvalidAction("non-finite continuous action")
        return np.clip(a, self.low_array, self.high_array)


@dataclass
class StepResult:
    next_state: np.ndarray
    reward: float
    done: bool
    # True when the episode ended only because the horizon ran out.
    truncated: bool = False

    @property
    def terminal(self) -> bool:
        return self.done and not self.truncated


class Env(Protocol):
    env_id: str
    name: str
    horizon: int
    action_spec: ActionSpec
    state_dim: int
    state_low: np.ndarray
    state_high: np.ndarray

    def reset(self, rng: RngStream | None = None) -> np.ndarray: ...

    def step(self, action) -> StepResult: ...


class FiniteEnv(Protocol):
    """Deterministic tabular model exposed for exact oracles."""

    n_states: int
    horizon: int
    action_spec: ActionSpec

    def initial_state_index(self) -> int: ...

    def state_index(self, state) -> int: ...

    def transition(self, s: int, a: int) -> tuple[int, float, bool]: ...
