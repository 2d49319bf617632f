"""Domain types, categorical math and the seedable randomness contract."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import AllZero, InvalidDistribution, NegativeEntry

SUM_TOL = 1e-9
DEFAULT_BIAS_CAP = 0.5


class ExplorationDistribution:
    """Immutable categorical distribution over discrete actions."""

    __slots__ = ("_probs",)

    def __init__(self, probs: Sequence[float]):
        arr = np.array(probs, dtype=np.float64).reshape(-1)
        if arr.size < 1:
            raise InvalidDistribution("distribution needs at least one entry")
        if not np.all(np.isfinite(arr)):
            raise InvalidDistribution("non-finite probability")
        if np.any(arr < 0):
            raise InvalidDistribution("negative probability")
        if abs(math.fsum(arr) - 1.0) > SUM_TOL:
            raise InvalidDistribution(f"probabilities sum to {math.fsum(arr)!r}")
        arr.setflags(write=False)
        self._probs = arr

    @classmethod
    def uniform(cls, n: int) -> "ExplorationDistribution":
        return cls(np.full(n, 1.0 / n))

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    def __len__(self) -> int:
        return self._probs.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExplorationDistribution):
            return NotImplemented
        return np.array_equal(self._probs, other._probs)

    def __hash__(self) -> int:
        return hash(self._probs.tobytes())

    def __repr__(self) -> str:
        return f"ExplorationDistribution({self._probs.tolist()})"


class GaussianBias:
    """Immutable per-dimension mean offset for continuous exploration noise."""

    __slots__ = ("_bias",)

    def __init__(self, bias: Sequence[float]):
        arr = np.array(bias, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(arr)):
            raise InvalidDistribution("non-finite bias")
        arr.setflags(write=False)
        self._bias = arr

    @classmethod
    def capped(cls, bias, low, high, cap: float = DEFAULT_BIAS_CAP) -> "GaussianBias":
        """Clip each entry to ``cap`` times the width of its action range."""
        width = np.asarray(high, dtype=np.float64) - np.asarray(low, dtype=np.float64)
        limit = cap * width
        return cls(np.clip(np.asarray(bias, dtype=np.float64), -limit, limit))

    @property
    def bias(self) -> np.ndarray:
        return self._bias

    def __len__(self) -> int:
        return self._bias.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GaussianBias):
            return NotImplemented
        return np.array_equal(self._bias, other._bias)

    def __hash__(self) -> int:
        return hash(self._bias.tobytes())

    def __repr__(self) -> str:
        return f"GaussianBias({self._bias.tolist()})"


@dataclass(frozen=True)
class Uniform:
    """The base algorithm's own exploration: equiprobable or zero-mean noise."""


@dataclass(frozen=True)
class Categorical:
    dist: ExplorationDistribution


@dataclass(frozen=True)
class Biased:
    bias: GaussianBias


ExplorationStrategy = Union[Uniform, Categorical, Biased]


def strategy_is_discrete(strategy: ExplorationStrategy) -> bool | None:
    """True for categorical, False for biased, None for Uniform (fits either)."""
    if isinstance(strategy, Categorical):
        return True
    if isinstance(strategy, Biased):
        return False
    return None


@dataclass
class EpisodeRecord:
    actions: list = field(default_factory=list)
    rewards: list[float] = field(default_factory=list)

    def __post_init__(self):
        if len(self.actions) != len(self.rewards):
            raise ValueError("actions and rewards must have equal length")

    def append(self, action, reward: float) -> None:
        self.actions.append(action)
        self.rewards.append(float(reward))

    @property
    def length(self) -> int:
        return len(self.rewards)

    @property
    def total_return(self) -> float:
        return math.fsum(self.rewards)


def _stream_key(seed: int, stream: str) -> np.ndarray:
    digest = hashlib.sha256(stream.encode("utf-8")).digest()
    label_word = int.from_bytes(digest[:8], "little")
    return np.array([seed & 0xFFFFFFFFFFFFFFFF, label_word], dtype=np.uint64)


class RngStream:
    """Counter-based random stream identified by ``(seed, stream label)``.

    Backed by Philox so the draw sequence depends only on the key, never on
    how many draws other streams have made.
    """

    def __init__(self, seed: int, stream: str = "default"):
        self.seed = int(seed)
        self.stream = stream
        self.gen = np.random.Generator(np.random.Philox(key=_stream_key(self.seed, stream)))

    def child(self, label: str) -> "RngStream":
        return RngStream(self.seed, f"{self.stream}/{label}")

    def random(self) -> float:
        return float(self.gen.random())

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream={self.stream!r})"


def categorical_normalize(weights: Sequence[float]) -> ExplorationDistribution:
    w = np.array(weights, dtype=np.float64).reshape(-1)
    if w.size < 1:
        raise InvalidDistribution("empty weight vector")
    if not np.all(np.isfinite(w)):
        raise InvalidDistribution("non-finite weight")
    if np.any(w < 0):
        raise NegativeEntry(f"negative weight in {w.tolist()}")
    total = math.fsum(w)
    if total == 0:
        raise AllZero("weights sum to zero")
    return ExplorationDistribution(w / total)


def kl_to_uniform(dist: ExplorationDistribution) -> float:
    """KL(p || uniform) in nats with 0*log(0) = 0."""
    p = dist.probs
    n = p.size
    nz = p[p > 0]
    return max(0.0, math.fsum(nz * np.log(nz * n)))


def sample_categorical(dist: ExplorationDistribution, rng: RngStream) -> int:
    """Inverse-CDF draw consuming exactly one uniform variate."""
    return _inverse_cdf(dist.probs, rng.random())


def _inverse_cdf(probs: np.ndarray, u: float) -> int:
    cdf = np.cumsum(probs)
    idx = int(np.searchsorted(cdf, u, side="right"))
    if idx >= probs.size:
        # cdf[-1] can fall a few ulps short of 1
        idx = int(np.flatnonzero(probs > 0)[-1])
    return idx
