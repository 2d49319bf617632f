"""KL clipping, two-sample self-consistency and the adaptive update trigger."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..core import Biased, Categorical, ExplorationStrategy, kl_to_uniform
from ..errors import BothFailed, ParseError

SAFEGUARDS = ("none", "clip-uniform", "clip-old", "self-consistency")
KL_WARMUP = 5
KL_SIGMAS = 10.0
ADAPTIVE_WARMUP = 11


def strategy_skew(strategy: ExplorationStrategy) -> float:
    """KL to uniform for categorical strategies, Euclidean bias norm for continuous ones, 0 for Uniform."""
    if isinstance(strategy, Categorical):
        return kl_to_uniform(strategy.dist)
    if isinstance(strategy, Biased):
        return float(np.linalg.norm(strategy.bias.bias))
    return 0.0


@dataclass(frozen=True)
class StrategyCandidate:
    text: str
    strategy: ExplorationStrategy | None = None
    error: ParseError | None = None

    def __post_init__(self):
        if (self.strategy is None) == (self.error is None):
            raise ValueError("a candidate holds exactly one of strategy or error")

    @property
    def ok(self) -> bool:
        return self.strategy is not None

    @property
    def kl(self) -> float | None:
        if isinstance(self.strategy, Categorical):
            return kl_to_uniform(self.strategy.dist)
        return None

    @property
    def skew(self) -> float | None:
        return None if self.strategy is None else strategy_skew(self.strategy)


@dataclass(frozen=True)
class SafeguardDecision:
    accepted: bool
    # "uniform" or "previous" when not accepted
    fallback: str | None = None


def apply_safeguard(k: float, history: Sequence[float], policy: str) -> tuple[SafeguardDecision, list[float]]:
    """Accept ``k`` and append it, or fall back without touching the history.

    Clipping policies compare ``k`` with mean + 10 population std of the
    history once it holds at least five values; other policies always accept.
    """
    history = list(history)
    clipping = policy in ("clip-uniform", "clip-old")
    if clipping and len(history) >= KL_WARMUP:
        m = float(np.mean(history))
        s = float(np.std(history))
        if k > m + KL_SIGMAS * s:
            return SafeguardDecision(False, "uniform" if policy == "clip-uniform" else "previous"), history
    history.append(float(k))
    return SafeguardDecision(True), history


def self_consistent_select(c1: StrategyCandidate, c2: StrategyCandidate) -> ExplorationStrategy:
    """The parsed candidate with the smaller skew; the first wins ties."""
    if c1.ok and c2.ok:
        return c2.strategy if c2.skew < c1.skew else c1.strategy
    if c1.ok:
        return c1.strategy
    if c2.ok:
        return c2.strategy
    raise BothFailed(f"both candidates failed: {c1.error!r}, {c2.error!r}")


def adaptive_should_update(returns: Sequence[float], G: float) -> bool:
    if len(returns) < ADAPTIVE_WARMUP:
        return True
    diffs = np.diff(np.asarray(returns[-ADAPTIVE_WARMUP:], dtype=np.float64))
    g1 = math.fsum(diffs[-5:]) / 5
    g2 = math.fsum(diffs) / 10
    if abs(g2) < 1e-9:
        return g1 < -G
    return g1 < g2 - G * abs(g2)
