"""Strategy-driven action selection shared by every agent."""

from __future__ import annotations

import numpy as np

from ..core import Biased, Categorical, ExplorationDistribution, ExplorationStrategy, RngStream, Uniform, _inverse_cdf
from ..errors import ArityMismatch, DimensionMismatch


def exploration_probs(strategy: ExplorationStrategy, n: int) -> np.ndarray:
    if isinstance(strategy, Uniform):
        return ExplorationDistribution.uniform(n).probs
    if isinstance(strategy, Categorical):
        if len(strategy.dist) != n:
            raise ArityMismatch(f"strategy has {len(strategy.dist)} actions, agent has {n}")
        return strategy.dist.probs
    raise ArityMismatch(f"{type(strategy).__name__} strategy cannot drive discrete exploration")


def epsilon_greedy(q_values: np.ndarray, strategy: ExplorationStrategy, epsilon: float, rng: RngStream) -> int:
    """With probability epsilon sample the strategy, otherwise argmax (lowest index on ties).

    Always consumes one variate for the coin and, when exploring, exactly one
    more for the draw, so Uniform and a uniform Categorical give identical
    action sequences.
    """
    probs = exploration_probs(strategy, q_values.shape[-1])
    if rng.random() < epsilon:
        return _inverse_cdf(probs, rng.random())
    return int(np.argmax(q_values))


def strategy_bias(strategy: ExplorationStrategy, dim: int) -> np.ndarray:
    if isinstance(strategy, Uniform):
        return np.zeros(dim)
    if isinstance(strategy, Biased):
        if len(strategy.bias) != dim:
            raise DimensionMismatch(f"bias has {len(strategy.bias)} dims, action space has {dim}")
        return strategy.bias.bias
    raise DimensionMismatch(f"{type(strategy).__name__} strategy cannot drive continuous exploration")


def gaussian_explore(mean_action, strategy: ExplorationStrategy, sigma: float, low, high, rng: RngStream) -> np.ndarray:
    """clip(mean + N(bias, sigma^2 I), bounds); consumes ``dim`` normal variates."""
    mean_action = np.asarray(mean_action, dtype=np.float64)
    bias = strategy_bias(strategy, mean_action.size)
    noise = rng.gen.normal(size=mean_action.size)
    return np.clip(mean_action + bias + sigma * noise, low, high)
