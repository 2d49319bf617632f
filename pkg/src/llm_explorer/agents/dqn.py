from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import ExplorationStrategy, RngStream
from ..errors import EmptyBuffer
from ..neural import AdamState, Mlp, adam_step, dueling_backward, dueling_combine, make_mlp
from .exploration import epsilon_greedy
from .replay import Batch, ReplayBuffer
from .schedule import EpsilonSchedule


@dataclass
class DqnConfig:
    gamma: float = 0.99
    batch_size: int = 256
    lr: float = 1e-4
    buffer_size: int = 10_000
    target_interval: int = 1000
    # None keeps hard copies; a float switches to Polyak averaging every step
    tau: float | None = None
    warmup: int = 1000
    double: bool = False
    dueling: bool = False


class StateScaler:
    """Affine map of known state bounds onto [-1, 1] before the network sees them."""

    def __init__(self, low, high):
        self.low = np.asarray(low, dtype=np.float64)
        self.span = np.asarray(high, dtype=np.float64) - self.low
        self.span[self.span == 0] = 1.0

    def __call__(self, x):
        return 2.0 * (np.asarray(x, dtype=np.float64) - self.low) / self.span - 1.0


class DqnAgent:
    def __init__(self, state_dim: int, n_actions: int, rng: RngStream, config: DqnConfig | None = None,
                 state_low=None, state_high=None):
        self.config = cfg = config or DqnConfig()
        self.n_actions = n_actions
        self.rng = rng
        self.replay_rng = rng.child("replay")
        n_out = n_actions + 1 if cfg.dueling else n_actions
        self.online = make_mlp(state_dim, n_out, rng.child("init"))
        self.target = self.online.copy()
        self.optim = AdamState.for_params(self.online.params, lr=cfg.lr)
        self.buffer = ReplayBuffer(cfg.buffer_size, state_dim)
        self.schedule = EpsilonSchedule()
        if state_low is None:
            state_low, state_high = -np.ones(state_dim), np.ones(state_dim)
        self.scale = StateScaler(state_low, state_high)
        self.steps = 0
        self.updates = 0

    def q_net(self, net: Mlp, states) -> np.ndarray:
        raw = net.forward(self.scale(states))
        return dueling_combine(raw) if self.config.dueling else raw

    def q_values(self, state) -> np.ndarray:
        return self.q_net(self.online, state)

    def greedy(self, state) -> int:
        return int(np.argmax(self.q_values(state)))

    def epsilon(self) -> float:
        if self.steps < self.config.warmup:
            return 1.0
        return self.schedule.at(self.steps)

    def select_action(self, state, strategy: ExplorationStrategy, epsilon: float | None = None,
                      rng: RngStream | None = None) -> int:
        eps = self.epsilon() if epsilon is None else epsilon
        return epsilon_greedy(self.q_values(state), strategy, eps, rng or self.rng)

    def observe(self, state, action, reward, next_state, terminal) -> float | None:
        """Store a transition, advance the step counter, train once past warmup."""
        self.buffer.push(state, action, reward, next_state, terminal)
        self.steps += 1
        loss = None
        if self.steps >= self.config.warmup:
            batch = self.buffer.sample(self.config.batch_size, self.replay_rng)
            loss = dqn_update(self, batch)
        self._sync_target()
        return loss

    def _sync_target(self) -> None:
        cfg = self.config
        if cfg.tau is not None:
            self.target.soft_update(self.online, cfg.tau)
        elif self.steps % cfg.target_interval == 0:
            self.target.load_from(self.online)


def dqn_targets(agent: DqnAgent, batch: Batch) -> np.ndarray:
    cfg = agent.config
    q_next_target = agent.q_net(agent.target, batch.next_states)
    if cfg.double:
        best = agent.q_net(agent.online, batch.next_states).argmax(axis=1)
        next_value = q_next_target[np.arange(len(batch)), best]
    else:
        next_value = q_next_target.max(axis=1)
    return batch.rewards + cfg.gamma * (1.0 - batch.dones) * next_value


def dqn_update(agent: DqnAgent, batch: Batch) -> float:
    """One Adam step on the mean squared TD error; returns the pre-step loss."""
    if len(batch) == 0:
        raise EmptyBuffer("empty batch")
    y = dqn_targets(agent, batch)
    x = agent.scale(batch.states)
    raw, cache = agent.online.forward_cache(x)
    q = dueling_combine(raw) if agent.config.dueling else raw
    rows = np.arange(len(batch))
    acts = batch.actions.astype(np.int64)
    err = q[rows, acts] - y
    loss = float(np.mean(err * err))
    grad_q = np.zeros_like(q)
    grad_q[rows, acts] = 2.0 * err
    grad_raw = dueling_backward(grad_q) if agent.config.dueling else grad_q
    grads, _ = agent.online.backward(x, grad_raw, cache)
    adam_step(agent.optim, agent.online.params, grads)
    agent.updates += 1
    return loss
