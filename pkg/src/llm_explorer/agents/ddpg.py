"""DDPG and TD3 over the hand-rolled MLP."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import ExplorationStrategy, RngStream
from ..errors import EmptyBuffer
from ..neural import AdamState, Mlp, adam_step, make_mlp
from .dqn import StateScaler
from .exploration import gaussian_explore
from .replay import Batch, ReplayBuffer


@dataclass
class ActorCriticConfig:
    gamma: float = 0.99
    batch_size: int = 256
    actor_lr: float = 1e-5
    critic_lr: float = 1e-4
    buffer_size: int = 10_000
    target_interval: int = 1000
    tau: float | None = None
    warmup: int = 1000
    sigma: float = 0.1
    # TD3 only
    policy_noise: float = 0.2
    noise_clip: float = 0.5
    policy_delay: int = 2
    update_iterations: int = 10


class DdpgAgent:
    n_critics = 1

    def __init__(self, state_dim: int, low, high, rng: RngStream, config: ActorCriticConfig | None = None,
                 state_low=None, state_high=None):
        self.config = cfg = config or ActorCriticConfig()
        self.low = np.asarray(low, dtype=np.float64)
        self.high = np.asarray(high, dtype=np.float64)
        self.action_dim = self.low.size
        self.rng = rng
        self.replay_rng = rng.child("replay")
        init = rng.child("init")
        self.actor = make_mlp(state_dim, self.action_dim, init, output="tanh", low=self.low, high=self.high)
        self.critics = [make_mlp(state_dim + self.action_dim, 1, init) for _ in range(self.n_critics)]
        self.actor_target = self.actor.copy()
        self.critic_targets = [c.copy() for c in self.critics]
        self.actor_optim = AdamState.for_params(self.actor.params, lr=cfg.actor_lr)
        self.critic_optims = [AdamState.for_params(c.params, lr=cfg.critic_lr) for c in self.critics]
        self.buffer = ReplayBuffer(cfg.buffer_size, state_dim, self.action_dim)
        if state_low is None:
            state_low, state_high = -np.ones(state_dim), np.ones(state_dim)
        self.scale = StateScaler(state_low, state_high)
        self.steps = 0
        self.calls = 0

    @property
    def critic(self) -> Mlp:
        return self.critics[0]

    def act(self, state) -> np.ndarray:
        return self.actor.forward(self.scale(state))

    def critic_input(self, states, actions) -> np.ndarray:
        return np.concatenate([self.scale(states), np.atleast_2d(actions)], axis=-1)

    def q(self, critic: Mlp, states, actions) -> np.ndarray:
        return critic.forward(self.critic_input(states, actions))[..., 0]

    def select_action(self, state, strategy: ExplorationStrategy, rng: RngStream | None = None,
                      sigma: float | None = None) -> np.ndarray:
        """clip(mu(s) + N(bias, sigma^2)); before warmup ends mu(s) is replaced by 0."""
        sigma = self.config.sigma if sigma is None else sigma
        if self.steps < self.config.warmup:
            mean = np.zeros(self.action_dim)
        else:
            mean = self.act(state)
        return gaussian_explore(mean, strategy, sigma, self.low, self.high, rng or self.rng)

    def observe(self, state, action, reward, next_state, terminal):
        self.buffer.push(state, action, reward, next_state, terminal)
        self.steps += 1
        out = None
        if self.steps >= self.config.warmup:
            out = self.train_step()
        self._maybe_sync()
        return out

    def train_step(self):
        batch = self.buffer.sample(self.config.batch_size, self.replay_rng)
        return ddpg_update(self, batch)

    def _maybe_sync(self) -> None:
        cfg = self.config
        if cfg.tau is not None:
            self.actor_target.soft_update(self.actor, cfg.tau)
            for t, c in zip(self.critic_targets, self.critics):
                t.soft_update(c, cfg.tau)
        elif self.steps % cfg.target_interval == 0:
            self.sync_targets()

    def sync_targets(self) -> None:
        self.actor_target.load_from(self.actor)
        for t, c in zip(self.critic_targets, self.critics):
            t.load_from(c)


def _critic_step(agent: DdpgAgent, critic: Mlp, optim: AdamState, batch: Batch, y: np.ndarray) -> float:
    x = agent.critic_input(batch.states, batch.actions)
    pred, cache = critic.forward_cache(x)
    err = pred[:, 0] - y
    loss = float(np.mean(err * err))
    grads, _ = critic.backward(x, (2.0 * err)[:, None], cache)
    adam_step(optim, critic.params, grads)
    return loss


def _actor_step(agent: DdpgAgent, batch: Batch) -> float:
    """Gradient ascent on mean Q1(s, mu(s)); returns the pre-step loss -mean Q."""
    s = agent.scale(batch.states)
    mu, a_cache = agent.actor.forward_cache(s)
    x = np.concatenate([s, mu], axis=1)
    qv, c_cache = agent.critic.forward_cache(x)
    loss = -float(np.mean(qv))
    _, dq_dx = agent.critic.backward(x, -np.ones_like(qv), c_cache)
    dmu = dq_dx[:, s.shape[1]:]
    grads, _ = agent.actor.backward(s, dmu, a_cache)
    adam_step(agent.actor_optim, agent.actor.params, grads)
    return loss


def ddpg_targets(agent: DdpgAgent, batch: Batch) -> np.ndarray:
    next_mu = agent.actor_target.forward(agent.scale(batch.next_states))
    next_q = agent.q(agent.critic_targets[0], batch.next_states, next_mu)
    return batch.rewards + agent.config.gamma * (1.0 - batch.dones) * next_q


def ddpg_update(agent: DdpgAgent, batch: Batch) -> tuple[float, float]:
    if len(batch) == 0:
        raise EmptyBuffer("empty batch")
    y = ddpg_targets(agent, batch)
    critic_loss = _critic_step(agent, agent.critic, agent.critic_optims[0], batch, y)
    actor_loss = _actor_step(agent, batch)
    agent.calls += 1
    return critic_loss, actor_loss


class Td3Agent(DdpgAgent):
    """Twin critics, target smoothing, delayed actor.

    Training runs every ``update_iterations`` env steps with that many inner
    iterations, so gradient steps per env step match DDPG.
    """

    n_critics = 2

    def __init__(self, *args, **kw):
        super().__init__(*args, **kw)
        self.smooth_rng = self.rng.child("policy-noise")
        self._sync_due = False

    def train_step(self):
        if self.steps % self.config.update_iterations != 0:
            return None
        batch = self.buffer.sample(self.config.batch_size, self.replay_rng)
        self.calls += 1
        return td3_update(self, batch, self.calls)

    def _maybe_sync(self) -> None:
        # targets move inside td3_update on the delayed branch
        if self.steps < self.config.warmup:
            return
        if self.config.tau is None and self.steps % self.config.target_interval == 0:
            self._sync_due = True


def td3_targets(agent: Td3Agent, batch: Batch, noise: np.ndarray | None = None) -> np.ndarray:
    cfg = agent.config
    next_mu = agent.actor_target.forward(agent.scale(batch.next_states))
    if noise is None:
        noise = agent.smooth_rng.gen.normal(size=next_mu.shape) * cfg.policy_noise
    noise = np.clip(noise, -cfg.noise_clip, cfg.noise_clip)
    next_a = np.clip(next_mu + noise, agent.low, agent.high)
    q1 = agent.q(agent.critic_targets[0], batch.next_states, next_a)
    q2 = agent.q(agent.critic_targets[1], batch.next_states, next_a)
    return batch.rewards + cfg.gamma * (1.0 - batch.dones) * np.minimum(q1, q2)


def td3_update(agent: Td3Agent, batch: Batch, step: int) -> dict:
    """``update_iterations`` inner loops; the first uses ``batch``, the rest resample.

    The actor and targets move only when ``step % policy_delay == 0``.
    """
    if len(batch) == 0:
        raise EmptyBuffer("empty batch")
    cfg = agent.config
    critic_losses: list[float] = []
    actor_losses: list[float] = []
    delayed = step % cfg.policy_delay == 0
    for it in range(cfg.update_iterations):
        if it > 0:
            batch = agent.buffer.sample(cfg.batch_size, agent.replay_rng)
        y = td3_targets(agent, batch)
        critic_losses.append(
            float(np.mean([_critic_step(agent, c, o, batch, y) for c, o in zip(agent.critics, agent.critic_optims)]))
        )
        if delayed:
            actor_losses.append(_actor_step(agent, batch))
            if cfg.tau is not None:
                agent.actor_target.soft_update(agent.actor, cfg.tau)
                for t, c in zip(agent.critic_targets, agent.critics):
                    t.soft_update(c, cfg.tau)
    if delayed and agent._sync_due:
        agent.sync_targets()
        agent._sync_due = False
    return {
        "critic_loss": float(np.mean(critic_losses)),
        "actor_loss": float(np.mean(actor_losses)) if actor_losses else None,
        "actor_updated": delayed,
    }
