"""Exact dynamic-programming oracles for the finite toy environments."""

from __future__ import annotations

import numpy as np

from ..errors import Unsupported


def _require_finite(env) -> None:
    if not env.action_spec.is_discrete or not hasattr(env, "transition"):
        raise Unsupported(f"{type(env).__name__} has no finite tabular model")


def _tables(env):
    n_s, n_a = env.n_states, env.action_spec.n
    nxt = np.zeros((n_s, n_a), dtype=np.int64)
    rew = np.zeros((n_s, n_a))
    term = np.zeros((n_s, n_a), dtype=bool)
    for s in range(n_s):
        for a in range(n_a):
            nxt[s, a], rew[s, a], term[s, a] = env.transition(s, a)
    return nxt, rew, term


def value_iteration(env, gamma: float = 0.99, tol: float = 1e-10, max_iter: int = 100_000) -> np.ndarray:
    """Discounted optimal action values, iterated until the sup-norm change < ``tol``."""
    _require_finite(env)
    nxt, rew, term = _tables(env)
    cont = gamma * (~term)
    v = np.zeros(env.n_states)
    for _ in range(max_iter):
        q = rew + cont * v[nxt]
        v_new = q.max(axis=1)
        if np.max(np.abs(v_new - v)) < tol:
            v = v_new
            break
        v = v_new
    return rew + cont * v[nxt]


def optimal_actions(q: np.ndarray, tol: float = 1e-9) -> list[frozenset[int]]:
    """Per state, every action whose value is within ``tol`` of the best."""
    best = q.max(axis=1, keepdims=True)
    return [frozenset(np.flatnonzero(row >= b - tol).tolist()) for row, b in zip(q, best)]


def finite_horizon_values(env) -> np.ndarray:
    """Undiscounted optimal values ``V[t, s]`` for t = 0..horizon by backward induction."""
    _require_finite(env)
    nxt, rew, term = _tables(env)
    v = np.zeros((env.horizon + 1, env.n_states))
    for t in range(env.horizon - 1, -1, -1):
        q = rew + (~term) * v[t + 1][nxt]
        v[t] = q.max(axis=1)
    return v


def optimal_return_oracle(env) -> float:
    """Exact best undiscounted episode return from the initial state."""
    v = finite_horizon_values(env)
    return float(v[0, env.initial_state_index()])


def reachable_states(env, exclude_terminal: bool = True) -> set[int]:
    """States reachable from the start without passing through a terminal transition."""
    _require_finite(env)
    start = env.initial_state_index()
    seen = {start}
    frontier = [start]
    while frontier:
        s = frontier.pop()
        for a in range(env.action_spec.n):
            s2, _, terminal = env.transition(s, a)
            if terminal and exclude_terminal:
                continue
            if s2 not in seen:
                seen.add(s2)
                frontier.append(s2)
    return seen
