from __future__ import annotations

from ..errors import ConfigError
from .base import ActionSpec, Env, StepResult
from .description import TaskDescription, load_description
from .freeway import ToyFreeway
from .gridworld import GridWorld
from .oracle import optimal_return_oracle, value_iteration
from .pointmass import PointMass
from .trivial import SingleStateEnv

ENVS = {cls.env_id: cls for cls in (ToyFreeway, GridWorld, PointMass, SingleStateEnv)}


def make_env(env_id: str, **kw):
    try:
        return ENVS[env_id](**kw)
    except KeyError:
        raise ConfigError(f"unknown env {env_id!r}; choose from {sorted(ENVS)}") from None


def env_spec(env, desc_dir=None) -> tuple[ActionSpec, TaskDescription]:
    return env.action_spec, load_description(env.env_id, desc_dir)


__all__ = [
    "ENVS", "ActionSpec", "Env", "GridWorld", "PointMass", "SingleStateEnv", "StepResult",
    "TaskDescription", "ToyFreeway", "env_spec", "load_description", "make_env",
    "optimal_return_oracle", "value_iteration",
]
