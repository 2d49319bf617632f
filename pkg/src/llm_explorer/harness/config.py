from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from ..envs import make_env
from ..errors import ConfigError
from ..explorer.pipeline import ExplorerConfig

ALGOS = ("tabular-q", "dqn", "double-dueling-dqn", "ddpg", "td3")
CONTINUOUS_ALGOS = ("ddpg", "td3")


@dataclass
class RunConfig:
    env: str = "toy_freeway"
    algo: str = "dqn"
    explorer: str = "none"  # "none" | "llm"
    llm: str | None = None  # "http" | "mock:<policy>" | "replay:<file>"
    # None picks the HTTP default model for --llm http and "mock" otherwise
    model: str | None = None
    base_url: str | None = None
    record: str | None = None  # append exchanges to this cache file
    steps: int = 100_000
    seed: int = 0
    out: str | None = None
    explorer_config: ExplorerConfig = field(default_factory=ExplorerConfig)
    # greedy evaluation episodes after each training episode; 0 disables
    eval_episodes: int = 1
    max_episodes: int | None = None
    # stop once the trailing mean of the tracked metric reaches this value
    stop_return: float | None = None
    stop_window: int = 10
    desc_dir: str | None = None
    variant: str | None = None

    def __post_init__(self):
        if isinstance(self.explorer_config, dict):
            self.explorer_config = ExplorerConfig(**self.explorer_config)
        self.validate()

    def validate(self) -> None:
        if self.algo not in ALGOS:
            raise ConfigError(f"algo must be one of {ALGOS}")
        if self.explorer not in ("none", "llm"):
            raise ConfigError("explorer must be 'none' or 'llm'")
        if self.explorer == "llm" and not self.llm:
            raise ConfigError("explorer=llm needs an llm backend spec")
        if self.steps < 0:
            raise ConfigError("steps must be non-negative")
        if self.eval_episodes < 0 or self.stop_window < 1:
            raise ConfigError("eval_episodes must be >= 0 and stop_window >= 1")
        continuous = not make_env(self.env).action_spec.is_discrete
        if continuous != (self.algo in CONTINUOUS_ALGOS):
            raise ConfigError(f"algo {self.algo} does not fit the action space of {self.env}")

    @property
    def label(self) -> str:
        if self.variant:
            return self.variant
        if self.explorer == "none":
            return self.algo
        return f"{self.algo}+llm"

    @property
    def run_name(self) -> str:
        return f"{self.label}-seed{self.seed}".replace(":", "_").replace("/", "_")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        return cls(**data)


def load_config_file(path) -> dict:
    """Flat JSON object whose keys mirror the CLI flags (``adaptive_G``, ``M``, ...)."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data
