"""Per-cycle orchestration: trace sampling, the two model stages, parsing, safeguards."""

from __future__ import annotations

import hashlib
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

from ..core import Categorical, EpisodeRecord, ExplorationStrategy, Uniform
from ..envs.base import ActionSpec
from ..envs.description import TaskDescription
from ..errors import BothFailed, ConfigError, LlmExplorerError, NoEpisodes, ParseError
from ..llmclient.types import Backend, ChatRequest, Usage
from .parsing import parse_strategy
from .prompts import MODES, build_status_prompt, build_strategy_prompt, raw_trace_text
from .safeguards import (
    SAFEGUARDS, StrategyCandidate, adaptive_should_update, apply_safeguard, self_consistent_select, strategy_skew,
)

log = logging.getLogger(__name__)

SUMMARY_LIMIT = 8192


@dataclass
class ExplorerConfig:
    M: int = 100
    K: int = 1
    H: int = 1
    mode: str = "full"
    safeguard: str = "none"
    # None keeps the fixed K-episode interval
    adaptive_G: float | None = None
    retries: int = 3
    temperature: float = 1.0
    model: str = "mock"
    bias_cap: float = 0.5

    def __post_init__(self):
        if self.M < 1 or self.K < 1:
            raise ConfigError("M and K must be at least 1")
        if not 1 <= self.H <= 5:
            raise ConfigError("H must lie in 1..5")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.safeguard not in SAFEGUARDS:
            raise ConfigError(f"safeguard must be one of {SAFEGUARDS}")
        if self.adaptive_G is not None and not 0 < self.adaptive_G < 1:
            raise ConfigError("adaptive G must lie in (0, 1)")
        if self.retries < 1:
            raise ConfigError("retry limit must be at least 1")


@dataclass
class Exchange:
    cycle: int
    stage: str  # "summary" | "strategy"
    prompt_sha256: str
    response: str
    prompt_tokens: int
    completion_tokens: int
    latency_ms: float
    error: str | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class CycleOutcome:
    strategy: ExplorationStrategy
    fallback: str | None = None  # "parse" | "transport" | "kl" | None
    skew: float = 0.0
    calls: int = 0


@dataclass
class ExplorerState:
    config: ExplorerConfig = field(default_factory=ExplorerConfig)
    strategy: ExplorationStrategy = field(default_factory=Uniform)
    previous: ExplorationStrategy | None = None
    kl_history: list[float] = field(default_factory=list)
    returns: list[float] = field(default_factory=list)
    since_update: int = 0
    usage: Usage = field(default_factory=Usage)
    cycles: int = 0
    fallbacks: int = 0
    llm_calls: int = 0
    exchanges: list[Exchange] = field(default_factory=list)
    # called with every Exchange as it happens, e.g. to stream a JSONL log
    sink: Callable[[Exchange], None] | None = None

    def episode_finished(self, total_return: float) -> None:
        self.returns.append(float(total_return))
        self.since_update += 1

    def due(self) -> bool:
        if self.since_update == 0:
            return False
        if self.config.adaptive_G is not None:
            return adaptive_should_update(self.returns, self.config.adaptive_G)
        return self.since_update >= self.config.K

    def install(self, strategy: ExplorationStrategy) -> None:
        self.previous = self.strategy
        self.strategy = strategy


def sample_action_trace(episodes: Sequence[EpisodeRecord], M: int, H: int = 1) -> list:
    """Concatenated evenly spaced actions from each of the last ``H`` episodes."""
    return [a for trace in _traces(episodes, M, H) for a in trace]


def _traces(episodes: Sequence[EpisodeRecord], M: int, H: int) -> list[list]:
    if not episodes:
        raise NoEpisodes("no finished episode to sample from")
    if H > len(episodes):
        raise NoEpisodes(f"history depth {H} exceeds the {len(episodes)} available episodes")
    out = []
    for ep in episodes[-H:]:
        L = ep.length
        if L <= M:
            out.append(list(ep.actions))
        else:
            out.append([ep.actions[(i * L) // M] for i in range(M)])
    return out


def _call(state: ExplorerState, backend: Backend, prompt: str, stage: str) -> str:
    cfg = state.config
    request = ChatRequest.single(prompt, cfg.model, cfg.temperature)
    digest = hashlib.sha256(prompt.encode("utf-8")).hexdigest()
    start = time.perf_counter()
    try:
        response = backend.chat(request)
    except LlmExplorerError as exc:
        state.llm_calls += 1
        _record(state, Exchange(state.cycles, stage, digest, "", 0, 0,
                                (time.perf_counter() - start) * 1e3, error=f"{type(exc).__name__}: {exc}"))
        raise
    state.llm_calls += 1
    state.usage = state.usage + response.usage
    _record(state, Exchange(state.cycles, stage, digest, response.text, response.usage.prompt_tokens,
                            response.usage.completion_tokens, (time.perf_counter() - start) * 1e3))
    return response.text


def _record(state: ExplorerState, exchange: Exchange) -> None:
    state.exchanges.append(exchange)
    if state.sink is not None:
        state.sink(exchange)


def _candidate(state: ExplorerState, backend: Backend, prompt: str, spec: ActionSpec) -> StrategyCandidate:
    text = _call(state, backend, prompt, "strategy")
    try:
        return StrategyCandidate(text, strategy=parse_strategy(text, spec, state.config.bias_cap))
    except ParseError as exc:
        return StrategyCandidate(text, error=exc)


def _generate(state: ExplorerState, backend: Backend, prompt: str, spec: ActionSpec) -> ExplorationStrategy | None:
    """Up to ``retries`` attempts; with self-consistency each attempt samples twice."""
    pair = state.config.safeguard == "self-consistency"
    for _ in range(state.config.retries):
        first = _candidate(state, backend, prompt, spec)
        if not pair:
            if first.ok:
                return first.strategy
            continue
        second = _candidate(state, backend, prompt, spec)
        try:
            return self_consistent_select(first, second)
        except BothFailed:
            continue
    return None


def update_cycle(state: ExplorerState, episodes: Sequence[EpisodeRecord], spec: ActionSpec,
                 desc: TaskDescription, backend: Backend) -> CycleOutcome:
    """Run one strategy update and install the result on ``state``.

    Transport failures and exhausted retries both keep the current strategy
    (Uniform before the first success) and are reported as a fallback.
    """
    cfg = state.config
    calls_before = state.llm_calls
    traces = _traces(episodes, cfg.M, cfg.H)
    rewards = [ep.total_return for ep in episodes[-cfg.H:]]
    fallback = None
    strategy: ExplorationStrategy | None = None
    try:
        if cfg.mode == "no-summary":
            summary = raw_trace_text(traces, rewards)
        else:
            summary = _call(state, backend, build_status_prompt(desc, traces, rewards, cfg.mode), "summary")
            if len(summary) > SUMMARY_LIMIT:
                log.warning("summary of %d chars truncated to %d", len(summary), SUMMARY_LIMIT)
                summary = summary[:SUMMARY_LIMIT]
        prompt = build_strategy_prompt(desc, summary, spec, cfg.mode)
        strategy = _generate(state, backend, prompt, spec)
        if strategy is None:
            fallback = "parse"
    except LlmExplorerError as exc:
        log.warning("model call failed, keeping current strategy: %s", exc)
        fallback = "transport"

    if strategy is not None and isinstance(strategy, Categorical):
        decision, state.kl_history = apply_safeguard(strategy_skew(strategy), state.kl_history, cfg.safeguard)
        if not decision.accepted:
            fallback = "kl"
            strategy = Uniform() if decision.fallback == "uniform" else None

    if strategy is not None:
        state.install(strategy)
    if fallback is not None:
        state.fallbacks += 1
    state.cycles += 1
    state.since_update = 0
    return CycleOutcome(state.strategy, fallback, strategy_skew(state.strategy), state.llm_calls - calls_before)


class Explorer:
    """Binds an ExplorerState to a backend, an action space and a task description."""

    def __init__(self, backend: Backend, spec: ActionSpec, desc: TaskDescription,
                 config: ExplorerConfig | None = None, sink=None):
        self.backend = backend
        self.spec = spec
        self.desc = desc
        self.state = ExplorerState(config or ExplorerConfig(), sink=sink)
        self.episodes: list[EpisodeRecord] = []

    @property
    def strategy(self) -> ExplorationStrategy:
        return self.state.strategy

    def end_episode(self, record: EpisodeRecord) -> CycleOutcome | None:
        """Record a finished episode and run a cycle if one is due."""
        if record.length == 0:
            return None
        self.episodes.append(record)
        del self.episodes[: -self.state.config.H]
        self.state.episode_finished(record.total_return)
        if self.state.due() and len(self.episodes) >= self.state.config.H:
            return update_cycle(self.state, self.episodes, self.spec, self.desc, self.backend)
        return None


__all__ = [
    "CycleOutcome", "Exchange", "Explorer", "ExplorerConfig", "ExplorerState",
    "sample_action_trace", "update_cycle",
]
