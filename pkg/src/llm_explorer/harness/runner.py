"""Training loop that streams a deterministic per-episode RunLog.

Randomness comes from named children of ``RngStream(seed, "run")``: ``env``,
``agent``, ``explore`` and ``eval``. Model calls draw nothing from these, so
swapping the backend cannot shift the agent's random numbers.

Files written under ``<out>/<run_name>/``:

- ``config.json``: the RunConfig
- ``runlog.jsonl``: one record per finished training episode, no wall-clock data
- ``exchanges.jsonl``: one record per model call
- ``timing.jsonl``: wall-clock milliseconds per episode (kept apart so the
  RunLog stays byte-identical across reruns)
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..agents import ActorCriticConfig, DdpgAgent, DqnAgent, DqnConfig, EpsilonSchedule, TabularQAgent, Td3Agent
from ..core import Biased, Categorical, EpisodeRecord, ExplorationStrategy, RngStream, Uniform
from ..envs import env_spec, make_env
from ..errors import ConfigError
from ..explorer.pipeline import Explorer
from ..explorer.safeguards import strategy_skew
from ..llmclient import HttpBackend, MockBackend, RecordingBackend, ReplayBackend, parse_mock_spec
from ..llmclient.http import DEFAULT_BASE_URL, DEFAULT_MODEL
from .config import RunConfig


def resolve_model(spec: str | None, model: str | None) -> str:
    if model:
        return model
    return DEFAULT_MODEL if spec == "http" else "mock"


def build_backend(spec: str, action_spec, base_url: str | None = None, record: str | None = None):
    if spec == "http":
        backend = HttpBackend(base_url or DEFAULT_BASE_URL)
    elif spec.startswith("mock:"):
        backend = MockBackend(parse_mock_spec(spec[len("mock:"):], action_spec))
    elif spec.startswith("replay:"):
        backend = ReplayBackend(spec[len("replay:"):])
    else:
        raise ConfigError(f"llm backend must be http, mock:<policy> or replay:<file>, got {spec!r}")
    if record:
        backend = RecordingBackend(backend, record)
    return backend


class TabularLearner:
    def __init__(self, env, rng: RngStream):
        self.env = env
        self.agent = TabularQAgent(env.n_states, env.action_spec.n)
        self.schedule = EpsilonSchedule()
        self.steps = 0

    def epsilon(self) -> float:
        return self.schedule.at(self.steps)

    def act(self, state, strategy, rng):
        return self.agent.select_action(self.env.state_index(state), strategy, self.epsilon(), rng)

    def observe(self, s, a, r, s2, terminal):
        self.agent.update(self.env.state_index(s), a, r, self.env.state_index(s2), terminal)
        self.steps += 1

    def greedy(self, state):
        return int(np.argmax(self.agent.table[self.env.state_index(state)]))


class DqnLearner:
    def __init__(self, env, rng: RngStream, dueling: bool = False):
        cfg = DqnConfig(double=dueling, dueling=dueling)
        self.agent = DqnAgent(env.state_dim, env.action_spec.n, rng, cfg, env.state_low, env.state_high)

    def epsilon(self) -> float:
        return self.agent.epsilon()

    def act(self, state, strategy, rng):
        return self.agent.select_action(state, strategy, rng=rng)

    def observe(self, s, a, r, s2, terminal):
        self.agent.observe(s, a, r, s2, terminal)

    def greedy(self, state):
        return self.agent.greedy(state)


class ActorCriticLearner:
    def __init__(self, env, rng: RngStream, td3: bool = False):
        cls = Td3Agent if td3 else DdpgAgent
        spec = env.action_spec
        self.agent = cls(env.state_dim, spec.low_array, spec.high_array, rng, ActorCriticConfig(),
                         env.state_low, env.state_high)

    def epsilon(self):
        return None

    def act(self, state, strategy, rng):
        return self.agent.select_action(state, strategy, rng=rng)

    def observe(self, s, a, r, s2, terminal):
        self.agent.observe(s, a, r, s2, terminal)

    def greedy(self, state):
        return self.agent.act(state)


def build_learner(algo: str, env, rng: RngStream):
    if algo == "tabular-q":
        if not hasattr(env, "n_states"):
            raise ConfigError(f"tabular-q needs a finite env, {env.env_id} is continuous")
        return TabularLearner(env, rng)
    if algo in ("dqn", "double-dueling-dqn"):
        return DqnLearner(env, rng, dueling=algo == "double-dueling-dqn")
    return ActorCriticLearner(env, rng, td3=algo == "td3")


def action_digest(actions) -> str:
    h = hashlib.sha256()
    for a in actions:
        h.update(np.asarray(a, dtype=np.float64).tobytes())
    return h.hexdigest()[:16]


def strategy_kind(strategy: ExplorationStrategy) -> str:
    if isinstance(strategy, Categorical):
        return "categorical"
    if isinstance(strategy, Biased):
        return "biased"
    return "uniform"


def strategy_payload(strategy: ExplorationStrategy):
    if isinstance(strategy, Categorical):
        return [float(p) for p in strategy.dist.probs]
    if isinstance(strategy, Biased):
        return [float(b) for b in strategy.bias.bias]
    return None


def greedy_return(env_id: str, learner, rng: RngStream) -> float:
    env = make_env(env_id)
    state = env.reset(rng)
    total = 0.0
    while True:
        result = env.step(learner.greedy(state))
        total += result.reward
        state = result.next_state
        if result.done:
            return total


def _dumps(record: dict) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


@dataclass
class RunLog:
    records: list[dict] = field(default_factory=list)
    path: Path | None = None
    exchanges: list[dict] = field(default_factory=list)
    # the trained learner; in-memory only, never serialized
    learner: object = field(default=None, repr=False, compare=False)

    @property
    def returns(self) -> list[float]:
        return [r["return"] for r in self.records]

    def metric(self, key: str = "eval_return") -> list[float]:
        return [r[key] if r.get(key) is not None else r["return"] for r in self.records]

    def to_jsonl(self) -> str:
        return "".join(_dumps(r) + "\n" for r in self.records)


def read_runlog(path) -> RunLog:
    path = Path(path)
    records = [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    return RunLog(records, path)


class _Writer:
    def __init__(self, directory: Path | None):
        self.files = {}
        self.directory = directory
        if directory is not None:
            directory.mkdir(parents=True, exist_ok=True)
            for name in ("runlog", "exchanges", "timing"):
                self.files[name] = (directory / f"{name}.jsonl").open("w", encoding="utf-8")

    def write(self, name: str, record: dict) -> None:
        fh = self.files.get(name)
        if fh is not None:
            fh.write(_dumps(record) + "\n")
            fh.flush()

    def close(self) -> None:
        for fh in self.files.values():
            fh.close()


def run_experiment(config: RunConfig) -> RunLog:
    env = make_env(config.env)
    spec, desc = env_spec(env, config.desc_dir)
    root = RngStream(config.seed, "run")
    env_rng, explore_rng, eval_rng = root.child("env"), root.child("explore"), root.child("eval")
    learner = build_learner(config.algo, env, root.child("agent"))

    out_dir = Path(config.out) / config.run_name if config.out else None
    writer = _Writer(out_dir)
    if out_dir is not None:
        (out_dir / "config.json").write_text(_dumps(config.to_dict()) + "\n", encoding="utf-8")
    log = RunLog(path=out_dir / "runlog.jsonl" if out_dir else None, learner=learner)

    explorer = None
    if config.explorer == "llm":
        backend = build_backend(config.llm, spec, config.base_url, config.record)
        ecfg = dataclasses.replace(config.explorer_config, model=resolve_model(config.llm, config.model))

        def sink(exchange):
            rec = exchange.to_dict()
            log.exchanges.append(rec)
            writer.write("exchanges", rec)

        explorer = Explorer(backend, spec, desc, ecfg, sink=sink)

    steps = 0
    episode = 0
    tracked: list[float] = []
    try:
        while steps < config.steps:
            if config.max_episodes is not None and episode >= config.max_episodes:
                break
            started = time.perf_counter()
            strategy = explorer.strategy if explorer else Uniform()
            epsilon = learner.epsilon()
            record = EpisodeRecord()
            state = env.reset(env_rng)
            finished = False
            while steps < config.steps:
                action = learner.act(state, strategy, explore_rng)
                result = env.step(action)
                learner.observe(state, action, result.reward, result.next_state, result.terminal)
                record.append(action if spec.is_discrete else [float(v) for v in action], result.reward)
                state = result.next_state
                steps += 1
                if result.done:
                    finished = True
                    break
            if not finished:
                break

            entry = {
                "episode": episode,
                "steps": steps,
                "length": record.length,
                "return": record.total_return,
                "epsilon": epsilon,
                "strategy": strategy_kind(strategy),
                "skew": strategy_skew(strategy),
                "action_digest": action_digest(record.actions),
            }
            if config.eval_episodes:
                entry["eval_return"] = float(np.mean(
                    [greedy_return(config.env, learner, eval_rng) for _ in range(config.eval_episodes)]
                ))
            outcome = explorer.end_episode(record) if explorer else None
            st = explorer.state if explorer else None
            entry.update({
                "cycle": outcome is not None,
                "fallback": outcome.fallback if outcome else None,
                "fallbacks": st.fallbacks if st else 0,
                "llm_calls": st.llm_calls if st else 0,
                "tokens_in": st.usage.prompt_tokens if st else 0,
                "tokens_out": st.usage.completion_tokens if st else 0,
                "next_strategy": strategy_payload(explorer.strategy) if explorer else None,
            })
            log.records.append(entry)
            writer.write("runlog", entry)
            writer.write("timing", {"episode": episode, "wall_ms": (time.perf_counter() - started) * 1e3})
            episode += 1

            tracked.append(entry.get("eval_return", entry["return"]))
            if config.stop_return is not None and len(tracked) >= config.stop_window:
                if float(np.mean(tracked[-config.stop_window:])) >= config.stop_return:
                    break
    finally:
        writer.close()
    return log


def episodes_to_threshold(values, threshold: float, window: int = 10) -> int | None:
    """1-based episode count at which the trailing ``window`` mean first reaches ``threshold``."""
    values = list(values)
    for i in range(window, len(values) + 1):
        if float(np.mean(values[i - window:i])) >= threshold:
            return i
    return None
