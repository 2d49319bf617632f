"""Deterministic scripted backends used as test oracles and for offline runs.

Summary-stage prompts get an echo of the reward and action list. Every
other prompt is answered by the configured policy, which counts its own
calls so the i-th answer is always the same.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .types import ChatRequest, ChatResponse, Usage

SUMMARY_PREFIX = "You are describing the last episode"
GARBAGE_TEXT = "I think exploring up is best."


def fmt(value: float) -> str:
    """Four decimals with trailing zeros dropped: 0.3333, 0.1, -0.05, 0."""
    text = f"{value:.4f}".rstrip("0").rstrip(".")
    return "0" if text in ("", "-0") else text


def mapping_text(values: Sequence[float]) -> str:
    return "{" + ", ".join(f"{i + 1}: {fmt(v)}" for i, v in enumerate(values)) + "}"


class MockPolicy:
    kind = "base"

    def respond(self, call: int, prompt: str) -> str:
        raise NotImplementedError


@dataclass
class CannedSequence(MockPolicy):
    texts: list[str]
    kind = "canned-sequence"

    def respond(self, call: int, prompt: str) -> str:
        return self.texts[call % len(self.texts)]


@dataclass
class UniformText(MockPolicy):
    n: int
    continuous: bool = False
    kind = "uniform-text"

    def respond(self, call: int, prompt: str) -> str:
        if self.continuous:
            return mapping_text([0.0] * self.n)
        return mapping_text([1.0 / self.n] * self.n)


@dataclass
class Favor(MockPolicy):
    """Put ``weight`` on one action (0-based) and share the rest evenly,
    or, for continuous spaces, emit ``weight * direction`` as the bias."""

    n: int
    target: int | tuple[float, ...]
    weight: float = 0.8
    kind = "favor"

    def respond(self, call: int, prompt: str) -> str:
        if isinstance(self.target, tuple):
            return mapping_text([self.weight * d for d in self.target])
        rest = (1.0 - self.weight) / (self.n - 1)
        return mapping_text([self.weight if i == self.target else rest for i in range(self.n)])


@dataclass
class Garbage(MockPolicy):
    kind = "garbage"

    def respond(self, call: int, prompt: str) -> str:
        return GARBAGE_TEXT


@dataclass
class Seek(MockPolicy):
    """Bias proportional to (goal - mean position) of the last reported episode.

    Positions are rebuilt from the displacement list in the prompt as
    ``p_t = clip(p_{t-1} + step_scale * a_t)`` starting at ``start``.
    """

    goal: tuple[float, ...]
    gain: float = 0.3
    step_scale: float = 0.1
    start: tuple[float, ...] = (0.0, 0.0)
    low: float = -1.0
    high: float = 1.0
    kind = "seek"

    def mean_position(self, prompt: str) -> np.ndarray | None:
        actions = last_vector_list(prompt)
        if actions is None or actions.size == 0:
            return None
        pos = np.array(self.start, dtype=np.float64)
        path = []
        for a in actions:
            pos = np.clip(pos + self.step_scale * a, self.low, self.high)
            path.append(pos)
        return np.mean(path, axis=0)

    def respond(self, call: int, prompt: str) -> str:
        mean = self.mean_position(prompt)
        if mean is None:
            mean = np.array(self.start, dtype=np.float64)
        return mapping_text(self.gain * (np.asarray(self.goal) - mean))


_VECTOR_LIST = re.compile(r"\[\s*\[[^\[\]]*\](?:\s*,\s*\[[^\[\]]*\])*\s*\]")


def last_vector_list(text: str) -> np.ndarray | None:
    found = _VECTOR_LIST.findall(text)
    if not found:
        return None
    try:
        return np.array(ast.literal_eval(found[-1]), dtype=np.float64)
    except (ValueError, SyntaxError):
        return None


_REWARD = re.compile(r"total rewards? (?:is|are) ([^,]+?), and")
_LIST = re.compile(r"\[[^\[\]]*(?:\[[^\[\]]*\][^\[\]]*)*\]")


def default_summary(prompt: str) -> str:
    reward = _REWARD.search(prompt)
    lists = _LIST.findall(prompt)
    reward_text = reward.group(1) if reward else "unknown"
    actions = lists[-1] if lists else "[]"
    return (
        f"The agent finished the episode with total reward {reward_text}. "
        f"Sampled actions: {actions}. "
        "Recommendation: keep exploring actions that moved the agent toward reward."
    )


@dataclass
class MockBackend:
    policy: MockPolicy
    summary: object = default_summary
    calls: int = 0
    summary_calls: int = 0
    log: list = field(default_factory=list)

    def chat(self, request: ChatRequest) -> ChatResponse:
        prompt = request.prompt_text
        if prompt.startswith(SUMMARY_PREFIX):
            text = self.summary(prompt)
            self.summary_calls += 1
        else:
            text = self.policy.respond(self.calls, prompt)
            self.calls += 1
        self.log.append(text)
        return ChatResponse(text, Usage.estimate(prompt, text))


def parse_mock_spec(spec: str, action_spec) -> MockPolicy:
    """Build a policy from ``uniform-text``, ``garbage``, ``favor:<action|v1;v2>[:w]``,
    ``seek:<g1;g2>[:gain]`` or ``canned:<path>`` (one response per line)."""
    name, _, rest = spec.partition(":")
    n = action_spec.n if action_spec.is_discrete else action_spec.dim
    continuous = not action_spec.is_discrete
    if name == "uniform-text":
        return UniformText(n, continuous)
    if name == "garbage":
        return Garbage()
    if name == "favor":
        target_text, _, weight = rest.partition(":")
        w = float(weight) if weight else 0.8
        if continuous:
            return Favor(n, tuple(float(v) for v in target_text.split(";")), w)
        return Favor(n, int(target_text), w)
    if name == "seek":
        goal_text, _, gain = rest.partition(":")
        return Seek(tuple(float(v) for v in goal_text.split(";")), float(gain) if gain else 0.3)
    if name in ("canned", "canned-sequence"):
        with open(rest, encoding="utf-8") as fh:
            texts = [line.rstrip("\n") for line in fh if line.strip()]
        return CannedSequence(texts)
    raise ValueError(f"unknown mock policy {spec!r}")
