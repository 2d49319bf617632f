"""Prompt construction from the bundled text templates.

Templates use named ``{Slot}`` markers filled by plain string replacement,
so literal braces such as ``{1: [probability], ...}`` pass through untouched.
"""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from ..envs.base import ActionSpec
from ..envs.description import TaskDescription

TEMPLATE_DIR = Path(__file__).with_name("templates")
MODES = ("full", "no-summary", "name-only")
GEN_MODES = {
    "template+one-shot": "describe_template_one_shot.txt",
    "one-shot": "describe_one_shot.txt",
    "template": "describe_template.txt",
    "zero-shot": "describe_zero_shot.txt",
}


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    return (TEMPLATE_DIR / name).read_text(encoding="utf-8").strip()


def fill(template: str, **slots: str) -> str:
    for name, value in slots.items():
        template = template.replace("{" + name.replace("_", "&") + "}", value)
    return template


def _clause(text: str) -> str:
    """Drop one trailing period so the template's own period is not doubled."""
    text = text.strip()
    return text[:-1] if text.endswith(".") else text


def _num(v: float) -> str:
    v = float(v)
    return repr(int(v)) if v.is_integer() and abs(v) < 1e15 else f"{v:.4g}"


def format_action(action) -> str:
    if isinstance(action, (int, np.integer)):
        return str(int(action))
    arr = np.asarray(action, dtype=np.float64).reshape(-1)
    return "[" + ", ".join(f"{v:.2f}" for v in arr) + "]"


def format_trace(trace: Sequence) -> str:
    return "[" + ", ".join(format_action(a) for a in trace) + "]"


def format_reward(reward: float) -> str:
    return f"{float(reward):.2f}"


def _reward_and_trace(traces: Sequence[Sequence], rewards: Sequence[float]) -> tuple[str, str]:
    if len(traces) == 1:
        return format_reward(rewards[0]), format_trace(traces[0])
    return (
        "[" + ", ".join(format_reward(r) for r in rewards) + "]",
        "[" + ", ".join(format_trace(t) for t in traces) + "]",
    )


def render_description(desc: TaskDescription, mode: str) -> str:
    return _clause(desc.render("name-only" if mode == "name-only" else "full"))


def build_status_prompt(desc: TaskDescription, traces: Sequence[Sequence], rewards: Sequence[float],
                        mode: str = "full") -> str:
    """Learning-status prompt; ``traces`` and ``rewards`` hold one entry per history episode."""
    if mode == "no-summary":
        raise ValueError("no-summary mode has no status stage")
    if not traces or any(len(t) == 0 for t in traces):
        raise ValueError("status prompt needs a non-empty action trace")
    reward_text, trace_text = _reward_and_trace(traces, rewards)
    template = load_template("status.txt" if len(traces) == 1 else "status_multi.txt")
    return fill(template, TaskDescription=render_description(desc, mode), EpisodeReward=reward_text,
                ActionSequence=trace_text, EpisodeCount=str(len(traces)))


def output_format(spec: ActionSpec) -> str:
    if spec.is_discrete:
        return fill(load_template("output_discrete.txt"), ActionNum=str(spec.n))
    return fill(load_template("output_continuous.txt"), ActionDim=str(spec.dim))


def raw_trace_text(traces: Sequence[Sequence], rewards: Sequence[float]) -> str:
    reward_text, trace_text = _reward_and_trace(traces, rewards)
    template = load_template("raw_trace.txt" if len(traces) == 1 else "raw_trace_multi.txt")
    return fill(template, EpisodeReward=reward_text, ActionSequence=trace_text, EpisodeCount=str(len(traces)))


def build_strategy_prompt(desc: TaskDescription, summary_text: str, spec: ActionSpec, mode: str = "full") -> str:
    """Strategy prompt. In no-summary mode pass :func:`raw_trace_text` as ``summary_text``."""
    return fill(load_template("strategy.txt"), TaskDescription=render_description(desc, mode),
                Summary_Suggestion=_clause(summary_text), OutputFormat=_clause(output_format(spec)))


def build_description_prompt(task_name: str, gen_mode: str) -> str:
    try:
        template = load_template(GEN_MODES[gen_mode])
    except KeyError:
        raise ValueError(f"unknown generation mode {gen_mode!r}; choose from {sorted(GEN_MODES)}") from None
    return fill(template, TaskName=task_name,
                TaskDescriptionFormat=_clause(load_template("description_format.txt")),
                TaskDescriptionExample=_clause(load_template("alien_example.txt")))
