"""Five-slot task descriptions and their on-disk text format.

A description file is UTF-8 with one ``Label: value`` line per slot::

    TaskName: Freeway
    TaskDetails: ...
    ActionDetails: ...
    RewardDetails: ...
    EndConditions: ...
    GoalDetails: ...

A generated description that does not follow the sentence frames is stored
under a single ``FreeText:`` label instead.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

PACKAGE_DIR = Path(__file__).with_name("descriptions")
DESC_DIR_ENV = "LLM_EXPLORER_DESC_DIR"

SLOTS = ("task_details", "action_details", "reward_details", "end_conditions", "goal_details")
LABELS = ("TaskDetails", "ActionDetails", "RewardDetails", "EndConditions", "GoalDetails")
# sentence frame that introduces each slot
FRAMES = (
    "The task is a reinforcement learning problem where an agent ",
    "The action space is ",
    "The agent receives a reward of ",
    "The game ends when ",
    "The goal is to ",
)


@dataclass(frozen=True)
class TaskDescription:
    name: str
    task_details: str = ""
    action_details: str = ""
    reward_details: str = ""
    end_conditions: str = ""
    goal_details: str = ""
    free_text: str | None = None

    @property
    def complete(self) -> bool:
        return self.free_text is not None or all(getattr(self, s).strip() for s in SLOTS)

    def render(self, mode: str = "full") -> str:
        if mode == "name-only":
            return f"The task is {self.name}."
        if self.free_text is not None:
            return self.free_text
        parts = [frame + _strip_period(getattr(self, slot)) + "." for frame, slot in zip(FRAMES, SLOTS)]
        return " ".join(parts)

    def to_text(self) -> str:
        lines = [f"TaskName: {self.name}"]
        if self.free_text is not None:
            lines.append("FreeText: " + " ".join(self.free_text.split()))
        else:
            lines.extend(f"{label}: {getattr(self, slot)}" for label, slot in zip(LABELS, SLOTS))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TaskDescription":
        fields: dict[str, str] = {}
        for line in text.splitlines():
            if ":" not in line:
                continue
            label, value = line.split(":", 1)
            fields[label.strip()] = value.strip()
        if "TaskName" not in fields:
            raise ValueError("description file lacks a TaskName line")
        if "FreeText" in fields:
            return cls(name=fields["TaskName"], free_text=fields["FreeText"])
        return cls(name=fields["TaskName"], **{s: fields.get(l, "") for s, l in zip(SLOTS, LABELS)})


def _strip_period(text: str) -> str:
    text = text.strip()
    return text[:-1] if text.endswith(".") else text


def split_description(name: str, text: str) -> TaskDescription:
    """Recover the five slots from prose by locating the sentence frames in order."""
    text = " ".join(text.split())
    starts = []
    pos = 0
    for frame in FRAMES:
        i = text.find(frame, pos)
        if i < 0:
            return TaskDescription(name=name, free_text=text)
        starts.append(i)
        pos = i + len(frame)
    values = {}
    for k, (frame, slot) in enumerate(zip(FRAMES, SLOTS)):
        begin = starts[k] + len(frame)
        end = starts[k + 1] if k + 1 < len(starts) else len(text)
        values[slot] = _strip_period(text[begin:end])
    return TaskDescription(name=name, **values)


def description_path(env_id: str, directory=None) -> Path:
    if directory is None:
        directory = os.environ.get(DESC_DIR_ENV)
    if directory is not None:
        candidate = Path(directory) / f"{env_id}.txt"
        if candidate.exists():
            return candidate
    return PACKAGE_DIR / f"{env_id}.txt"


def load_description(env_id: str, directory=None) -> TaskDescription:
    return TaskDescription.from_text(description_path(env_id, directory).read_text(encoding="utf-8"))


def write_description(desc: TaskDescription, env_id: str, directory) -> Path:
    path = Path(directory) / f"{env_id}.txt"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(desc.to_text(), encoding="utf-8")
    return path
