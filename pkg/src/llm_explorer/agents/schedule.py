from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class EpsilonSchedule:
    start: float = 1.0
    minimum: float = 0.1
    decay: float = 0.99999

    def at(self, step: int) -> float:
        if step < 0:
            raise ValueError("step must be non-negative")
        return max(self.minimum, self.start * self.decay**step)


def epsilon_at(schedule: EpsilonSchedule, step: int) -> float:
    return schedule.at(step)
