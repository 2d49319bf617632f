from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import DegenerateBaseline, EmptyInput

CHECKPOINTS = 100
FINAL_WINDOW = 10


def human_norm_score(agent_score: float, random_score: float, human_score: float) -> float:
    denom = human_score - random_score
    if denom == 0:
        raise DegenerateBaseline("human and random scores coincide")
    return (agent_score - random_score) / denom


def improvement_pct(baseline: float, treated: float) -> float:
    if baseline == 0:
        raise DegenerateBaseline("baseline score is zero")
    return (treated - baseline) / abs(baseline) * 100.0


@dataclass
class CurveTable:
    steps: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    finals: np.ndarray

    @property
    def final_mean(self) -> float:
        return float(np.mean(self.finals))

    @property
    def final_median(self) -> float:
        return float(np.median(self.finals))


def final_score(values: Sequence[float], window: int = FINAL_WINDOW) -> float:
    tail = list(values)[-window:]
    return float(np.mean(tail))


def aggregate_seeds(series: Sequence[tuple[Sequence[float], Sequence[float]]], checkpoints: int = CHECKPOINTS,
                    window: int = FINAL_WINDOW) -> CurveTable:
    """Interpolate each ``(steps, values)`` run onto a shared step grid.

    The grid spans the step range covered by every run. Standard deviation is
    the population form. Each run's final score is the mean of its last
    ``window`` values.
    """
    series = [(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)) for x, y in series]
    if not series or any(x.size == 0 for x, _ in series):
        raise EmptyInput("aggregation needs at least one non-empty run")
    lo = max(float(x[0]) for x, _ in series)
    hi = min(float(x[-1]) for x, _ in series)
    if hi < lo:
        hi = lo
    grid = np.linspace(lo, hi, checkpoints)
    # sort runs so the result does not depend on input order
    curves = np.array(sorted((np.interp(grid, x, y) for x, y in series), key=lambda c: c.tobytes()))
    finals = np.sort([final_score(y, window) for _, y in series])
    return CurveTable(grid, curves.mean(axis=0), curves.std(axis=0), finals)
