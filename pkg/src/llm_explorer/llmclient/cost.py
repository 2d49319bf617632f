from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .types import Pricing, Usage


@dataclass(frozen=True)
class CostReport:
    prompt_tokens: int
    completion_tokens: int
    cost: float
    exchanges: int


def cost_report(usages: Iterable, pricing: Pricing = Pricing()) -> CostReport:
    """Sum token counts and cost. Items may be Usage objects or anything with a ``usage`` attribute or key."""
    total = Usage()
    count = 0
    for item in usages:
        if isinstance(item, dict):
            u = item["usage"] if "usage" in item else item
            item = Usage(int(u["prompt_tokens"]), int(u["completion_tokens"]))
        elif not isinstance(item, Usage):
            item = item.usage
        total = total + item
        count += 1
    return CostReport(total.prompt_tokens, total.completion_tokens, total.cost(pricing), count)
