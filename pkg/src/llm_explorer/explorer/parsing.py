"""Extract exploration strategies from free-form model text.

Both parsers take the last ``{key: value, ...}`` block whose entries are all
numeric, so a restated format line such as ``{1: [probability], ...}`` ahead
of the real answer is skipped. Values may be wrapped in brackets and may carry
a percent sign.
"""

from __future__ import annotations

import math
import re

import numpy as np

from ..core import Biased, Categorical, ExplorationDistribution, GaussianBias, categorical_normalize
from ..errors import (
    KeyOutOfRange, NegativeProbability, NonFiniteValue, ParseError, ParseFailure, SumOutOfRange,
)

RENORM_LOW, RENORM_HIGH = 0.5, 1.5

_BLOCK = re.compile(r"\{([^{}]*)\}")
_NUMBER = r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?|[-+]?(?:nan|inf(?:inity)?)"
_ENTRY = re.compile(
    r"""^\s*["']?(?P<key>[-+]?\d+)["']?\s*:\s*\[?\s*(?P<value>""" + _NUMBER + r""")\s*(?P<pct>%?)\s*\]?\s*$""",
    re.IGNORECASE,
)


def extract_mapping(text: str) -> dict[int, float]:
    """Return the last all-numeric mapping in ``text`` or raise ParseFailure."""
    if not isinstance(text, str):
        raise ParseFailure("response is not text")
    for body in reversed(_BLOCK.findall(text)):
        entries = [e for e in body.split(",") if e.strip()]
        if not entries:
            continue
        parsed: dict[int, float] = {}
        ok = True
        for entry in entries:
            m = _ENTRY.match(entry)
            if m is None:
                ok = False
                break
            key = int(m.group("key"))
            if key in parsed:
                ok = False
                break
            value = float(m.group("value"))
            if m.group("pct"):
                value /= 100.0
            parsed[key] = value
        if ok:
            return parsed
    raise ParseFailure("no numeric mapping found")


def _dense(mapping: dict[int, float], size: int) -> np.ndarray:
    out = np.zeros(size)
    for key, value in mapping.items():
        if not 1 <= key <= size:
            raise KeyOutOfRange(f"key {key} outside 1..{size}")
        if not math.isfinite(value):
            raise NonFiniteValue(f"value for key {key} is {value}")
        out[key - 1] = value
    return out


def parse_discrete_distribution(text: str, n_actions: int) -> ExplorationDistribution:
    mapping = extract_mapping(text)
    probs = _dense(mapping, n_actions)
    if np.any(probs < 0):
        raise NegativeProbability(f"negative probability in {probs.tolist()}")
    total = math.fsum(probs)
    if not RENORM_LOW <= total <= RENORM_HIGH:
        raise SumOutOfRange(f"probabilities sum to {total}")
    return categorical_normalize(probs)


def parse_continuous_bias(text: str, dim: int, low=-1.0, high=1.0, cap: float = 0.5) -> GaussianBias:
    mapping = extract_mapping(text)
    bias = _dense(mapping, dim)
    low = np.broadcast_to(np.asarray(low, dtype=np.float64), (dim,))
    high = np.broadcast_to(np.asarray(high, dtype=np.float64), (dim,))
    return GaussianBias.capped(bias, low, high, cap)


def parse_strategy(text: str, spec, cap: float = 0.5):
    """Parse into a Categorical or Biased strategy matching ``spec``."""
    try:
        if spec.is_discrete:
            return Categorical(parse_discrete_distribution(text, spec.n))
        return Biased(parse_continuous_bias(text, spec.dim, spec.low, spec.high, cap))
    except ParseError:
        raise
    except Exception as exc:  # the parser must stay total
        raise ParseFailure(f"unparseable response: {exc}") from exc
