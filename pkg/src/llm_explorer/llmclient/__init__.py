from .cache import RecordingBackend, ReplayBackend, load_cache
from .cost import CostReport, cost_report
from .http import DEFAULT_MODEL, HttpBackend
from .mock import (
    CannedSequence, Favor, Garbage, MockBackend, MockPolicy, Seek, UniformText, parse_mock_spec,
)
from .types import Backend, ChatRequest, ChatResponse, Message, Pricing, Usage, chat

__all__ = [
    "Backend", "CannedSequence", "ChatRequest", "ChatResponse", "CostReport", "DEFAULT_MODEL", "Favor",
    "Garbage", "HttpBackend", "Message", "MockBackend", "MockPolicy", "Pricing", "RecordingBackend",
    "ReplayBackend", "Seek", "UniformText", "Usage", "chat", "cost_report", "load_cache", "parse_mock_spec",
]
