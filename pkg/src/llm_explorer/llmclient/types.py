from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Protocol

ROLES = ("system", "user", "assistant")


@dataclass(frozen=True)
class Message:
    role: str
    content: str


@dataclass(frozen=True)
class ChatRequest:
    model: str
    messages: tuple[Message, ...]
    temperature: float = 1.0

    def __post_init__(self):
        if not self.messages:
            raise ValueError("a chat request needs at least one message")
        for m in self.messages:
            if m.role not in ROLES:
                raise ValueError(f"invalid role {m.role!r}")

    @classmethod
    def single(cls, prompt: str, model: str = "mock", temperature: float = 1.0) -> "ChatRequest":
        return cls(model, (Message("user", prompt),), temperature)

    @property
    def prompt_text(self) -> str:
        return "\n".join(m.content for m in self.messages)

    def to_wire(self) -> dict:
        return {
            "model": self.model,
            "messages": [{"role": m.role, "content": m.content} for m in self.messages],
            "temperature": self.temperature,
        }

    def key(self) -> str:
        """Stable content hash of model, temperature and every message."""
        canonical = json.dumps(self.to_wire(), sort_keys=True, ensure_ascii=False, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Pricing:
    """Currency per single token."""

    input: float = 0.15e-6
    output: float = 0.60e-6

    @classmethod
    def per_million(cls, price_in: float, price_out: float) -> "Pricing":
        return cls(price_in / 1e6, price_out / 1e6)


@dataclass(frozen=True)
class Usage:
    prompt_tokens: int = 0
    completion_tokens: int = 0

    def __post_init__(self):
        if self.prompt_tokens < 0 or self.completion_tokens < 0:
            raise ValueError("token counts must be non-negative")

    def __add__(self, other: "Usage") -> "Usage":
        return Usage(self.prompt_tokens + other.prompt_tokens, self.completion_tokens + other.completion_tokens)

    def cost(self, pricing: Pricing = Pricing()) -> float:
        return self.prompt_tokens * pricing.input + self.completion_tokens * pricing.output

    @classmethod
    def estimate(cls, prompt: str, response: str) -> "Usage":
        return cls(math.ceil(len(prompt) / 4), math.ceil(len(response) / 4))


@dataclass(frozen=True)
class ChatResponse:
    text: str
    usage: Usage = field(default_factory=Usage)


class Backend(Protocol):
    def chat(self, request: ChatRequest) -> ChatResponse: ...


def chat(backend: Backend, request: ChatRequest) -> tuple[str, Usage]:
    response = backend.chat(request)
    return response.text, response.usage
