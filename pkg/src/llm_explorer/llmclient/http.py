"""OpenAI-compatible chat-completions transport."""

from __future__ import annotations

import logging
import os
import time

import httpx

from ..errors import MissingCredential, TransportError
from .types import ChatRequest, ChatResponse, Usage

log = logging.getLogger(__name__)

API_KEY_ENV = "LLM_EXPLORER_API_KEY"
DEFAULT_BASE_URL = "https://api.openai.com/v1"
DEFAULT_MODEL = "gpt-4o-mini-2024-07-18"


class HttpBackend:
    """POST {base_url}/chat/completions with exponential backoff.

    A failed call is retried ``retries`` times, sleeping ``backoff * 2**i``
    seconds before retry ``i``; after that :class:`TransportError` surfaces.
    """

    def __init__(self, base_url: str = DEFAULT_BASE_URL, api_key: str | None = None, timeout: float = 60.0,
                 retries: int = 3, backoff: float = 1.0, transport: httpx.BaseTransport | None = None,
                 sleep=time.sleep):
        api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        if not api_key:
            raise MissingCredential(f"set {API_KEY_ENV} to use the HTTP backend")
        self.url = base_url.rstrip("/") + "/chat/completions"
        self.retries = retries
        self.backoff = backoff
        self._sleep = sleep
        self._client = httpx.Client(
            timeout=timeout,
            transport=transport,
            headers={"Authorization": f"Bearer {api_key}", "Content-Type": "application/json"},
        )

    def close(self) -> None:
        self._client.close()

    def chat(self, request: ChatRequest) -> ChatResponse:
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            if attempt:
                self._sleep(self.backoff * 2 ** (attempt - 1))
            try:
                resp = self._client.post(self.url, json=request.to_wire())
            except httpx.HTTPError as exc:
                last_error = exc
                log.warning("chat request failed (attempt %d): %s", attempt + 1, exc)
                continue
            if resp.status_code >= 400:
                last_error = TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
                log.warning("chat request returned %d (attempt %d)", resp.status_code, attempt + 1)
                continue
            return _parse_completion(resp)
        raise TransportError(f"chat completion failed after {self.retries + 1} attempts: {last_error}")


def _parse_completion(resp: httpx.Response) -> ChatResponse:
    try:
        body = resp.json()
        text = body["choices"][0]["message"]["content"] or ""
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise TransportError(f"malformed chat-completions body: {exc}") from exc
    usage = body.get("usage") or {}
    return ChatResponse(
        text,
        Usage(int(usage.get("prompt_tokens", 0) or 0), int(usage.get("completion_tokens", 0) or 0)),
    )
