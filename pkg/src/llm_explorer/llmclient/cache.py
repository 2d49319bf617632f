"""Record/replay wrappers keyed by request content plus a per-key sequence number.

Cache files are append-only JSONL, one record per exchange::

    {"key": ..., "seq": 0, "model": ..., "temperature": 1.0,
     "prompt_sha256": ..., "response": ..., "usage": {"prompt_tokens": .., "completion_tokens": ..}}

Replay looks entries up by ``(key, seq)``, so line order in the file is irrelevant.
"""

from __future__ import annotations

import hashlib
import json
import threading
from collections import defaultdict
from pathlib import Path

from ..errors import IoFailure, ReplayMiss
from .types import Backend, ChatRequest, ChatResponse, Usage


def _record(request: ChatRequest, seq: int, response: ChatResponse) -> dict:
    return {
        "key": request.key(),
        "seq": seq,
        "model": request.model,
        "temperature": request.temperature,
        "prompt_sha256": hashlib.sha256(request.prompt_text.encode("utf-8")).hexdigest(),
        "response": response.text,
        "usage": {
            "prompt_tokens": response.usage.prompt_tokens,
            "completion_tokens": response.usage.completion_tokens,
        },
    }


class RecordingBackend:
    """Forward to ``inner`` and append every exchange to ``path``."""

    def __init__(self, inner: Backend, path):
        self.inner = inner
        self.path = Path(path)
        self._seq: dict[str, int] = defaultdict(int)
        self._lock = threading.Lock()

    def chat(self, request: ChatRequest) -> ChatResponse:
        response = self.inner.chat(request)
        key = request.key()
        with self._lock:
            seq = self._seq[key]
            self._seq[key] += 1
            line = json.dumps(_record(request, seq, response), ensure_ascii=False, sort_keys=True)
            try:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(line + "\n")
            except OSError as exc:
                raise IoFailure(f"cannot append to {self.path}: {exc}") from exc
        return response


def load_cache(path) -> dict[tuple[str, int], dict]:
    entries = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read cache {path}: {exc}") from exc
    for line in text.splitlines():
        if line.strip():
            rec = json.loads(line)
            entries[(rec["key"], int(rec["seq"]))] = rec
    return entries


class ReplayBackend:
    """Serve recorded responses; the n-th identical request gets sequence n."""

    def __init__(self, path):
        self.path = Path(path)
        self.entries = load_cache(path)
        self._cursor: dict[str, int] = defaultdict(int)
        self._lock = threading.Lock()

    def chat(self, request: ChatRequest) -> ChatResponse:
        key = request.key()
        with self._lock:
            seq = self._cursor[key]
            rec = self.entries.get((key, seq))
            if rec is None:
                raise ReplayMiss(f"no cached response for key {key[:12]} sequence {seq}")
            self._cursor[key] += 1
        u = rec["usage"]
        return ChatResponse(rec["response"], Usage(int(u["prompt_tokens"]), int(u["completion_tokens"])))
