from __future__ import annotations

from ..envs.description import TaskDescription, split_description, write_description
from ..errors import GenerationFailure, LlmExplorerError
from ..llmclient.types import Backend, ChatRequest
from .prompts import build_description_prompt


def generate_task_description(backend: Backend, task_name: str, gen_mode: str = "template+one-shot",
                              env_id: str | None = None, directory=None, retries: int = 3,
                              model: str = "mock", temperature: float = 1.0) -> TaskDescription:
    """Ask the model for a description and split it into slots when the frames are present.

    Empty answers and transport errors are retried; after ``retries`` failed
    attempts :class:`GenerationFailure` is raised. When ``env_id`` and
    ``directory`` are given the result is written as that env's description file.
    """
    prompt = build_description_prompt(task_name, gen_mode)
    request = ChatRequest.single(prompt, model, temperature)
    last_error = "no attempt made"
    for _ in range(retries):
        try:
            text = backend.chat(request).text.strip()
        except LlmExplorerError as exc:
            last_error = f"{type(exc).__name__}: {exc}"
            continue
        if text:
            desc = split_description(task_name, text)
            if env_id is not None and directory is not None:
                write_description(desc, env_id, directory)
            return desc
        last_error = "empty response"
    raise GenerationFailure(f"description generation failed after {retries} attempts ({last_error})")
