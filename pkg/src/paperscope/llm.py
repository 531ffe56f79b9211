"""LLM completion clients: a chat-completion HTTP client and a scripted mock.

Wire shape: POST {model, messages[{role, content}]} -> {choices[0].message.content}.
"""

from __future__ import annotations

import logging
import os
import re
import threading
from typing import Callable, Protocol, Sequence

from .errors import LlmError

logger = logging.getLogger(__name__)

Message = dict[str, str]


class LlmClient(Protocol):
    def complete(self, messages: Sequence[Message]) -> str: ...


def _httpx_transport(url: str, payload: dict, headers: dict, timeout: float):
    import httpx

    try:
        response = httpx.post(url, json=payload, headers=headers, timeout=timeout)
    except httpx.HTTPError as exc:
        raise ConnectionError(str(exc)) from exc
    return response.status_code, response.json()


class HttpLlmClient:
    """Single-shot chat-completion calls against a configurable endpoint."""

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str | None = None,
        timeout: float = 60.0,
        transport: Callable = _httpx_transport,
    ):
        self.base_url = base_url
        self.model = model
        self.api_key = api_key if api_key is not None else os.environ.get("LLM_API_KEY")
        self.timeout = timeout
        self._transport = transport

    def complete(self, messages: Sequence[Message]) -> str:
        payload = {"model": self.model, "messages": list(messages)}
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            status, body = self._transport(self.base_url, payload, headers, self.timeout)
        except ConnectionError as exc:
            raise LlmError(f"LLM request failed: {exc}") from exc
        if status != 200:
            raise LlmError(f"LLM endpoint returned HTTP {status}")
        try:
            content = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise LlmError("LLM response missing choices[0].message.content") from None
        if not isinstance(content, str):
            raise LlmError("LLM response content is not text")
        return content


class TitleEchoLlm:
    """Offline stand-in that answers by citing titles present in the prompt.

    Retrieved-context blocks carry ``Title:`` lines; the reply wraps the
    first few of those titles in the double-asterisk convention the
    grounding layer extracts, so the full annotate pipeline is exercised
    without a network. Condensation prompts (no ``Title:`` lines) get a
    fixed summary sentence.
    """

    def __init__(self, max_titles: int = 3):
        self.max_titles = max_titles
        self._lock = threading.Lock()
        self.calls: list[list[Message]] = []

    @property
    def call_count(self) -> int:
        return len(self.calls)

    def complete(self, messages: Sequence[Message]) -> str:
        rendered = "\n".join(m.get("content", "") for m in messages)
        with self._lock:
            self.calls.append([dict(m) for m in messages])
        titles = re.findall(r"^(?:\d+\. )?Title: (.+)$|^\d+\. (.+)$", rendered, re.MULTILINE)
        flat = [a or b for a, b in titles][: self.max_titles]
        if not flat:
            return (
                "The user explored the corpus and asked follow-up questions; "
                "no specific papers were pinned down yet."
            )
        cited = ", ".join(f"**{title}**" for title in flat)
        return (
            f"Based on the retrieved metadata, the most relevant work here is {cited}. "
            "These papers share the themes surfaced by the current question."
        )


class MockLlm:
    """Deterministic scripted stand-in for tests and offline runs.

    Responses are served, in priority order, from: an explicit queue
    (consumed first-in-first-out), then the first (substring, response) rule
    matching the rendered prompt, then the default. Every call is recorded
    for arity assertions; recording is thread-safe.
    """

    def __init__(
        self,
        responses: Sequence[str] | None = None,
        rules: Sequence[tuple[str, str]] | None = None,
        default: str = "(mock response)",
        fail_on: str | None = None,
    ):
        self._queue = list(responses or [])
        self._rules = list(rules or [])
        self._default = default
        self._fail_on = fail_on
        self._lock = threading.Lock()
        self.calls: list[list[Message]] = []

    @property
    def call_count(self) -> int:
        return len(self.calls)

    def complete(self, messages: Sequence[Message]) -> str:
        rendered = "\n".join(m.get("content", "") for m in messages)
        with self._lock:
            self.calls.append([dict(m) for m in messages])
            if self._fail_on is not None and self._fail_on in rendered:
                raise LlmError(f"scripted failure on {self._fail_on!r}")
            if self._queue:
                return self._queue.pop(0)
        for needle, response in self._rules:
            if needle in rendered:
                return response
        return self._default
