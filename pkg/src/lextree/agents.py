"""Agent transport: a minimal chat-style client abstraction.

Two implementations: ScriptedAgent replays a fixed transcript for offline
runs and tests; RemoteAgent talks to any chat-completion-style endpoint
(request body ``{"model": ..., "messages": [{"role", "content"}]}``, reply
text taken from the first message of the response).
"""

from __future__ import annotations

import json
import os
from typing import Any, Protocol, Sequence

import requests

ENV_BASE_URL = "AGENT_BASE_URL"
ENV_MODEL = "AGENT_MODEL"
ENV_API_KEY = "AGENT_API_KEY"

DEFAULT_TIMEOUT = 60.0
DEFAULT_RETRIES = 1


class AgentUnavailable(Exception):
    """Transport-level failure talking to an agent endpoint."""


class AgentClient(Protocol):
    def send(self, instruction: str, context: str) -> str:
        """Send one instruction+context exchange, return the reply text."""
        ...


class ScriptedAgent:
    """Replays a fixed, ordered list of reply texts.

    Calls beyond the transcript raise AgentUnavailable unless
    ``repeat_last`` is set, in which case the final reply is repeated.
    Every exchange is recorded on ``calls`` for inspection.
    """

    def __init__(self, replies: Sequence[str], repeat_last: bool = False):
        self.replies = list(replies)
        self.repeat_last = repeat_last
        self.calls: list[tuple[str, str]] = []

    def send(self, instruction: str, context: str) -> str:
        self.calls.append((instruction, context))
        index = len(self.calls) - 1
        if index < len(self.replies):
            return self.replies[index]
        if self.repeat_last and self.replies:
            return self.replies[-1]
        raise AgentUnavailable("scripted transcript exhausted")


class FailingAgent:
    """Always fails at the transport level; useful for degradation tests."""

    def send(self, instruction: str, context: str) -> str:
        raise AgentUnavailable("agent configured to fail")


class RemoteAgent:
    """Chat-style HTTP client for a provider-compatible endpoint."""

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str | None = None,
        timeout: float = DEFAULT_TIMEOUT,
        retries: int = DEFAULT_RETRIES,
        session: requests.Session | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key = api_key
        self.timeout = timeout
        self.retries = retries
        self.session = session or requests.Session()

    @classmethod
    def from_env(cls, timeout: float = DEFAULT_TIMEOUT, retries: int = DEFAULT_RETRIES) -> "RemoteAgent":
        base_url = os.environ.get(ENV_BASE_URL)
        model = os.environ.get(ENV_MODEL)
        if not base_url or not model:
            raise AgentUnavailable(
                f"{ENV_BASE_URL} and {ENV_MODEL} must be set to use a remote agent"
            )
        return cls(
            base_url=base_url,
            model=model,
            api_key=os.environ.get(ENV_API_KEY),
            timeout=timeout,
            retries=retries,
        )

    def send(self, instruction: str, context: str) -> str:
        payload = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": instruction},
                {"role": "user", "content": context},
            ],
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        url = f"{self.base_url}/chat/completions"
        last_error: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                resp = self.session.post(url, json=payload, headers=headers, timeout=self.timeout)
                resp.raise_for_status()
                return _extract_reply(resp.json())
            except (requests.RequestException, ValueError, KeyError) as exc:
                last_error = exc
        raise AgentUnavailable(f"agent endpoint failed: {last_error}") from last_error


def _extract_reply(body: Any) -> str:
    if isinstance(body, dict):
        choices = body.get("choices")
        if isinstance(choices, list) and choices:
            message = choices[0].get("message", {})
            content = message.get("content")
            if isinstance(content, str):
                return content
        messages = body.get("messages")
        if isinstance(messages, list) and messages:
            content = messages[0].get("content")
            if isinstance(content, str):
                return content
    raise ValueError(f"cannot extract reply text from response: {json.dumps(body)[:200]}")


def load_transcript(path: str) -> list[str]:
    """Load a replay transcript: a JSON array of reply texts, in call order."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list) or not all(isinstance(x, str) for x in data):
        raise ValueError("transcript must be a JSON array of reply strings")
    return data
