"""Minimal chat-completion client.

Talks to any endpoint speaking the common chat-completions JSON shape.
Network use is entirely optional: the dialogue layer accepts any
callable with the same signature as ChatSession.send, and tests use the
scripted stub below.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import os
import time

import requests

ENV_API_KEY = "DIALOGUE_SHAPING_API_KEY"
ENV_API_BASE = "DIALOGUE_SHAPING_API_BASE"

MAX_ATTEMPTS = 3
BACKOFF_BASE_SECONDS = 0.5
BACKOFF_CAP_SECONDS = 4.0

ROLES = ("system", "user", "assistant")


class ChatError(Exception):
    """Base for all chat-client failures."""


class ChatAuthError(ChatError):
    """Credential rejected by the endpoint; retrying will not help."""


class ChatResponseError(ChatError):
    """Endpoint replied but not in the expected shape."""


class ChatRetryError(ChatError):
    """Transient failures exhausted the retry budget."""


@dataclass(frozen=True)
class ChatExchange:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"unknown chat role {self.role!r}")
        if not self.content:
            raise ValueError("chat message content must be non-empty")


@dataclass(frozen=True)
class ChatConfig:
    base_url: str
    model: str
    api_key: str
    temperature: float = 0.0
    timeout_seconds: float = 30.0

    @classmethod
    def from_env(cls, model: str = "gpt-3.5-turbo") -> "ChatConfig":
        base_url = os.environ.get(ENV_API_BASE, "")
        api_key = os.environ.get(ENV_API_KEY, "")
        if not base_url:
            raise ChatError(f"{ENV_API_BASE} is not set")
        if not api_key:
            raise ChatError(f"{ENV_API_KEY} is not set")
        return cls(base_url=base_url, model=model, api_key=api_key)


def chat_complete(session: list[ChatExchange], config: ChatConfig) -> str:
    """Send a session to the endpoint and return the assistant's text.

    Transient failures (connection errors, timeouts, HTTP 5xx/429) are
    retried up to MAX_ATTEMPTS with capped exponential backoff. Auth
    rejections and malformed payloads raise immediately.
    """
    if not session:
        raise ValueError("chat session must contain at least one message")
    url = config.base_url.rstrip("/") + "/v1/chat/completions"
    body = {
        "model": config.model,
        "messages": [{"role": m.role, "content": m.content} for m in session],
        "temperature": config.temperature,
    }
    headers = {"Authorization": f"Bearer {config.api_key}"}

    last_error: Exception | None = None
    for attempt in range(MAX_ATTEMPTS):
        if attempt:
            time.sleep(
                min(BACKOFF_CAP_SECONDS, BACKOFF_BASE_SECONDS * 2 ** (attempt - 1))
            )
        try:
            response = requests.post(
                url, json=body, headers=headers, timeout=config.timeout_seconds
            )
        except requests.RequestException as exc:
            last_error = exc
            continue
        if response.status_code in (401, 403):
            raise ChatAuthError(f"endpoint rejected credentials: {response.status_code}")
        if response.status_code >= 500 or response.status_code == 429:
            last_error = ChatError(f"transient HTTP {response.status_code}")
            continue
        if response.status_code != 200:
            raise ChatResponseError(f"unexpected HTTP {response.status_code}")
        try:
            payload = response.json()
            content = payload["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ChatResponseError(f"response not in chat-completion shape: {exc}")
        if not isinstance(content, str):
            raise ChatResponseError("assistant content is not text")
        return content
    raise ChatRetryError(
        f"gave up after {MAX_ATTEMPTS} attempts; last error: {last_error}"
    )


@dataclass
class ChatSession:
    """One stateful conversation: accumulated messages plus a transport.

    The transport defaults to chat_complete over HTTP but anything with
    the same (messages, config) signature works, which is how tests run
    without a network.
    """

    config: ChatConfig
    system_prompt: str
    transport: object = chat_complete
    messages: list[ChatExchange] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.messages:
            self.messages = [ChatExchange(role="system", content=self.system_prompt)]

    def send(self, user_text: str) -> str:
        self.messages.append(ChatExchange(role="user", content=user_text))
        reply = self.transport(list(self.messages), self.config)
        self.messages.append(ChatExchange(role="assistant", content=reply))
        return reply


def stub_config() -> ChatConfig:
    return ChatConfig(base_url="http://stub.invalid", model="stub", api_key="stub")


class StubTransport:
    """Canned transport replaying a fixed reply sequence, for offline runs."""

    def __init__(self, replies: list[str]):
        self.replies = list(replies)
        self.requests: list[list[ChatExchange]] = []

    def __call__(self, messages: list[ChatExchange], config: ChatConfig) -> str:
        self.requests.append(messages)
        if not self.replies:
            raise ChatResponseError("stub transport ran out of replies")
        return self.replies.pop(0)
