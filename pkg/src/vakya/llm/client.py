"""Provider-agnostic chat-completion clients.

The live adapter speaks a JSON chat-completion wire format over HTTP:

    POST {base_url}{path}
    request body:  {"model": str, "messages": [{"role": "system"|"user",
                    "content": str}], "temperature": float, "max_tokens": int}
    response body: {"choices": [{"message": {"content": str},
                    "finish_reason": str}], "usage": {...}}

Our message role "human" maps to wire role "user". Every client is wrapped
in :class:`CachingChatClient` in practice: identical requests are served
from a directory of one-file-per-key cache entries, which also enables a
replay-only mode that never touches the network.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from ..errors import (
    CacheMissError,
    MockScriptExhaustedError,
    ProviderError,
    RateLimitedError,
    TransportError,
)

log = logging.getLogger(__name__)

Message = tuple[str, str]  # (role in {"system", "human"}, content)


@dataclass(frozen=True)
class ChatRequest:
    model: str
    messages: tuple[Message, ...]
    temperature: float = 0.0
    max_tokens: int = 512

    def __post_init__(self):
        if not self.messages:
            raise ValueError("a request needs at least one message")
        for role, _ in self.messages:
            if role not in ("system", "human"):
                raise ValueError(f"unknown role {role!r}")

    def text(self) -> str:
        """All message contents joined; used by content-inspecting mocks."""
        return "\n".join(content for _, content in self.messages)


@dataclass(frozen=True)
class ChatResponse:
    text: str
    finish_reason: str = "stop"
    usage: dict = field(default_factory=dict)
    provider: dict = field(default_factory=dict)


def _canonical_request(req: ChatRequest) -> str:
    return json.dumps(
        {
            "model": req.model,
            "messages": [[role, content] for role, content in req.messages],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        },
        ensure_ascii=False,
        sort_keys=True,
        separators=(",", ":"),
    )


def cache_key(req: ChatRequest) -> str:
    return hashlib.sha256(_canonical_request(req).encode("utf-8")).hexdigest()


class ChatClient:
    def complete(self, req: ChatRequest) -> ChatResponse:
        raise NotImplementedError


class TokenBucket:
    """Blocking token-bucket limiter (requests per minute)."""

    def __init__(self, requests_per_minute: float):
        self.rate = requests_per_minute / 60.0
        self.capacity = max(1.0, requests_per_minute / 60.0)
        self.tokens = self.capacity
        self.updated = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = time.monotonic()
                self.tokens = min(self.capacity, self.tokens + (now - self.updated) * self.rate)
                self.updated = now
                if self.tokens >= 1.0:
                    self.tokens -= 1.0
                    return
                wait = (1.0 - self.tokens) / self.rate
            time.sleep(wait)


class HttpChatClient(ChatClient):
    """Live adapter with exponential-backoff retries and bounded in-flight
    requests. Credentials come from an environment variable, never from
    config files."""

    def __init__(
        self,
        base_url: str,
        path: str = "/v1/chat/completions",
        api_key_env: str = "VAKYA_API_KEY",
        max_retries: int = 3,
        backoff_base: float = 1.0,
        requests_per_minute: float | None = None,
        max_in_flight: int = 4,
        timeout: float = 120.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.path = path
        self.api_key_env = api_key_env
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self.bucket = TokenBucket(requests_per_minute) if requests_per_minute else None
        self._slots = threading.Semaphore(max_in_flight)
        self._http = httpx.Client(timeout=timeout, transport=transport)

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(self, req: ChatRequest) -> ChatResponse:
        body = {
            "model": req.model,
            "messages": [
                {"role": "user" if role == "human" else role, "content": content}
                for role, content in req.messages
            ],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        }
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff_base * 2 ** (attempt - 1))
            if self.bucket is not None:
                self.bucket.acquire()
            with self._slots:
                try:
                    resp = self._http.post(
                        self.base_url + self.path, json=body, headers=self._headers()
                    )
                except httpx.HTTPError as exc:
                    last_error = TransportError(str(exc))
                    log.warning("transport error (attempt %d): %s", attempt + 1, exc)
                    continue
            if resp.status_code == 429:
                last_error = RateLimitedError(resp.text[:200])
                log.warning("rate limited (attempt %d)", attempt + 1)
                continue
            if resp.status_code >= 500:
                last_error = ProviderError(resp.status_code, resp.text[:200])
                continue
            if resp.status_code != 200:
                raise ProviderError(resp.status_code, resp.text[:200])
            data = resp.json()
            choice = data["choices"][0]
            return ChatResponse(
                text=choice["message"]["content"],
                finish_reason=choice.get("finish_reason", "stop"),
                usage=data.get("usage", {}),
                provider={"model": data.get("model", req.model)},
            )
        assert last_error is not None
        raise last_error


class MockChatClient(ChatClient):
    """Scripted mock: returns queued responses in order and records every
    request so tests can assert the full exchange."""

    def __init__(self, responses: list[str]):
        self._queue = list(responses)
        self.trace: list[tuple[ChatRequest, str]] = []
        self._lock = threading.Lock()

    @property
    def calls(self) -> int:
        return len(self.trace)

    def complete(self, req: ChatRequest) -> ChatResponse:
        with self._lock:
            if not self._queue:
                raise MockScriptExhaustedError(
                    f"mock script exhausted after {len(self.trace)} calls"
                )
            text = self._queue.pop(0)
            self.trace.append((req, text))
        return ChatResponse(text=text, provider={"mock": "script"})


class EchoAnswerMock(ChatClient):
    """Context-echo mock for retrieval experiments: extracts an item key
    from the prompt, then answers with the first of that item's gold
    answers appearing verbatim in the prompt, else ``miss_text``."""

    def __init__(
        self,
        answers: dict[str, list[str]],
        key_pattern: str,
        miss_text: str = "na jānāmi",
    ):
        self.answers = answers
        self.key_re = re.compile(key_pattern)
        self.miss_text = miss_text
        self.trace: list[tuple[ChatRequest, str]] = []
        self._lock = threading.Lock()

    @property
    def calls(self) -> int:
        return len(self.trace)

    def complete(self, req: ChatRequest) -> ChatResponse:
        prompt = req.text()
        text = self.miss_text
        m = self.key_re.search(prompt)
        if m:
            for candidate in self.answers.get(m.group(0), []):
                if candidate in prompt:
                    text = candidate
                    break
        with self._lock:
            self.trace.append((req, text))
        return ChatResponse(text=text, provider={"mock": "echo"})


def load_mock(path: str | Path) -> ChatClient:
    """Build a mock client from a JSON script file.

    ``{"kind": "script", "responses": [...]}`` or
    ``{"kind": "echo", "key_pattern": str, "answers": {key: [...]},
    "miss_text": str}``.
    """
    spec = json.loads(Path(path).read_text("utf-8"))
    kind = spec.get("kind", "script")
    if kind == "script":
        return MockChatClient(spec["responses"])
    if kind == "echo":
        return EchoAnswerMock(
            answers=spec["answers"],
            key_pattern=spec["key_pattern"],
            miss_text=spec.get("miss_text", "na jānāmi"),
        )
    raise ValueError(f"unknown mock kind {kind!r}")


class CachingChatClient(ChatClient):
    """Deterministic cache in front of any client.

    One file per key; the entry records the canonical request, the verbatim
    response text, and a timestamp. In replay-only mode (``inner=None``) a
    miss raises :class:`CacheMissError`.
    """

    def __init__(self, cache_dir: str | Path, inner: ChatClient | None = None):
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.inner = inner
        self.hits = 0
        self.misses = 0
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _entry_path(self, key: str) -> Path:
        return self.cache_dir / f"{key}.json"

    def _key_lock(self, key: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(key, threading.Lock())

    def complete(self, req: ChatRequest) -> ChatResponse:
        key = cache_key(req)
        path = self._entry_path(key)
        with self._key_lock(key):
            if path.is_file():
                entry = json.loads(path.read_text("utf-8"))
                self.hits += 1
                return ChatResponse(
                    text=entry["response"]["text"],
                    finish_reason=entry["response"].get("finish_reason", "stop"),
                    usage=entry["response"].get("usage", {}),
                    provider=entry["response"].get("provider", {}),
                )
            if self.inner is None:
                raise CacheMissError(f"no cached response for key {key}")
            self.misses += 1
            resp = self.inner.complete(req)
            entry = {
                "request": json.loads(_canonical_request(req)),
                "response": {
                    "text": resp.text,
                    "finish_reason": resp.finish_reason,
                    "usage": resp.usage,
                    "provider": resp.provider,
                },
                "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            }
            tmp = path.with_suffix(".tmp")
            tmp.write_text(json.dumps(entry, ensure_ascii=False, indent=1), "utf-8")
            tmp.replace(path)
            return resp
