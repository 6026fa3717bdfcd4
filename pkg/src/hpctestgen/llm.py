"""Completion client for an OpenAI-compatible chat endpoint, plus a scripted
mock. All LLM traffic in the pipeline goes through this interface."""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

import requests


class Unreachable(Exception):
    pass


class AuthFailed(Exception):
    pass


class Timeout(Exception):
    pass


class MalformedResponse(Exception):
    pass


@dataclass
class CompletionRequest:
    prompt: str
    system: str = ""
    temperature: float = 0.2
    max_tokens: int = 4096
    n: int = 1
    model: str = ""

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("candidate count must be >= 1")
        if not (0.0 < self.temperature <= 1.0):
            raise ValueError("temperature must be in (0, 1]")


@dataclass
class CompletionResponse:
    candidates: list[str]
    usage: dict = field(default_factory=dict)
    latency_seconds: float = 0.0


@dataclass
class EndpointConfig:
    endpoint: str = "http://localhost:8000/v1"
    model: str = "default"
    token_env_var: str = "HPCTESTGEN_LLM_TOKEN"
    request_timeout: float = 60.0
    max_attempts: int = 3
    backoff_seconds: float = 0.5


class HttpClient:
    """Speaks the chat-completions JSON contract with retry and backoff."""

    def __init__(self, config=None, session=None, sleep=time.sleep):
        self.config = config or EndpointConfig()
        self.session = session or requests.Session()
        self._sleep = sleep

    def complete(self, request):
        cfg = self.config
        url = cfg.endpoint.rstrip("/") + "/chat/completions"
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(cfg.token_env_var, "")
        if token:
            headers["Authorization"] = f"Bearer {token}"
        messages = []
        if request.system:
            messages.append({"role": "system", "content": request.system})
        messages.append({"role": "user", "content": request.prompt})
        payload = {
            "model": request.model or cfg.model,
            "messages": messages,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
            "n": request.n,
        }

        last_error = None
        started = time.monotonic()
        for attempt in range(cfg.max_attempts):
            if attempt:
                self._sleep(cfg.backoff_seconds * (2 ** (attempt - 1)))
            try:
                resp = self.session.post(url, json=payload, headers=headers, timeout=cfg.request_timeout)
            except requests.Timeout as exc:
                last_error = Timeout(str(exc))
                continue
            except requests.ConnectionError as exc:
                last_error = Unreachable(str(exc))
                continue
            if resp.status_code in (401, 403):
                raise AuthFailed(f"HTTP {resp.status_code}")
            if resp.status_code >= 500 or resp.status_code == 429:
                last_error = Unreachable(f"HTTP {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise MalformedResponse(f"HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                doc = resp.json()
                candidates = [c["message"]["content"] for c in doc["choices"]]
            except (ValueError, KeyError, TypeError) as exc:
                raise MalformedResponse(f"unexpected response shape: {exc}") from exc
            return CompletionResponse(
                candidates=candidates[: request.n],
                usage=doc.get("usage", {}),
                latency_seconds=time.monotonic() - started,
            )
        raise last_error if last_error is not None else Unreachable("no attempts made")


class ScriptedMockClient:
    """Deterministic stand-in: returns scripted responses in order.

    Each script entry is one response: either a string (single candidate) or
    a list of candidate strings. Exhausting the script raises Unreachable.
    """

    def __init__(self, script):
        if not script:
            raise ValueError("script must be non-empty")
        self._script = list(script)
        self._cursor = 0
        self.requests_seen: list[CompletionRequest] = []

    def complete(self, request):
        self.requests_seen.append(request)
        if self._cursor >= len(self._script):
            raise Unreachable("scripted mock exhausted")
        entry = self._script[self._cursor]
        self._cursor += 1
        candidates = [entry] if isinstance(entry, str) else list(entry)
        return CompletionResponse(candidates=candidates[: request.n], usage={"mock": True})


def scripted_mock(script):
    return ScriptedMockClient(script)
