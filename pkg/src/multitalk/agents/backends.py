"""Agent backends: the abstract completion interface, a deterministic scripted
backend for tests and benchmarks, and a live chat-completion HTTP backend."""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol

import httpx

from ..errors import BackendUnavailable, ConfigError, GuardMismatch, ScriptExhausted

Message = dict  # {"role": "system" | "user" | "assistant", "content": str}

_FEEDBACK_RE = re.compile(r"^FEEDBACK \((\w+)\): ", re.MULTILINE)


class AgentBackend(Protocol):
    def complete(self, system_prompt: str, user_prompt: str,
                 history: list[Message]) -> str: ...


@dataclass(frozen=True)
class ScriptEntry:
    response: str
    guard_source: str | None = None
    guard_substring: str | None = None


@dataclass(frozen=True)
class AgentScript:
    entries: tuple[ScriptEntry, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if not self.entries:
            raise ConfigError("agent script must have at least one entry")

    @classmethod
    def from_records(cls, records: list) -> "AgentScript":
        entries = []
        for i, rec in enumerate(records):
            if not isinstance(rec, dict) or "response" not in rec:
                raise ConfigError(f"script entry {i} needs a 'response' field")
            response = rec["response"]
            if not isinstance(response, str):
                response = json.dumps(response)
            entries.append(
                ScriptEntry(
                    response=response,
                    guard_source=rec.get("guard_source"),
                    guard_substring=rec.get("guard_substring"),
                )
            )
        return cls(entries=tuple(entries))

    @classmethod
    def from_file(cls, path: str | Path) -> "AgentScript":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"script file not found: {path}")
        text = path.read_text()
        if path.suffix in (".yaml", ".yml"):
            import yaml

            records = yaml.safe_load(text)
        else:
            records = json.loads(text)
        if not isinstance(records, list):
            raise ConfigError(f"{path}: script must be a list of entries")
        return cls.from_records(records)


def extract_feedback_source(user_prompt: str) -> str | None:
    """The feedback label a prompt carries, if any (used by script guards)."""
    m = _FEEDBACK_RE.search(user_prompt)
    return m.group(1) if m else None


class ScriptedBackend:
    """Returns canned responses in order, honoring per-entry guards.

    Deterministic given the same call sequence; confined to one session.
    """

    def __init__(self, script: AgentScript):
        self.script = script
        self._index = 0

    @property
    def calls_made(self) -> int:
        return self._index

    def complete(self, system_prompt: str, user_prompt: str,
                 history: list[Message]) -> str:
        if self._index >= len(self.script.entries):
            raise ScriptExhausted(
                f"script exhausted after {self._index} calls"
            )
        entry = self.script.entries[self._index]
        if entry.guard_source is not None:
            actual = extract_feedback_source(user_prompt)
            if actual != entry.guard_source:
                raise GuardMismatch(
                    f"entry {self._index} expected feedback source "
                    f"{entry.guard_source!r}, prompt carries {actual!r}"
                )
        if entry.guard_substring is not None and entry.guard_substring not in user_prompt:
            raise GuardMismatch(
                f"entry {self._index} expected substring {entry.guard_substring!r} "
                "in the prompt"
            )
        self._index += 1
        return entry.response


class CallableBackend:
    """Adapter for programmatic agents (oracle planners and the like)."""

    def __init__(self, fn: Callable[[str, str, list[Message]], str]):
        self._fn = fn

    def complete(self, system_prompt: str, user_prompt: str,
                 history: list[Message]) -> str:
        return self._fn(system_prompt, user_prompt, history)


_RETRYABLE_STATUS = {429, 500, 502, 503, 504}


class LiveBackend:
    """Chat-completion HTTP backend with bounded transport retries.

    Auth failures are terminal; timeouts and 5xx/429 retry up to twice with
    exponential backoff.
    """

    def __init__(
        self,
        endpoint_url: str,
        model_name: str,
        credential: str,
        timeout: float = 60.0,
        max_retries: int = 2,
        sleep: Callable[[float], None] = time.sleep,
        transport: httpx.BaseTransport | None = None,
    ):
        if not credential:
            raise ConfigError("live backend requires a credential")
        self.endpoint_url = endpoint_url.rstrip("/")
        self.model_name = model_name
        self._headers = {"Authorization": f"Bearer {credential}"}
        self.timeout = timeout
        self.max_retries = max_retries
        self._sleep = sleep
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def complete(self, system_prompt: str, user_prompt: str,
                 history: list[Message]) -> str:
        messages = [{"role": "system", "content": system_prompt}]
        messages += list(history)
        messages.append({"role": "user", "content": user_prompt})
        body = {"model": self.model_name, "messages": messages}

        last_cause = "transport"
        last_detail = ""
        for attempt in range(self.max_retries + 1):
            try:
                resp = self._client.post(
                    f"{self.endpoint_url}/chat/completions",
                    json=body,
                    headers=self._headers,
                )
            except httpx.TimeoutException as exc:
                last_cause, last_detail = "timeout", str(exc)
            except httpx.HTTPError as exc:
                last_cause, last_detail = "transport", str(exc)
            else:
                if resp.status_code in (401, 403):
                    raise BackendUnavailable("auth", f"HTTP {resp.status_code}")
                if resp.status_code == 429:
                    last_cause, last_detail = "quota", "HTTP 429"
                elif resp.status_code in _RETRYABLE_STATUS:
                    last_cause, last_detail = "transport", f"HTTP {resp.status_code}"
                elif resp.status_code != 200:
                    raise BackendUnavailable("transport", f"HTTP {resp.status_code}")
                else:
                    try:
                        return resp.json()["choices"][0]["message"]["content"]
                    except (KeyError, IndexError, TypeError, ValueError) as exc:
                        raise BackendUnavailable(
                            "transport", f"malformed response body: {exc}"
                        ) from exc
            if attempt < self.max_retries:
                self._sleep(0.5 * 2**attempt)
        raise BackendUnavailable(last_cause, last_detail)

    def close(self):
        self._client.close()
