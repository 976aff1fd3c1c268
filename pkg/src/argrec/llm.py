"""Text-generation backends: an OpenAI-compatible HTTP client and a scripted
deterministic mock, plus structured-output enforcement and token accounting.

Pipeline stages account usage separately so reports can exclude the initial
ontology pass. The mock addresses scripted replies either as an ordered
sequence per stage or by a content hash of the prompts, which keeps
end-to-end tests deterministic in both orderings.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Protocol

import jsonschema

logger = logging.getLogger(__name__)

STAGE_ONTOLOGY = "ontology"
STAGE_QBAF = "qbaf-construction"
STAGE_INFERENCE = "inference"

DEFAULT_RETRIES = 3


class TransportError(Exception):
    """Backend unreachable or persistently failing at the transport level."""


class GenerationError(Exception):
    """Structured-output budget exhausted; carries the last raw reply."""

    def __init__(self, message: str, last_output: str | None = None):
        self.last_output = last_output
        super().__init__(message)


@dataclass(frozen=True)
class GenerationRequest:
    system: str
    user: str
    response_schema: Mapping | None = None
    temperature: float = 1.0
    max_tokens: int = 4096

    def __post_init__(self) -> None:
        if not self.system or not self.user:
            raise ValueError("prompts must be non-empty")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True)
class TokenUsage:
    prompt_tokens: int = 0
    completion_tokens: int = 0

    def __post_init__(self) -> None:
        if self.prompt_tokens < 0 or self.completion_tokens < 0:
            raise ValueError("token counts must be non-negative")

    def __add__(self, other: "TokenUsage") -> "TokenUsage":
        return TokenUsage(
            self.prompt_tokens + other.prompt_tokens,
            self.completion_tokens + other.completion_tokens,
        )


class UsageAccumulator:
    """Thread-safe per-stage token accounting."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._stages: dict[str, TokenUsage] = {}
        self._calls: dict[str, int] = {}

    def add(self, stage: str, usage: TokenUsage) -> None:
        with self._lock:
            self._stages[stage] = self._stages.get(stage, TokenUsage()) + usage
            self._calls[stage] = self._calls.get(stage, 0) + 1

    def calls(self, stage: str) -> int:
        with self._lock:
            return self._calls.get(stage, 0)

    def report(self, exclude: Iterable[str] = ()) -> dict:
        """Per-stage and total usage; stages in ``exclude`` are dropped from
        the totals (and the listing), as in reports that skip ontology mining."""
        excluded = set(exclude)
        with self._lock:
            stages = {
                stage: {
                    "prompt_tokens": u.prompt_tokens,
                    "completion_tokens": u.completion_tokens,
                    "calls": self._calls[stage],
                }
                for stage, u in self._stages.items()
                if stage not in excluded
            }
        total_prompt = sum(s["prompt_tokens"] for s in stages.values())
        total_completion = sum(s["completion_tokens"] for s in stages.values())
        return {
            "stages": stages,
            "total": {"prompt_tokens": total_prompt, "completion_tokens": total_completion},
        }


class Backend(Protocol):
    def complete(self, request: GenerationRequest, stage: str) -> tuple[str, TokenUsage]:
        """One raw model call; returns (text, usage)."""


def prompt_key(system: str, user: str) -> str:
    """Content hash used by mock scripts in by-hash mode."""
    digest = hashlib.sha256((system + "\x00" + user).encode("utf-8")).hexdigest()
    return digest[:16]


class ScriptExhaustedError(TransportError):
    pass


class MockBackend:
    """Deterministic scripted backend for tests and replayable fixtures.

    Sequence mode consumes per-stage reply lists in order; by-hash mode keys
    replies on ``prompt_key(system, user)`` (each key may hold a list that is
    consumed in order, for retry scripts). Every call is captured for prompt
    assertions.
    """

    def __init__(
        self,
        stages: Mapping[str, list] | None = None,
        by_hash: Mapping[str, Any] | None = None,
    ):
        self._lock = threading.Lock()
        self._stages = {name: list(entries) for name, entries in (stages or {}).items()}
        self._cursors: dict[str, int] = {name: 0 for name in self._stages}
        self._by_hash = {key: self._as_entry_list(val) for key, val in (by_hash or {}).items()}
        self._hash_cursors: dict[str, int] = {key: 0 for key in self._by_hash}
        self.calls: list[tuple[str, GenerationRequest]] = []

    @staticmethod
    def _as_entry_list(value: Any) -> list:
        return list(value) if isinstance(value, list) else [value]

    @classmethod
    def from_file(cls, path: str | Path) -> "MockBackend":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(stages=data.get("stages"), by_hash=data.get("by_hash"))

    @staticmethod
    def entry_text(entry: Any) -> str:
        if isinstance(entry, str):
            return entry
        if "json" in entry:
            return json.dumps(entry["json"])
        return entry["text"]

    @staticmethod
    def entry_usage(entry: Any) -> TokenUsage:
        if isinstance(entry, str):
            return TokenUsage()
        return TokenUsage(
            prompt_tokens=int(entry.get("prompt_tokens", 0)),
            completion_tokens=int(entry.get("completion_tokens", 0)),
        )

    def complete(self, request: GenerationRequest, stage: str) -> tuple[str, TokenUsage]:
        with self._lock:
            self.calls.append((stage, request))
            key = prompt_key(request.system, request.user)
            if key in self._by_hash:
                entries = self._by_hash[key]
                cursor = self._hash_cursors[key]
                entry = entries[min(cursor, len(entries) - 1)]
                self._hash_cursors[key] = cursor + 1
                return self.entry_text(entry), self.entry_usage(entry)
            if stage in self._stages:
                cursor = self._cursors[stage]
                if cursor >= len(self._stages[stage]):
                    raise ScriptExhaustedError(f"mock script for stage {stage!r} exhausted")
                entry = self._stages[stage][cursor]
                self._cursors[stage] = cursor + 1
                return self.entry_text(entry), self.entry_usage(entry)
            raise ScriptExhaustedError(
                f"no scripted reply for stage {stage!r}, prompt key {key}"
            )

    def prompts(self, stage: str | None = None) -> list[GenerationRequest]:
        with self._lock:
            return [req for s, req in self.calls if stage is None or s == stage]


@dataclass
class HttpChatBackend:
    """OpenAI-compatible /chat/completions client."""

    base_url: str
    api_key: str = ""
    model: str = ""
    reasoning_effort: str | None = None
    timeout: float = 120.0
    transport_retries: int = 3

    def complete(self, request: GenerationRequest, stage: str) -> tuple[str, TokenUsage]:
        import httpx

        payload: dict[str, Any] = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        if self.reasoning_effort:
            payload["reasoning_effort"] = self.reasoning_effort
        if request.response_schema is not None:
            payload["response_format"] = {
                "type": "json_schema",
                "json_schema": {"name": "response", "schema": dict(request.response_schema)},
            }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        url = self.base_url.rstrip("/") + "/chat/completions"

        last_error: Exception | None = None
        for attempt in range(self.transport_retries):
            try:
                response = httpx.post(url, json=payload, headers=headers, timeout=self.timeout)
                response.raise_for_status()
                body = response.json()
                text = body["choices"][0]["message"]["content"] or ""
                usage = body.get("usage", {})
                return text, TokenUsage(
                    prompt_tokens=int(usage.get("prompt_tokens", 0)),
                    completion_tokens=int(usage.get("completion_tokens", 0)),
                )
            except (httpx.HTTPError, KeyError, ValueError) as exc:
                last_error = exc
                logger.warning("backend call failed (attempt %d): %s", attempt + 1, exc)
                if attempt + 1 < self.transport_retries:
                    time.sleep(min(2.0**attempt, 8.0))
        raise TransportError(f"backend unreachable after {self.transport_retries} attempts: {last_error}")

    @classmethod
    def from_env(cls, env: Mapping[str, str] | None = None) -> "HttpChatBackend":
        env = env if env is not None else os.environ
        base_url = env.get("ARGREC_API_BASE", "")
        if not base_url:
            raise ValueError("ARGREC_API_BASE is not set")
        return cls(
            base_url=base_url,
            api_key=env.get("ARGREC_API_KEY", ""),
            model=env.get("ARGREC_MODEL", ""),
            reasoning_effort=env.get("ARGREC_REASONING_EFFORT") or None,
            timeout=float(env.get("ARGREC_TIMEOUT", "120")),
        )


def backend_from_env(env: Mapping[str, str] | None = None) -> Backend:
    """Pick the configured backend: ARGREC_BACKEND=mock needs ARGREC_MOCK_SCRIPT,
    anything else falls through to the HTTP client."""
    env = env if env is not None else os.environ
    kind = env.get("ARGREC_BACKEND", "http").lower()
    if kind == "mock":
        script = env.get("ARGREC_MOCK_SCRIPT")
        if not script:
            raise ValueError("ARGREC_MOCK_SCRIPT is not set")
        return MockBackend.from_file(script)
    return HttpChatBackend.from_env(env)


def _strip_fences(text: str) -> str:
    stripped = text.strip()
    if stripped.startswith("```"):
        stripped = stripped.split("\n", 1)[1] if "\n" in stripped else ""
        if stripped.rstrip().endswith("```"):
            stripped = stripped.rstrip()[: -len("```")]
    return stripped.strip()


def generate(
    backend: Backend,
    request: GenerationRequest,
    usage: UsageAccumulator,
    stage: str,
    retries: int = DEFAULT_RETRIES,
) -> str | Any:
    """One generation; with a response schema the reply must parse as JSON and
    validate, otherwise the call is retried with the error appended to the
    prompt, up to the budget. Returns raw text, or the parsed JSON when a
    schema was supplied."""
    validator = None
    if request.response_schema is not None:
        validator = jsonschema.Draft202012Validator(dict(request.response_schema))

    attempt_request = request
    last_output: str | None = None
    for attempt in range(max(1, retries)):
        text, used = backend.complete(attempt_request, stage)
        usage.add(stage, used)
        if validator is None:
            return text
        last_output = text
        try:
            parsed = json.loads(_strip_fences(text))
        except json.JSONDecodeError as exc:
            error = f"reply was not valid JSON: {exc}"
        else:
            problems = sorted(validator.iter_errors(parsed), key=str)
            if not problems:
                return parsed
            error = "; ".join(p.message for p in problems[:3])
        logger.info("structured output attempt %d rejected: %s", attempt + 1, error)
        attempt_request = GenerationRequest(
            system=request.system,
            user=(
                request.user
                + f"\n\nYour previous reply was rejected: {error}\n"
                + "Reply again with JSON that conforms to the required schema."
            ),
            response_schema=request.response_schema,
            temperature=request.temperature,
            max_tokens=request.max_tokens,
        )
    raise GenerationError(
        f"structured output failed after {retries} attempts", last_output=last_output
    )
