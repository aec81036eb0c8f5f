"""Provider-agnostic chat transport with record/replay and usage accounting.

Live mode posts OpenAI-style chat completions to a configurable endpoint with
bounded exponential retry on 429/5xx.  Replay mode answers from a cassette
keyed by a content hash of (system, user, temperature, model) - prompts and
sampling settings, never timestamps - so identical runs replay identically
and a completed replay run performs zero network operations.
"""

from __future__ import annotations

import hashlib
import json
import math
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

import httpx

CASSETTE_SCHEMA_VERSION = 1


class Stage(str, Enum):
    DISCOVERY = "Discovery"
    EXPANSION = "Expansion"
    VERIFICATION = "Verification"
    AUDIT = "Audit"


class LlmError(Exception):
    pass


class TransportError(LlmError):
    """Live request failed after exhausting the retry budget."""


class ReplayMiss(LlmError):
    """Request hash absent from the loaded cassette."""

    def __init__(self, request_hash: str):
        super().__init__(f"no cassette entry for request hash {request_hash}")
        self.request_hash = request_hash


class CassetteSchemaViolation(LlmError):
    """Cassette file does not conform to the expected schema."""


@dataclass(frozen=True)
class ChatRequest:
    system: str
    user: str
    stage: Stage
    model: str = "deepseek-chat"
    temperature: Optional[float] = None  # None = provider default


@dataclass(frozen=True)
class ChatResponse:
    text: str
    input_tokens: int
    output_tokens: int
    estimated: bool = False


def request_hash(request: ChatRequest) -> str:
    payload = json.dumps(
        {
            "system": request.system,
            "user": request.user,
            "temperature": "default" if request.temperature is None
            else float(request.temperature),
            "model": request.model,
        },
        sort_keys=True,
        ensure_ascii=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def estimate_tokens(text: str) -> int:
    return math.ceil(len(text.encode("utf-8")) / 4)


class LiveBackend:
    """HTTP chat-completions client with bounded exponential backoff."""

    RETRYABLE = {429, 500, 502, 503, 504}

    def __init__(self, endpoint: str, api_key: str = "", timeout: float = 120.0,
                 max_attempts: int = 4, backoff_base: float = 0.5,
                 sleep=time.sleep, transport: Optional[httpx.BaseTransport] = None):
        self.endpoint = endpoint
        self.api_key = api_key
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.sleep = sleep
        self.attempt_log: list[int] = []  # status per attempt, -1 for transport faults
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def complete(self, request: ChatRequest) -> ChatResponse:
        body = {
            "model": request.model,
            "messages": (
                [{"role": "system", "content": request.system}] if request.system else []
            ) + [{"role": "user", "content": request.user}],
        }
        if request.temperature is not None:
            body["temperature"] = request.temperature
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error = "no attempts made"
        for attempt in range(self.max_attempts):
            if attempt:
                self.sleep(self.backoff_base * (2 ** (attempt - 1)))
            try:
                response = self._client.post(self.endpoint, json=body, headers=headers)
            except httpx.HTTPError as exc:
                self.attempt_log.append(-1)
                last_error = str(exc)
                continue
            self.attempt_log.append(response.status_code)
            if response.status_code in self.RETRYABLE:
                last_error = f"HTTP {response.status_code}"
                continue
            if response.status_code != 200:
                raise TransportError(f"HTTP {response.status_code}: {response.text[:200]}")
            return self._parse(request, response.json())
        raise TransportError(
            f"giving up after {self.max_attempts} attempts: {last_error}")

    def _parse(self, request: ChatRequest, payload: dict) -> ChatResponse:
        try:
            text = payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"malformed completion payload: {exc}") from exc
        usage = payload.get("usage") or {}
        in_tokens = usage.get("prompt_tokens")
        out_tokens = usage.get("completion_tokens")
        estimated = in_tokens is None or out_tokens is None
        if in_tokens is None:
            in_tokens = estimate_tokens(request.system + request.user)
        if out_tokens is None:
            out_tokens = estimate_tokens(text)
        return ChatResponse(text, int(in_tokens), int(out_tokens), estimated)

    def close(self):
        self._client.close()


class ReplayBackend:
    """Answers requests from recorded entries; never touches the network."""

    def __init__(self, entries: Optional[dict[str, ChatResponse]] = None):
        self.entries = dict(entries or {})

    def complete(self, request: ChatRequest) -> ChatResponse:
        key = request_hash(request)
        if key not in self.entries:
            raise ReplayMiss(key)
        return self.entries[key]


class ScriptedBackend:
    """Test/backfill helper: a rule decides each reply.

    ``rule(request) -> str`` returns the response text; token counts are
    estimated.  Useful for recording deterministic cassettes.
    """

    def __init__(self, rule):
        self.rule = rule
        self.requests: list[ChatRequest] = []

    def complete(self, request: ChatRequest) -> ChatResponse:
        self.requests.append(request)
        text = self.rule(request)
        return ChatResponse(text, estimate_tokens(request.system + request.user),
                            estimate_tokens(text), estimated=True)


class RecordingBackend:
    """Wraps another backend and captures (request, response) pairs."""

    def __init__(self, inner):
        self.inner = inner
        self.records: list[tuple[ChatRequest, ChatResponse]] = []

    def complete(self, request: ChatRequest) -> ChatResponse:
        response = self.inner.complete(request)
        self.records.append((request, response))
        return response

    def cassette(self) -> dict:
        return record_cassette(self.records)


def record_cassette(records: list[tuple[ChatRequest, ChatResponse]]) -> dict:
    """Serialize (request, response) pairs; later entries win on hash ties."""
    entries = {}
    for request, response in records:
        entries[request_hash(request)] = {
            "hash": request_hash(request),
            "request": {
                "system": request.system,
                "user": request.user,
                "temperature": request.temperature,
                "model": request.model,
                "stage": request.stage.value,
            },
            "response": {
                "text": response.text,
                "input_tokens": response.input_tokens,
                "output_tokens": response.output_tokens,
            },
        }
    return {
        "schema_version": CASSETTE_SCHEMA_VERSION,
        "entries": [entries[k] for k in sorted(entries)],
    }


def save_cassette(records, path: str | Path) -> None:
    Path(path).write_text(json.dumps(record_cassette(records), indent=2) + "\n")


def load_cassette(path: str | Path) -> ReplayBackend:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CassetteSchemaViolation(f"cannot load cassette {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("schema_version") != CASSETTE_SCHEMA_VERSION:
        raise CassetteSchemaViolation(
            f"unsupported cassette schema_version in {path}")
    entries = {}
    for obj in doc.get("entries", []):
        for required in ("hash", "request", "response"):
            if required not in obj:
                raise CassetteSchemaViolation(f"cassette entry missing {required}")
        resp = obj["response"]
        for required in ("text", "input_tokens", "output_tokens"):
            if required not in resp:
                raise CassetteSchemaViolation(f"cassette response missing {required}")
        entries[obj["hash"]] = ChatResponse(
            resp["text"], int(resp["input_tokens"]), int(resp["output_tokens"]))
    return ReplayBackend(entries)


@dataclass(frozen=True)
class LedgerEntry:
    sample_id: str
    stage: Stage
    input_tokens: int
    output_tokens: int
    wall_ms: float
    estimated: bool = False


class UsageLedger:
    """Append-only token/time accounting; appends are serialized."""

    def __init__(self):
        self._entries: list[LedgerEntry] = []
        self._lock = threading.Lock()

    def accrue(self, sample_id: str, stage: Stage, input_tokens: int,
               output_tokens: int, wall_ms: float, estimated: bool = False) -> None:
        if input_tokens < 0 or output_tokens < 0:
            raise ValueError("token counts must be non-negative")
        with self._lock:
            self._entries.append(LedgerEntry(
                sample_id, stage, input_tokens, output_tokens, wall_ms, estimated))

    @property
    def entries(self) -> list[LedgerEntry]:
        with self._lock:
            return list(self._entries)

    def totals(self) -> tuple[int, int]:
        in_total = out_total = 0
        for e in self.entries:
            in_total += e.input_tokens
            out_total += e.output_tokens
        return in_total, out_total

    def per_stage(self) -> dict[Stage, tuple[int, int]]:
        out: dict[Stage, list[int]] = {}
        for e in self.entries:
            acc = out.setdefault(e.stage, [0, 0])
            acc[0] += e.input_tokens
            acc[1] += e.output_tokens
        return {k: (v[0], v[1]) for k, v in out.items()}

    def sample_ids(self) -> list[str]:
        seen: list[str] = []
        for e in self.entries:
            if e.sample_id not in seen:
                seen.append(e.sample_id)
        return seen

    def to_records(self) -> list[dict]:
        return [
            {
                "sample_id": e.sample_id,
                "stage": e.stage.value,
                "input_tokens": e.input_tokens,
                "output_tokens": e.output_tokens,
                "wall_ms": e.wall_ms,
                "estimated": e.estimated,
            }
            for e in self.entries
        ]


class ChatClient:
    """Backend plus ledger: every completion is timed and accounted."""

    def __init__(self, backend, ledger: Optional[UsageLedger] = None):
        self.backend = backend
        self.ledger = ledger or UsageLedger()

    def complete(self, request: ChatRequest, sample_id: str = "") -> ChatResponse:
        start = time.perf_counter()
        response = self.backend.complete(request)
        wall_ms = (time.perf_counter() - start) * 1000.0
        self.ledger.accrue(sample_id, request.stage, response.input_tokens,
                           response.output_tokens, wall_ms, response.estimated)
        return response
