"""Uniform interface to text-generation backends.

A Gateway wraps one transport (live HTTP, scripted mock, or cassette
replay) with per-backend admission control, a bounded retry budget and
optional transcript recording.  Requests are keyed by a deterministic
fingerprint so a recorded session replays byte-identically offline.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Mapping, Protocol, Sequence

from .errors import (
    AuthError,
    CassetteError,
    NoMatchingRuleError,
    ReplayMissError,
    TransportError,
)

DEFAULT_MAX_ATTEMPTS = 3


@dataclass(frozen=True)
class BackendConfig:
    backend_id: str
    endpoint: str = ""
    auth_ref: str = ""
    max_concurrent: int = 4
    request_timeout: float = 60.0
    sampling: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.max_concurrent < 1:
            raise ValueError("max_concurrent must be at least 1")
        if self.request_timeout <= 0:
            raise ValueError("request_timeout must be positive")


def fingerprint(
    backend_id: str,
    system_role: str,
    user_text: str,
    sampling: Mapping[str, object],
    nonce: str = "",
) -> str:
    """Deterministic request key over backend, full prompt and sampling.

    The nonce distinguishes deliberate re-samples of an identical prompt
    (e.g. repetition 2 of 3) so cassettes keep one response per key.
    """
    payload = json.dumps(
        {
            "backend_id": backend_id,
            "system_role": system_role,
            "user_text": user_text,
            "sampling": dict(sorted(sampling.items())),
            "nonce": nonce,
        },
        sort_keys=True,
        ensure_ascii=False,
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ChatRequest:
    system_role: str
    user_text: str
    nonce: str = ""
    request_fingerprint: str = ""

    @classmethod
    def build(
        cls, config: BackendConfig, user_text: str, system_role: str = "", nonce: str = ""
    ) -> "ChatRequest":
        return cls(
            system_role=system_role,
            user_text=user_text,
            nonce=nonce,
            request_fingerprint=fingerprint(
                config.backend_id, system_role, user_text, config.sampling, nonce
            ),
        )


@dataclass(frozen=True)
class Transcript:
    fingerprint: str
    backend_id: str
    system_role: str
    user_text: str
    sampling: Mapping[str, object]
    nonce: str
    response_text: str
    latency: float
    timestamp: str
    attempts: int

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "fingerprint": self.fingerprint,
                "backend_id": self.backend_id,
                "system_role": self.system_role,
                "user_text": self.user_text,
                "sampling": dict(self.sampling),
                "nonce": self.nonce,
                "response_text": self.response_text,
                "latency": self.latency,
                "timestamp": self.timestamp,
                "attempts": self.attempts,
            },
            sort_keys=True,
            ensure_ascii=False,
            separators=(",", ":"),
        )

    @classmethod
    def from_json_line(cls, line: str, line_number: int) -> "Transcript":
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CassetteError(f"corrupt cassette record: {exc}", line_number) from exc
        try:
            return cls(
                fingerprint=data["fingerprint"],
                backend_id=data["backend_id"],
                system_role=data.get("system_role", ""),
                user_text=data["user_text"],
                sampling=data.get("sampling", {}),
                nonce=data.get("nonce", ""),
                response_text=data["response_text"],
                latency=float(data.get("latency", 0.0)),
                timestamp=data.get("timestamp", ""),
                attempts=int(data.get("attempts", 1)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CassetteError(f"cassette record missing field: {exc}", line_number) from exc


@dataclass(frozen=True)
class TransportReply:
    """Response text plus provenance when served from a recording."""

    text: str
    timestamp: str | None = None
    latency: float | None = None


class Transport(Protocol):
    def send(self, config: BackendConfig, request: ChatRequest) -> TransportReply: ...


class MockBackend:
    """Scripted transport: first matching rule wins.

    Rules map a matcher to a response.  A string matcher matches when it is
    a substring of the combined system + user text (the empty string matches
    everything); a callable matcher receives the ChatRequest.  Responses are
    strings or callables of the request.
    """

    def __init__(
        self,
        rules: Mapping[str, object] | Sequence[tuple[object, object]],
        latency: float = 0.0,
    ):
        self._rules = list(rules.items()) if isinstance(rules, Mapping) else list(rules)
        self._latency = latency
        self.calls: list[ChatRequest] = []
        self._lock = threading.Lock()

    def send(self, config: BackendConfig, request: ChatRequest) -> TransportReply:
        with self._lock:
            self.calls.append(request)
        haystack = request.system_role + "\n" + request.user_text
        for matcher, response in self._rules:
            if callable(matcher):
                hit = matcher(request)
            else:
                hit = str(matcher) in haystack
            if hit:
                text = response(request) if callable(response) else str(response)
                return TransportReply(text=text, latency=self._latency)
        raise NoMatchingRuleError(
            f"no mock rule matched request {request.request_fingerprint}"
        )


def mock_backend(
    rules: Mapping[str, object] | Sequence[tuple[object, object]]
) -> MockBackend:
    return MockBackend(rules)


class ReplayBackend:
    """Serves recorded responses by fingerprint; never touches the network."""

    def __init__(self, transcripts: Mapping[str, Transcript]):
        self._transcripts = dict(transcripts)

    def __len__(self) -> int:
        return len(self._transcripts)

    def transcript(self, fp: str) -> Transcript:
        try:
            return self._transcripts[fp]
        except KeyError:
            raise ReplayMissError(fp) from None

    def send(self, config: BackendConfig, request: ChatRequest) -> TransportReply:
        t = self.transcript(request.request_fingerprint)
        return TransportReply(text=t.response_text, timestamp=t.timestamp, latency=t.latency)


def load_cassette(path: str | Path) -> dict[str, Transcript]:
    """Parse a cassette file, failing closed on corruption or duplicates."""
    transcripts: dict[str, Transcript] = {}
    with open(path, encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            t = Transcript.from_json_line(line, line_number)
            if t.fingerprint in transcripts:
                raise CassetteError(
                    f"duplicate fingerprint {t.fingerprint}", line_number
                )
            transcripts[t.fingerprint] = t
    return transcripts


def replay_cassette(path: str | Path) -> ReplayBackend:
    return ReplayBackend(load_cassette(path))


class CassetteRecorder:
    """Append-only transcript sink; keeps one record per fingerprint."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._seen: set[str] = set()
        if self.path.exists():
            self._seen = set(load_cassette(self.path))

    def append(self, transcript: Transcript) -> None:
        with self._lock:
            if transcript.fingerprint in self._seen:
                return
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(transcript.to_json_line() + "\n")
            self._seen.add(transcript.fingerprint)


def record_cassette(path: str | Path) -> CassetteRecorder:
    return CassetteRecorder(path)


class HttpBackend:
    """Minimal adapter for OpenAI-style chat-completion endpoints.

    Wire format details stay here; the rest of the system only sees
    ChatRequest in and response text out.
    """

    def send(self, config: BackendConfig, request: ChatRequest) -> TransportReply:
        import os
        import urllib.error
        import urllib.request

        if not config.endpoint.startswith(("http://", "https://")):
            raise TransportError(
                f"backend {config.backend_id} has no live endpoint "
                f"({config.endpoint!r}); use a cassette or mock",
                fingerprint=request.request_fingerprint,
            )
        headers = {"Content-Type": "application/json"}
        if config.auth_ref:
            token = os.environ.get(config.auth_ref)
            if not token:
                raise AuthError(
                    f"environment variable {config.auth_ref} is not set for "
                    f"backend {config.backend_id}"
                )
            headers["Authorization"] = f"Bearer {token}"
        messages = []
        if request.system_role:
            messages.append({"role": "system", "content": request.system_role})
        messages.append({"role": "user", "content": request.user_text})
        body = {"model": config.backend_id, "messages": messages, **dict(config.sampling)}
        req = urllib.request.Request(
            config.endpoint,
            data=json.dumps(body).encode("utf-8"),
            headers=headers,
            method="POST",
        )
        try:
            with urllib.request.urlopen(req, timeout=config.request_timeout) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except urllib.error.HTTPError as exc:
            if exc.code in (401, 403):
                raise AuthError(
                    f"backend {config.backend_id} rejected credentials ({exc.code})"
                ) from exc
            raise TransportError(
                f"backend {config.backend_id} returned HTTP {exc.code}",
                fingerprint=request.request_fingerprint,
            ) from exc
        except (urllib.error.URLError, TimeoutError, OSError) as exc:
            raise TransportError(
                f"backend {config.backend_id} unreachable: {exc}",
                fingerprint=request.request_fingerprint,
            ) from exc
        try:
            text = payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise TransportError(
                f"backend {config.backend_id} returned an unexpected payload shape",
                fingerprint=request.request_fingerprint,
            ) from exc
        return TransportReply(text=text)


class Gateway:
    """Admission-controlled, retrying front door to one backend."""

    def __init__(
        self,
        config: BackendConfig,
        transport: Transport,
        recorder: CassetteRecorder | None = None,
        max_attempts: int = DEFAULT_MAX_ATTEMPTS,
        backoff_base: float = 0.25,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if max_attempts < 1:
            raise ValueError("max_attempts must be at least 1")
        self.config = config
        self.transport = transport
        self.recorder = recorder
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self._sleep = sleep
        self._admission = threading.BoundedSemaphore(config.max_concurrent)

    @property
    def backend_id(self) -> str:
        return self.config.backend_id

    def request(self, user_text: str, system_role: str = "", nonce: str = "") -> ChatRequest:
        return ChatRequest.build(self.config, user_text, system_role, nonce)

    def call(self, request: ChatRequest) -> Transcript:
        """Send with retries; returns the full transcript of the exchange."""
        last_error: TransportError | None = None
        with self._admission:
            for attempt in range(1, self.max_attempts + 1):
                started = time.perf_counter()
                try:
                    reply = self.transport.send(self.config, request)
                    if not reply.text:
                        raise TransportError(
                            f"backend {self.config.backend_id} returned an empty response",
                            fingerprint=request.request_fingerprint,
                        )
                except TransportError as exc:
                    last_error = exc
                    if attempt < self.max_attempts:
                        self._sleep(self.backoff_base * (2 ** (attempt - 1)))
                    continue
                elapsed = time.perf_counter() - started
                transcript = Transcript(
                    fingerprint=request.request_fingerprint,
                    backend_id=self.config.backend_id,
                    system_role=request.system_role,
                    user_text=request.user_text,
                    sampling=self.config.sampling,
                    nonce=request.nonce,
                    response_text=reply.text,
                    latency=reply.latency if reply.latency is not None else elapsed,
                    timestamp=(
                        reply.timestamp
                        if reply.timestamp is not None
                        else datetime.now(timezone.utc).isoformat()
                    ),
                    attempts=attempt,
                )
                if self.recorder is not None:
                    self.recorder.append(transcript)
                return transcript
        assert last_error is not None
        raise TransportError(
            f"giving up after {self.max_attempts} attempts: {last_error}",
            fingerprint=request.request_fingerprint,
        )

    def complete(self, request: ChatRequest) -> str:
        """Response text for one request (the common fast path)."""
        return self.call(request).response_text


def complete(config: BackendConfig, request: ChatRequest, transport: Transport) -> str:
    """One-shot convenience wrapper around a throwaway Gateway."""
    return Gateway(config, transport).complete(request)
