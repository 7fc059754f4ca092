"""Facilitator backends: a deterministic scripted mock and a live HTTP
chat-completion client.

The mock replays a JSONL script of facilitator messages with explicit
pause/resolution flags; every session gets its own cursor. The live
client posts role-tagged messages to a chat-completion endpoint, retries
transport errors with exponential backoff, never retries auth failures,
and surfaces the model's reply text verbatim.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import httpx

from ..errors import BackendError, BackendTimeout, ScriptExhaustedError, ValidationError

RESOLUTION_SENTINEL = "INCIDENT RESOLVED"


@dataclass(frozen=True)
class FacilitatorMessage:
    """One facilitator turn: narrative plus protocol flags."""

    narrative: str
    pause_requested: bool = False
    resolution_declared: bool = False
    simulated_roles: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.narrative.strip():
            raise ValidationError("facilitator narrative must be non-empty")
        if self.resolution_declared and self.pause_requested:
            raise ValidationError("a resolution message cannot also request a pause")

    def to_dict(self) -> dict:
        return {
            "narrative": self.narrative,
            "pause_requested": self.pause_requested,
            "resolution_declared": self.resolution_declared,
            "simulated_roles": list(self.simulated_roles),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FacilitatorMessage":
        return cls(
            narrative=data["narrative"],
            pause_requested=data.get("pause_requested", False),
            resolution_declared=data.get("resolution_declared", False),
            simulated_roles=tuple(data.get("simulated_roles", [])),
        )


@dataclass(frozen=True)
class BackendConfig:
    mode: str = "mock"  # "mock" | "live"
    endpoint: str = ""
    credential_env: str = ""
    model: str = ""
    token_limit: int = 8192
    timeout_seconds: float = 30.0
    retries: int = 2
    backoff_seconds: float = 0.5
    script_path: str = ""

    def __post_init__(self):
        if self.mode not in ("mock", "live"):
            raise ValidationError(f"backend mode must be 'mock' or 'live', got {self.mode!r}")
        if self.token_limit <= 0:
            raise ValidationError("token_limit must be positive")
        if self.mode == "live":
            if not self.endpoint:
                raise ValidationError("live backend requires an endpoint")
            if not self.credential_env:
                raise ValidationError("live backend requires a credential environment variable name")


class MockScript:
    """Ordered facilitator messages loaded from a JSONL script file."""

    def __init__(self, messages: Sequence[FacilitatorMessage]):
        self.messages = tuple(messages)

    @classmethod
    def load(cls, path: str | Path) -> "MockScript":
        messages = []
        with open(path, encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValidationError(f"script line {line_no}: invalid JSON ({exc})") from None
                messages.append(FacilitatorMessage.from_dict(record))
        if not messages:
            raise ValidationError(f"script {path} contains no messages")
        return cls(messages)

    @staticmethod
    def dump(messages: Sequence[FacilitatorMessage], path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            for message in messages:
                handle.write(json.dumps(message.to_dict()) + "\n")

    def player(self, start: int = 0) -> "MockBackend":
        """Independent cursor over the script; one per session. ``start``
        skips messages already consumed (replaying a stored session)."""
        return MockBackend(self, start=start)


class MockBackend:
    def __init__(self, script: MockScript, start: int = 0):
        self.script = script
        self._cursor = start
        self._lock = threading.Lock()

    def next_message(self, messages: Sequence[dict]) -> FacilitatorMessage:
        """Return the next scripted message regardless of the input."""
        with self._lock:
            if self._cursor >= len(self.script.messages):
                raise ScriptExhaustedError(
                    f"mock script exhausted after {len(self.script.messages)} messages"
                )
            message = self.script.messages[self._cursor]
            self._cursor += 1
            return message


def parse_live_reply(text: str, human_role_names: Sequence[str] = ()) -> FacilitatorMessage:
    """Interpret a raw model reply under the wire protocol.

    Resolution: the sentinel line appears anywhere in the reply. Pause:
    the reply's last non-empty line is a question aimed at one of the
    named human roles (or any question when no names are known).
    """
    resolution = any(RESOLUTION_SENTINEL in line for line in text.splitlines())
    pause = False
    if not resolution:
        last_line = next((l for l in reversed(text.splitlines()) if l.strip()), "")
        if last_line.rstrip().endswith("?"):
            if not human_role_names:
                pause = True
            else:
                lowered = last_line.lower()
                pause = any(name.lower() in lowered for name in human_role_names)
    return FacilitatorMessage(
        narrative=text,
        pause_requested=pause,
        resolution_declared=resolution,
    )


class LiveBackend:
    """Chat-completion HTTP client with bounded retry on transport errors."""

    def __init__(
        self,
        config: BackendConfig,
        transport: httpx.BaseTransport | None = None,
        human_role_names: Sequence[str] = (),
        sleep=time.sleep,
    ):
        if config.mode != "live":
            raise ValidationError("LiveBackend requires a live-mode config")
        credential = os.environ.get(config.credential_env, "")
        if not credential:
            raise ValidationError(
                f"credential environment variable {config.credential_env!r} is not set"
            )
        self.config = config
        self.human_role_names = tuple(human_role_names)
        self._sleep = sleep
        self._client = httpx.Client(
            transport=transport,
            timeout=config.timeout_seconds,
            headers={"Authorization": f"Bearer {credential}"},
        )

    def close(self) -> None:
        self._client.close()

    def next_message(self, messages: Sequence[dict]) -> FacilitatorMessage:
        """POST the message list unmodified; surface the reply verbatim."""
        payload = {
            "model": self.config.model,
            "messages": list(messages),
            "max_tokens": self.config.token_limit,
        }
        attempts = self.config.retries + 1
        last_error: Exception | None = None
        for attempt in range(attempts):
            try:
                response = self._client.post(self.config.endpoint, json=payload)
            except httpx.TimeoutException as exc:
                last_error = exc
            except httpx.TransportError as exc:
                last_error = exc
            else:
                if response.status_code in (401, 403):
                    raise BackendError(f"authentication rejected ({response.status_code})")
                if response.status_code >= 400:
                    raise BackendError(
                        f"backend returned {response.status_code}: {response.text[:200]}"
                    )
                return self._parse_response(response)
            if attempt + 1 < attempts:
                self._sleep(self.config.backoff_seconds * (2**attempt))
        raise BackendTimeout(
            f"backend unreachable after {attempts} attempts: {last_error}"
        )

    def _parse_response(self, response: httpx.Response) -> FacilitatorMessage:
        try:
            body = response.json()
            content = body["choices"][0]["message"]["content"]
        except (json.JSONDecodeError, KeyError, IndexError, TypeError) as exc:
            raise BackendError(f"malformed backend response: {exc}") from None
        return parse_live_reply(content, self.human_role_names)


def make_backend(
    config: BackendConfig,
    transport: httpx.BaseTransport | None = None,
    human_role_names: Sequence[str] = (),
):
    """Build the configured backend. Mock scripts get a fresh cursor."""
    if config.mode == "mock":
        if not config.script_path:
            raise ValidationError("mock backend requires script_path")
        return MockScript.load(config.script_path).player()
    return LiveBackend(config, transport=transport, human_role_names=human_role_names)
