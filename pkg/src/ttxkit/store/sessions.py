"""File-backed session store: one directory per session holding a header
document and an append-only JSONL event log.

Appends are durable before acknowledgment (flush + fsync) and serialized
per session by an in-process lock plus a cross-process file lock, so two
concurrent appenders can never claim the same sequence slot. Loading
replays the event log over the header fields, which is what makes the
store event-sourced: state(load(save(s))) == state(s).
"""

from __future__ import annotations

import fcntl
import json
import os
import threading
from contextlib import contextmanager
from datetime import datetime, timedelta
from pathlib import Path

from ..errors import ConflictError, IntegrityError, NotFoundError, ValidationError
from ..exercise import (
    ExerciseSession,
    Participant,
    Scenario,
    SessionEvent,
    replay_session,
)

FORMAT_VERSION = 1


class SessionStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.sessions_dir = self.root / "sessions"
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _session_dir(self, session_id: str) -> Path:
        if not session_id or "/" in session_id or session_id.startswith("."):
            raise ValidationError(f"invalid session id {session_id!r}")
        return self.sessions_dir / session_id

    def _thread_lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(session_id, threading.Lock())

    @contextmanager
    def _locked(self, session_id: str, create: bool = False):
        directory = self._session_dir(session_id)
        if create:
            directory.mkdir(parents=True, exist_ok=True)
        if not directory.is_dir():
            raise NotFoundError(f"no stored session {session_id!r}")
        with self._thread_lock(session_id):
            with open(directory / ".lock", "w") as lock_file:
                fcntl.flock(lock_file, fcntl.LOCK_EX)
                try:
                    yield directory
                finally:
                    fcntl.flock(lock_file, fcntl.LOCK_UN)

    # -- save / load ---------------------------------------------------

    def save_session(self, session: ExerciseSession) -> str:
        """Persist header and sync the event log; returns the record id.

        For an existing record, events past the stored tail are appended;
        a disk log longer than the in-memory session is a conflict.
        """
        with self._locked(session.session_id, create=True) as directory:
            header_path = directory / "header"
            if not header_path.exists():
                self._write_header(header_path, session)
            log_path = directory / "events.log"
            stored = self._read_log(log_path) if log_path.exists() else []
            if len(stored) > len(session.events):
                raise ConflictError(
                    f"stored log has {len(stored)} events, session only {len(session.events)}"
                )
            new_events = session.events[len(stored):]
            if new_events:
                self._append_lines(log_path, new_events)
        return session.session_id

    def load_session(self, record_id: str) -> ExerciseSession:
        directory = self._session_dir(record_id)
        header_path = directory / "header"
        if not header_path.exists():
            raise NotFoundError(f"no stored session {record_id!r}")
        header = json.loads(header_path.read_text(encoding="utf-8"))
        events = self._read_log(directory / "events.log")
        self._check_gapless(events)
        return replay_session(
            session_id=header["session_id"],
            scenario=Scenario.from_dict(header["scenario"]),
            participants=[Participant.from_dict(p) for p in header["participants"]],
            started_at=datetime.fromisoformat(header["started_at"]),
            time_budget=timedelta(seconds=header["time_budget_seconds"]),
            events=events,
            transcript_ref=header.get("transcript_ref", header["session_id"]),
        )

    def list_sessions(self) -> list[str]:
        return sorted(
            p.name for p in self.sessions_dir.iterdir() if (p / "header").exists()
        )

    # -- incremental append ---------------------------------------------

    def append_event(self, record_id: str, event: SessionEvent) -> int:
        """Append one event at the tail; acknowledged only once durable.

        The event must carry sequence tail + 1, otherwise the caller lost
        a race and should retry with a refreshed tail.
        """
        with self._locked(record_id) as directory:
            log_path = directory / "events.log"
            tail = self._tail_sequence(log_path)
            if event.sequence_number != tail + 1:
                raise ConflictError(
                    f"sequence {event.sequence_number} conflicts with tail {tail}"
                )
            self._append_lines(log_path, [event])
            return event.sequence_number

    def tail_sequence(self, record_id: str) -> int:
        with self._locked(record_id) as directory:
            return self._tail_sequence(directory / "events.log")

    # -- helpers ---------------------------------------------------------

    def _write_header(self, path: Path, session: ExerciseSession) -> None:
        header = {
            "format_version": FORMAT_VERSION,
            "session_id": session.session_id,
            "scenario": session.scenario.to_dict(),
            "participants": [
                {"participant_id": p.participant_id, "display_name": p.display_name}
                for p in session.participants
            ],
            "started_at": session.started_at.isoformat(),
            "time_budget_seconds": session.time_budget.total_seconds(),
            "transcript_ref": session.transcript_ref,
        }
        tmp = path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as handle:
            json.dump(header, handle)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp, path)

    @staticmethod
    def _append_lines(log_path: Path, events: list[SessionEvent]) -> None:
        with open(log_path, "a", encoding="utf-8") as handle:
            for event in events:
                record = {"format_version": FORMAT_VERSION, **event.to_dict()}
                handle.write(json.dumps(record) + "\n")
            handle.flush()
            os.fsync(handle.fileno())

    @staticmethod
    def _tail_sequence(log_path: Path) -> int:
        if not log_path.exists():
            return 0
        tail = 0
        with open(log_path, encoding="utf-8") as handle:
            for line in handle:
                if line.strip():
                    tail = json.loads(line)["sequence_number"]
        return tail

    @staticmethod
    def _read_log(log_path: Path) -> list[SessionEvent]:
        events: list[SessionEvent] = []
        if not log_path.exists():
            return events
        with open(log_path, encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    events.append(SessionEvent.from_dict(record))
                except (json.JSONDecodeError, KeyError, ValueError) as exc:
                    raise IntegrityError(
                        f"corrupt event at line {line_no}: {exc}", sequence_number=line_no
                    ) from None
        return events

    @staticmethod
    def _check_gapless(events: list[SessionEvent]) -> None:
        for index, event in enumerate(events, start=1):
            if event.sequence_number != index:
                raise IntegrityError(
                    f"event log gap: expected sequence {index}, "
                    f"found {event.sequence_number}",
                    sequence_number=event.sequence_number,
                )
