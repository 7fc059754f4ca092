"""End-to-end exercise runner: drives one session through the whole
workflow against a facilitator backend.

Turn placement: one backend turn in ScenarioPresentation, then one per
visit to InitialResponse and IncidentAnalysis, until a resolution marker
arrives or the clock runs out. The resolution verdict at ResolvedCheck
is read from the facilitator's marker; the time verdict from the clock.
With a tick clock, a fixed session id, and a scripted backend the whole
transcript is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Callable

from ..exercise import (
    EventKind,
    ExerciseSession,
    Participant,
    Phase,
    Role,
    RoleKind,
    Scenario,
    Signal,
    advance,
    assign_role,
    create_session,
)
from ..facilitator.actions import ParseResult
from ..facilitator.backends import BackendConfig
from ..facilitator.turns import next_turn, run_retrospective


class TickClock:
    """Deterministic clock: starts at a fixed instant and advances a fixed
    step on every reading."""

    def __init__(self, start: datetime, step_seconds: float = 60.0):
        self.current = start
        self.step = timedelta(seconds=step_seconds)

    def now(self) -> datetime:
        reading = self.current
        self.current = self.current + self.step
        return reading


class WallClock:
    def now(self) -> datetime:
        return datetime.now(timezone.utc)


@dataclass
class RunResult:
    session: ExerciseSession
    retrospective_text: str = ""
    parsed: ParseResult = field(default_factory=ParseResult)


def resolution_seen(session: ExerciseSession) -> bool:
    if session.resolved:
        return True
    return any(
        e.kind is EventKind.INJECT and e.body.get("resolution_declared")
        for e in session.events
    )


def run_exercise(
    scenario: Scenario,
    participants: list[Participant],
    time_budget: timedelta,
    backend,
    backend_config: BackendConfig,
    input_fn: Callable[[str], str],
    output_fn: Callable[[str], None] = lambda line: None,
    clock=None,
    session_id: str | None = None,
    human_role: Role = Role(RoleKind.INCIDENT_COMMANDER),
) -> RunResult:
    """Run a complete exercise and its retrospective.

    ``input_fn(prompt)`` supplies the human response whenever the
    facilitator pauses. Backend errors propagate to the caller with the
    session left resumable.
    """
    clock = clock or WallClock()
    session = create_session(
        scenario,
        participants,
        time_budget,
        session_id=session_id,
        started_at=clock.now(),
    )

    def turn(pending: str | None) -> str | None:
        message = next_turn(
            session,
            pending,
            backend,
            config=backend_config,
            now=clock.now(),
            participant_id=participants[0].participant_id if pending else None,
        )
        output_fn(f"[facilitator] {message.narrative}")
        if message.pause_requested:
            return input_fn("your response> ")
        return None

    advance(session, Signal.PROCEED, now=clock.now())  # -> ScenarioPresentation
    pending = turn(None)

    advance(session, Signal.PROCEED, now=clock.now())  # -> RoleAssignment
    assign_role(session, participants[0].participant_id, human_role, now=clock.now())
    advance(session, Signal.PROCEED, now=clock.now())  # -> InitialResponse

    while True:
        if not resolution_seen(session):
            pending = turn(pending)
        advance(session, Signal.PROCEED, now=clock.now())  # -> IncidentAnalysis
        if not resolution_seen(session):
            pending = turn(pending)
        advance(session, Signal.PROCEED, now=clock.now())  # -> ResolvedCheck
        verdict = Signal.RESOLVED_YES if resolution_seen(session) else Signal.RESOLVED_NO
        _, phase = advance(session, verdict, now=clock.now())
        if phase is Phase.DEBRIEF:
            break
        _, phase = advance(session, Signal.CLOCK, now=clock.now())  # TimeCheck
        if phase is Phase.DEBRIEF:
            break
        # else looped back to InitialResponse

    text, parsed = run_retrospective(
        session, backend, config=backend_config, now=clock.now()
    )
    output_fn(f"[retrospective] {text}")
    for item in parsed.items:
        output_fn(f"[action-item] {item.finding} -> {item.improvement}")
    for warning in parsed.warnings:
        output_fn(f"[warning] {warning}")

    advance(session, Signal.PROCEED, now=clock.now())  # -> UpdatePolicies
    advance(session, Signal.PROCEED, now=clock.now())  # -> End
    return RunResult(session=session, retrospective_text=text, parsed=parsed)
