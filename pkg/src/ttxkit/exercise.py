"""Exercise session lifecycle and the ten-phase workflow state machine.

The workflow runs Start through End along a fixed edge set. The two
decision points (incident resolved? time remaining?) are modelled as
explicit phases so the transcript records each verdict. The time check
consults the session clock, which is what guarantees every run
terminates once the time budget is exhausted.

All operations on one session are serialized behind a per-session lock;
the transcript is an append-only, gapless event log.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from enum import Enum

from .errors import ConflictError, IllegalSignalError, NotFoundError, PhaseError, ValidationError


class Phase(str, Enum):
    START = "Start"
    SCENARIO_PRESENTATION = "ScenarioPresentation"
    ROLE_ASSIGNMENT = "RoleAssignment"
    INITIAL_RESPONSE = "InitialResponse"
    INCIDENT_ANALYSIS = "IncidentAnalysis"
    RESOLVED_CHECK = "ResolvedCheck"
    TIME_CHECK = "TimeCheck"
    DEBRIEF = "Debrief"
    UPDATE_POLICIES = "UpdatePolicies"
    END = "End"


class Signal(str, Enum):
    """Advance signals. PROCEED drives every linear edge; the decision
    phases take a resolution verdict or a clock evaluation."""

    PROCEED = "proceed"
    RESOLVED_YES = "resolved_yes"
    RESOLVED_NO = "resolved_no"
    CLOCK = "clock"


# Fig-style workflow edge set: (from, to). TimeCheck has two outgoing
# edges selected by the clock, ResolvedCheck by the verdict signal.
EDGES: frozenset[tuple[Phase, Phase]] = frozenset(
    {
        (Phase.START, Phase.SCENARIO_PRESENTATION),
        (Phase.SCENARIO_PRESENTATION, Phase.ROLE_ASSIGNMENT),
        (Phase.ROLE_ASSIGNMENT, Phase.INITIAL_RESPONSE),
        (Phase.INITIAL_RESPONSE, Phase.INCIDENT_ANALYSIS),
        (Phase.INCIDENT_ANALYSIS, Phase.RESOLVED_CHECK),
        (Phase.RESOLVED_CHECK, Phase.DEBRIEF),
        (Phase.RESOLVED_CHECK, Phase.TIME_CHECK),
        (Phase.TIME_CHECK, Phase.INITIAL_RESPONSE),
        (Phase.TIME_CHECK, Phase.DEBRIEF),
        (Phase.DEBRIEF, Phase.UPDATE_POLICIES),
        (Phase.UPDATE_POLICIES, Phase.END),
    }
)

_LINEAR_NEXT: dict[Phase, Phase] = {
    Phase.START: Phase.SCENARIO_PRESENTATION,
    Phase.SCENARIO_PRESENTATION: Phase.ROLE_ASSIGNMENT,
    Phase.ROLE_ASSIGNMENT: Phase.INITIAL_RESPONSE,
    Phase.INITIAL_RESPONSE: Phase.INCIDENT_ANALYSIS,
    Phase.INCIDENT_ANALYSIS: Phase.RESOLVED_CHECK,
    Phase.DEBRIEF: Phase.UPDATE_POLICIES,
    Phase.UPDATE_POLICIES: Phase.END,
}


def legal_signals(phase: Phase) -> frozenset[Signal]:
    """Exactly the signals `advance` accepts in the given phase."""
    if phase in _LINEAR_NEXT:
        return frozenset({Signal.PROCEED})
    if phase is Phase.RESOLVED_CHECK:
        return frozenset({Signal.RESOLVED_YES, Signal.RESOLVED_NO})
    if phase is Phase.TIME_CHECK:
        return frozenset({Signal.CLOCK})
    return frozenset()  # End is absorbing


class RoleKind(str, Enum):
    FACILITATOR = "Facilitator"
    INCIDENT_COMMANDER = "IncidentCommander"
    SECURITY_TEAM_MEMBER = "SecurityTeamMember"
    COMMUNICATIONS_OFFICER = "CommunicationsOfficer"
    MARKETING_PR = "MarketingPR"
    LEGAL_ADVISOR = "LegalAdvisor"
    HUMAN_RESOURCES = "HumanResources"
    SENIOR_LEADERSHIP = "SeniorLeadership"
    LEADERSHIP = "Leadership"
    HELPDESK = "Helpdesk"
    EXTERNAL_TEAM = "ExternalTeam"
    CUSTOM = "Custom"


@dataclass(frozen=True)
class Role:
    """A standard exercise role, or an organization-specific one
    (kind CUSTOM plus a free-text label)."""

    kind: RoleKind
    label: str = ""

    def __post_init__(self):
        if self.kind is RoleKind.CUSTOM and not self.label.strip():
            raise ValidationError("custom roles require a non-empty label")

    @property
    def display(self) -> str:
        return self.label if self.kind is RoleKind.CUSTOM else self.kind.value

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "label": self.label}

    @classmethod
    def from_dict(cls, data: dict) -> "Role":
        return cls(kind=RoleKind(data["kind"]), label=data.get("label", ""))


FACILITATOR = Role(RoleKind.FACILITATOR)


@dataclass
class Participant:
    participant_id: str
    display_name: str
    role: Role | None = None

    def to_dict(self) -> dict:
        return {
            "participant_id": self.participant_id,
            "display_name": self.display_name,
            "role": self.role.to_dict() if self.role else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Participant":
        role = data.get("role")
        return cls(
            participant_id=data["participant_id"],
            display_name=data["display_name"],
            role=Role.from_dict(role) if role else None,
        )


@dataclass
class Scenario:
    """Attack narrative plus the context the facilitator needs."""

    narrative: str
    scope: str = "full"  # "full" | "micro"
    domains: list[str] = field(default_factory=list)
    inject_seeds: list[str] = field(default_factory=list)
    prior_findings: str = ""

    def __post_init__(self):
        if self.scope not in ("full", "micro"):
            raise ValidationError(f"scenario scope must be 'full' or 'micro', got {self.scope!r}")
        if not self.narrative.strip():
            raise ValidationError("scenario narrative must be non-empty")

    def to_dict(self) -> dict:
        return {
            "narrative": self.narrative,
            "scope": self.scope,
            "domains": list(self.domains),
            "inject_seeds": list(self.inject_seeds),
            "prior_findings": self.prior_findings,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        return cls(
            narrative=data["narrative"],
            scope=data.get("scope", "full"),
            domains=list(data.get("domains", [])),
            inject_seeds=list(data.get("inject_seeds", [])),
            prior_findings=data.get("prior_findings", ""),
        )


class EventKind(str, Enum):
    SESSION_CREATED = "session_created"
    INJECT = "inject"
    HUMAN_RESPONSE = "human_response"
    ROLE_ASSIGNMENT = "role_assignment"
    PHASE_TRANSITION = "phase_transition"
    RESOLUTION_DECLARED = "resolution_declared"
    RETROSPECTIVE = "retrospective"
    ACTION_ITEM = "action_item"


@dataclass
class SessionEvent:
    sequence_number: int
    timestamp: datetime
    phase: Phase
    actor: str  # role display name, participant id, or "system"
    kind: EventKind
    body: dict

    def to_dict(self) -> dict:
        return {
            "sequence_number": self.sequence_number,
            "timestamp": self.timestamp.isoformat(),
            "phase": self.phase.value,
            "actor": self.actor,
            "kind": self.kind.value,
            "body": self.body,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SessionEvent":
        return cls(
            sequence_number=data["sequence_number"],
            timestamp=datetime.fromisoformat(data["timestamp"]),
            phase=Phase(data["phase"]),
            actor=data["actor"],
            kind=EventKind(data["kind"]),
            body=data["body"],
        )


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


@dataclass(eq=False)
class ExerciseSession:
    session_id: str
    scenario: Scenario
    phase: Phase
    participants: list[Participant]
    started_at: datetime
    time_budget: timedelta
    resolved: bool = False
    transcript_ref: str = ""
    events: list[SessionEvent] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def cutoff(self) -> datetime:
        return self.started_at + self.time_budget

    def participant(self, participant_id: str) -> Participant:
        for p in self.participants:
            if p.participant_id == participant_id:
                return p
        raise NotFoundError(f"unknown participant {participant_id!r}")

    def last_event(self, kind: EventKind | None = None) -> SessionEvent | None:
        for event in reversed(self.events):
            if kind is None or event.kind is kind:
                return event
        return None

    def append_event(self, kind: EventKind, actor: str, body: dict, now: datetime | None = None) -> SessionEvent:
        """Append one transcript event at the current tail. Sequence numbers
        are gapless and strictly increasing; the lock serializes appends."""
        with self._lock:
            event = SessionEvent(
                sequence_number=len(self.events) + 1,
                timestamp=now or _utcnow(),
                phase=self.phase,
                actor=actor,
                kind=kind,
                body=body,
            )
            self.events.append(event)
            return event

    def state_view(self) -> dict:
        """Observable session state; used for event-sourced equality checks."""
        return {
            "session_id": self.session_id,
            "scenario": self.scenario.to_dict(),
            "phase": self.phase.value,
            "participants": [p.to_dict() for p in self.participants],
            "started_at": self.started_at.isoformat(),
            "time_budget_seconds": self.time_budget.total_seconds(),
            "resolved": self.resolved,
            "transcript_ref": self.transcript_ref,
            "events": [e.to_dict() for e in self.events],
        }

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExerciseSession):
            return NotImplemented
        return self.state_view() == other.state_view()


def create_session(
    scenario: Scenario,
    participants: list[Participant],
    time_budget: timedelta,
    session_id: str | None = None,
    started_at: datetime | None = None,
) -> ExerciseSession:
    """Open a new session in phase Start with only the creation event.

    Rejects an empty participant list and a nonpositive time budget.
    A single participant is valid (micro-tabletop).
    """
    if not participants:
        raise ValidationError("a session needs at least one participant")
    if time_budget <= timedelta(0):
        raise ValidationError("time_budget must be positive")
    seen: set[str] = set()
    for p in participants:
        if p.participant_id in seen:
            raise ValidationError(f"duplicate participant id {p.participant_id!r}")
        seen.add(p.participant_id)
        if p.role is not None:
            raise ValidationError(
                f"participant {p.participant_id!r} carries a role; "
                "roles are assigned during RoleAssignment"
            )

    session = ExerciseSession(
        session_id=session_id or uuid.uuid4().hex,
        scenario=scenario,
        phase=Phase.START,
        participants=list(participants),
        started_at=started_at or _utcnow(),
        time_budget=time_budget,
    )
    session.transcript_ref = session.session_id
    session.append_event(
        EventKind.SESSION_CREATED,
        "system",
        {
            "scope": scenario.scope,
            "participant_count": len(participants),
            "time_budget_seconds": time_budget.total_seconds(),
        },
        now=session.started_at,
    )
    return session


def assign_role(
    session: ExerciseSession,
    participant_id: str,
    role: Role,
    now: datetime | None = None,
) -> ExerciseSession:
    """Give one participant a role during RoleAssignment.

    Exactly one Facilitator per session; a participant holds at most one
    role, so reassignment replaces the previous one.
    """
    if session.phase is not Phase.ROLE_ASSIGNMENT:
        raise PhaseError(
            f"roles can only be assigned in {Phase.ROLE_ASSIGNMENT.value}, "
            f"session is in {session.phase.value}"
        )
    participant = session.participant(participant_id)
    if role.kind is RoleKind.FACILITATOR:
        for other in session.participants:
            if (
                other.participant_id != participant_id
                and other.role is not None
                and other.role.kind is RoleKind.FACILITATOR
            ):
                raise ConflictError(
                    f"facilitator already claimed by {other.participant_id!r}"
                )
    participant.role = role
    session.append_event(
        EventKind.ROLE_ASSIGNMENT,
        "system",
        {"participant_id": participant_id, "role": role.to_dict()},
        now=now,
    )
    return session


def check_time_remaining(session: ExerciseSession, now: datetime) -> bool:
    """True while the exercise clock has not hit the cutoff (exclusive)."""
    return now < session.cutoff


def declare_resolved(session: ExerciseSession, source: str, now: datetime | None = None) -> None:
    """Flip the resolved flag (once) and record who declared it.

    Legal only during IncidentAnalysis or ResolvedCheck; appends a
    resolution_declared event even when the flag was already set.
    """
    if session.phase not in (Phase.INCIDENT_ANALYSIS, Phase.RESOLVED_CHECK):
        raise PhaseError(
            f"resolution can only be declared during {Phase.INCIDENT_ANALYSIS.value} "
            f"or {Phase.RESOLVED_CHECK.value}, session is in {session.phase.value}"
        )
    if not session.resolved:
        session.resolved = True
    session.append_event(EventKind.RESOLUTION_DECLARED, "system", {"source": source}, now=now)


def advance(
    session: ExerciseSession,
    signal: Signal,
    now: datetime | None = None,
) -> tuple[ExerciseSession, Phase]:
    """Move the session along exactly one workflow edge.

    The ResolvedCheck verdict comes from the signal; the TimeCheck verdict
    comes from the clock (``now``). Each transition appends a
    phase_transition event recording the edge and any verdict.
    """
    if session.phase is Phase.END:
        raise PhaseError("session already ended; End is terminal")
    legal = legal_signals(session.phase)
    if signal not in legal:
        raise IllegalSignalError(
            f"signal {signal.value!r} is not legal in phase {session.phase.value}; "
            f"legal: {sorted(s.value for s in legal)}",
            legal=legal,
        )
    now = now or _utcnow()

    body: dict = {}
    if session.phase in _LINEAR_NEXT:
        target = _LINEAR_NEXT[session.phase]
    elif session.phase is Phase.RESOLVED_CHECK:
        if signal is Signal.RESOLVED_YES:
            if not session.resolved:
                declare_resolved(session, "resolution_verdict", now=now)
            target = Phase.DEBRIEF
            body["verdict"] = "yes"
        else:
            target = Phase.TIME_CHECK
            body["verdict"] = "no"
    else:  # TimeCheck
        remaining = check_time_remaining(session, now)
        target = Phase.INITIAL_RESPONSE if remaining else Phase.DEBRIEF
        body["time_remaining"] = remaining

    body["from"] = session.phase.value
    body["to"] = target.value
    # The transition event is attributed to the phase being entered, so
    # every phase on the path (End included) owns at least one event.
    session.phase = target
    session.append_event(EventKind.PHASE_TRANSITION, "system", body, now=now)
    return session, target


def replay_session(
    session_id: str,
    scenario: Scenario,
    participants: list[Participant],
    started_at: datetime,
    time_budget: timedelta,
    events: list[SessionEvent],
    transcript_ref: str = "",
) -> ExerciseSession:
    """Rebuild session state purely from its header fields and event log.

    Dynamic state (phase, role assignments, resolved flag) is derived by
    replaying events, which is what makes the store event-sourced.
    """
    session = ExerciseSession(
        session_id=session_id,
        scenario=scenario,
        phase=Phase.START,
        participants=[
            Participant(p.participant_id, p.display_name, role=None) for p in participants
        ],
        started_at=started_at,
        time_budget=time_budget,
        transcript_ref=transcript_ref or session_id,
    )
    for event in events:
        session.events.append(event)
        if event.kind is EventKind.PHASE_TRANSITION:
            session.phase = Phase(event.body["to"])
        elif event.kind is EventKind.ROLE_ASSIGNMENT:
            participant = session.participant(event.body["participant_id"])
            participant.role = Role.from_dict(event.body["role"])
        elif event.kind is EventKind.RESOLUTION_DECLARED:
            session.resolved = True
    return session
