"""Turn brokering between a session and its facilitator backend.

A turn sends the budgeted conversation to the backend, then appends the
human response (if any) and the facilitator's inject to the transcript
atomically: a backend failure leaves the session untouched and
resumable.
"""

from __future__ import annotations

from datetime import datetime

from ..errors import PhaseError, ValidationError
from ..exercise import (
    EventKind,
    ExerciseSession,
    Phase,
    Role,
    RoleKind,
    declare_resolved,
)
from .actions import ParseResult, parse_action_items
from .backends import BackendConfig, FacilitatorMessage
from .context import ContextMessage, fit_context
from .prompts import (
    build_micro_prompt,
    build_retrospective_prompt,
    build_scenario_prompt,
    build_turn_prompt,
)


def awaiting_human(session: ExerciseSession) -> bool:
    """True when the latest facilitator inject requested a pause and no
    human response has arrived since."""
    for event in reversed(session.events):
        if event.kind is EventKind.HUMAN_RESPONSE:
            return False
        if event.kind is EventKind.INJECT:
            return bool(event.body.get("pause_requested"))
    return False


def human_role_names(session: ExerciseSession) -> list[str]:
    names = []
    for p in session.participants:
        if p.role is not None and p.role.kind is not RoleKind.FACILITATOR:
            names.append(p.role.display)
        elif p.role is None:
            names.append(p.display_name)
    return names


def simulated_role_names(session: ExerciseSession) -> list[str]:
    """Standard roles nobody holds; the backend may voice any of them."""
    held = {p.role.kind for p in session.participants if p.role is not None}
    simulated = []
    for kind in RoleKind:
        if kind in (RoleKind.FACILITATOR, RoleKind.CUSTOM):
            continue
        if kind not in held:
            simulated.append(Role(kind).display)
    return simulated


def session_preamble(session: ExerciseSession) -> str:
    """The pinned opening prompt, derived deterministically from the session."""
    scenario = session.scenario
    if scenario.scope == "micro":
        domain = scenario.domains[0] if scenario.domains else "your responsibility domain"
        prompt = build_micro_prompt(domain, tooling_context=scenario.narrative)
        if scenario.prior_findings.strip():
            prompt += (
                "\n\nFindings from earlier exercises to weave in:\n"
                + scenario.prior_findings
            )
        return prompt
    humans = human_role_names(session) or [p.display_name for p in session.participants]
    return build_scenario_prompt(scenario, humans, simulated_role_names(session))


def build_turn_messages(
    session: ExerciseSession,
    human_input: str | None,
    config: BackendConfig,
) -> list[dict]:
    """Role-tagged chat messages for the backend, trimmed to the token
    budget. The preamble and every human response are pinned."""
    context: list[tuple[str, ContextMessage]] = [
        ("user", ContextMessage(session_preamble(session), pinned=True))
    ]
    for event in session.events:
        if event.kind is EventKind.INJECT:
            context.append(("assistant", ContextMessage(event.body.get("narrative", ""))))
        elif event.kind is EventKind.HUMAN_RESPONSE:
            context.append(("user", ContextMessage(event.body.get("text", ""), pinned=True)))
    if human_input is not None:
        context.append(("user", ContextMessage(build_turn_prompt(human_input), pinned=True)))

    kept = fit_context([m for _, m in context], config.token_limit)
    kept_ids = {id(m) for m in kept}
    return [
        {"role": role, "content": message.text}
        for role, message in context
        if id(message) in kept_ids
    ]


def next_turn(
    session: ExerciseSession,
    human_input: str | None,
    backend,
    config: BackendConfig | None = None,
    now: datetime | None = None,
    participant_id: str | None = None,
) -> FacilitatorMessage:
    """Run one facilitator turn.

    Requires human input when the previous inject paused for one. On
    success the transcript gains a human_response event (if input was
    given) followed by the inject; a declared resolution during
    IncidentAnalysis also flips the session's resolved flag.
    """
    if session.phase is Phase.END:
        raise PhaseError("session has ended; no further turns")
    if awaiting_human(session) and human_input is None:
        raise ValidationError("facilitator paused for a human response; human_input required")

    config = config or BackendConfig(mode="mock", script_path="unused")
    messages = build_turn_messages(session, human_input, config)
    reply = backend.next_message(messages)  # may raise; session untouched

    if human_input is not None:
        session.append_event(
            EventKind.HUMAN_RESPONSE,
            participant_id or "human",
            {"text": human_input},
            now=now,
        )
    session.append_event(EventKind.INJECT, "facilitator", reply.to_dict(), now=now)
    if reply.resolution_declared and session.phase is Phase.INCIDENT_ANALYSIS:
        declare_resolved(session, "facilitator_message", now=now)
    return reply


def run_retrospective(
    session: ExerciseSession,
    backend,
    config: BackendConfig | None = None,
    now: datetime | None = None,
) -> tuple[str, ParseResult]:
    """Dispatch the retrospective prompt and parse the reply into items.

    Appends one retrospective event plus one action_item event per parsed
    item; returns the raw reply text and the parse result.
    """
    config = config or BackendConfig(mode="mock", script_path="unused")
    prompt = build_retrospective_prompt(session.events, token_limit=config.token_limit)
    reply = backend.next_message([{"role": "user", "content": prompt}])
    session.append_event(
        EventKind.RETROSPECTIVE, "facilitator", {"text": reply.narrative}, now=now
    )
    parsed = parse_action_items(reply.narrative)
    for item in parsed.items:
        item.source_session = session.session_id
        session.append_event(
            EventKind.ACTION_ITEM,
            "system",
            {
                "finding": item.finding,
                "improvement": item.improvement,
                "measurable_criterion": item.measurable_criterion,
            },
            now=now,
        )
    return reply.narrative, parsed
