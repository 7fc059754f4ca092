"""HTTP surface over the exercise engine, scoring, and the store.

The service is stateless above persistence: every mutating route loads
the session from the store, applies exactly one engine operation, and
appends the new events before answering. Engine errors map onto
structured bodies carrying a machine-readable code.
"""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

from fastapi import Depends, FastAPI, Header, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from ..errors import TtxError, ValidationError
from ..exercise import (
    EventKind,
    ExerciseSession,
    Participant,
    Role,
    RoleKind,
    Scenario,
    Signal,
    advance,
    assign_role,
    check_time_remaining,
    create_session,
    declare_resolved,
    legal_signals,
)
from ..facilitator.backends import LiveBackend, MockScript
from ..facilitator.turns import awaiting_human, human_role_names, next_turn, run_retrospective
from ..scoring import TeamProfile, preparedness, preparedness_delta, upbs
from ..store import Store
from .config import API_TOKEN_ENV, ApiConfig, ensure_writable

STATUS_BY_CODE = {
    "validation_error": 400,
    "render_error": 400,
    "phase_error": 409,
    "conflict": 409,
    "not_found": 404,
    "budget_error": 413,
    "integrity_error": 500,
    "backend_error": 502,
    "script_exhausted": 502,
    "backend_timeout": 504,
    "error": 500,
}


class ScenarioBody(BaseModel):
    narrative: str
    scope: str = "full"
    domains: list[str] = Field(default_factory=list)
    inject_seeds: list[str] = Field(default_factory=list)
    prior_findings: str = ""

    def to_scenario(self) -> Scenario:
        return Scenario(
            narrative=self.narrative,
            scope=self.scope,
            domains=self.domains,
            inject_seeds=self.inject_seeds,
            prior_findings=self.prior_findings,
        )


class ParticipantBody(BaseModel):
    participant_id: str
    display_name: str = ""


class CreateSessionBody(BaseModel):
    scenario: ScenarioBody
    participants: list[ParticipantBody]
    time_budget_minutes: float | None = None


class RoleBody(BaseModel):
    participant_id: str
    role: str
    label: str = ""


class AdvanceBody(BaseModel):
    signal: str | None = None
    verdict: str | None = None


class TurnBody(BaseModel):
    human_input: str | None = None
    participant_id: str | None = None


class ProfileBody(BaseModel):
    team_id: str
    S: float
    K: float
    R: float
    C: float
    A: float
    E: float
    scale_max: float = 10.0

    def to_profile(self) -> TeamProfile:
        return TeamProfile(
            team_id=self.team_id,
            skills=self.S,
            knowledge=self.K,
            resources=self.R,
            cohesion=self.C,
            adaptability=self.A,
            experience=self.E,
            scale_max=self.scale_max,
        )


class UpbsBody(BaseModel):
    profiles: list[ProfileBody]
    alphas: list[float] | None = None
    alpha: float | None = None


def parse_role(name: str, label: str = "") -> Role:
    try:
        return Role(RoleKind(name), label)
    except ValueError:
        return Role(RoleKind.CUSTOM, label or name)


def parse_signal(body: AdvanceBody) -> Signal:
    if body.verdict is not None:
        if body.verdict not in ("yes", "no"):
            raise ValidationError(f"verdict must be 'yes' or 'no', got {body.verdict!r}")
        return Signal.RESOLVED_YES if body.verdict == "yes" else Signal.RESOLVED_NO
    if body.signal is None:
        raise ValidationError("advance needs a signal or a verdict")
    try:
        return Signal(body.signal)
    except ValueError:
        raise ValidationError(
            f"unknown signal {body.signal!r}; one of "
            f"{sorted(s.value for s in Signal)}"
        ) from None


def consumed_script_messages(session: ExerciseSession) -> int:
    """How many backend messages this transcript already holds; positions
    the mock script cursor so the service stays stateless."""
    return sum(
        1
        for e in session.events
        if e.kind in (EventKind.INJECT, EventKind.RETROSPECTIVE)
    )


def session_view(session: ExerciseSession, now: datetime | None = None) -> dict:
    now = now or datetime.now(timezone.utc)
    latest = session.last_event(EventKind.INJECT)
    remaining = (session.cutoff - now).total_seconds()
    return {
        "session_id": session.session_id,
        "phase": session.phase.value,
        "participants": [p.to_dict() for p in session.participants],
        "resolved": session.resolved,
        "started_at": session.started_at.isoformat(),
        "time_budget_seconds": session.time_budget.total_seconds(),
        "time_remaining_seconds": max(remaining, 0.0),
        "time_remaining": check_time_remaining(session, now),
        "legal_signals": sorted(s.value for s in legal_signals(session.phase)),
        "latest_message": latest.body if latest else None,
        "pause_requested": awaiting_human(session),
        "event_count": len(session.events),
    }


def create_app(config: ApiConfig, api_token: str | None = None) -> FastAPI:
    import os

    root = ensure_writable(config.storage_root)
    store = Store(root)
    token = api_token if api_token is not None else os.environ.get(API_TOKEN_ENV, "")

    app = FastAPI(title="ttxkit", version="0.1.0")
    app.state.store = store
    app.state.config = config

    async def require_token(authorization: str = Header(default="")):
        if not token:
            return
        if authorization != f"Bearer {token}":
            raise ValidationError("missing or invalid bearer token")

    @app.exception_handler(TtxError)
    async def ttx_error_handler(_request: Request, exc: TtxError):
        status = STATUS_BY_CODE.get(exc.code, 500)
        if isinstance(exc, ValidationError) and "bearer token" in exc.message:
            status = 401
        return JSONResponse(
            status_code=status, content={"code": exc.code, "message": exc.message}
        )

    def load(session_id: str) -> ExerciseSession:
        return store.sessions.load_session(session_id)

    def backend_for(session: ExerciseSession):
        backend_config = config.backend
        if backend_config.mode == "mock":
            if not backend_config.script_path:
                raise ValidationError("service backend is mock but no script is configured")
            script = MockScript.load(backend_config.script_path)
            return script.player(start=consumed_script_messages(session))
        return LiveBackend(backend_config, human_role_names=human_role_names(session))

    @app.post("/sessions", dependencies=[Depends(require_token)])
    def post_session(body: CreateSessionBody):
        minutes = (
            body.time_budget_minutes
            if body.time_budget_minutes is not None
            else config.default_time_budget_minutes
        )
        session = create_session(
            body.scenario.to_scenario(),
            [Participant(p.participant_id, p.display_name or p.participant_id) for p in body.participants],
            timedelta(minutes=minutes),
        )
        store.sessions.save_session(session)
        return {"session_id": session.session_id, "phase": session.phase.value}

    @app.get("/sessions/{session_id}", dependencies=[Depends(require_token)])
    def get_session(session_id: str):
        return session_view(load(session_id))

    @app.get("/sessions/{session_id}/transcript", dependencies=[Depends(require_token)])
    def get_transcript(session_id: str):
        session = load(session_id)
        return {
            "session_id": session.session_id,
            "events": [e.to_dict() for e in session.events],
        }

    @app.post("/sessions/{session_id}/roles", dependencies=[Depends(require_token)])
    def post_role(session_id: str, body: RoleBody):
        session = load(session_id)
        assign_role(session, body.participant_id, parse_role(body.role, body.label))
        store.sessions.save_session(session)
        return session_view(session)

    @app.post("/sessions/{session_id}/advance", dependencies=[Depends(require_token)])
    def post_advance(session_id: str, body: AdvanceBody):
        session = load(session_id)
        _, phase = advance(session, parse_signal(body))
        store.sessions.save_session(session)
        return {"session_id": session.session_id, "phase": phase.value}

    @app.post("/sessions/{session_id}/resolution", dependencies=[Depends(require_token)])
    def post_resolution(session_id: str):
        session = load(session_id)
        declare_resolved(session, "facilitator_command")
        store.sessions.save_session(session)
        return session_view(session)

    @app.post("/sessions/{session_id}/turn", dependencies=[Depends(require_token)])
    def post_turn(session_id: str, body: TurnBody):
        session = load(session_id)
        backend = backend_for(session)
        message = next_turn(
            session,
            body.human_input,
            backend,
            config=config.backend,
            participant_id=body.participant_id,
        )
        store.sessions.save_session(session)
        return message.to_dict()

    @app.post("/sessions/{session_id}/retrospective", dependencies=[Depends(require_token)])
    def post_retrospective(session_id: str):
        session = load(session_id)
        backend = backend_for(session)
        text, parsed = run_retrospective(session, backend, config=config.backend)
        store.sessions.save_session(session)
        domain = None
        if session.scenario.domains:
            candidate = session.scenario.domains[0]
            if store.domains.has_domain(candidate) or store.domains.find_by_name(candidate):
                domain = candidate
        for item in parsed.items:
            item.responsibility_domain = domain
        ids = store.registry.store_action_items(parsed.items, source_session=session.session_id)
        return {
            "retrospective": text,
            "items": [item.to_dict() for item in parsed.items],
            "item_ids": ids,
            "warnings": parsed.warnings,
        }

    @app.post("/scores/upbs", dependencies=[Depends(require_token)])
    def post_upbs(body: UpbsBody):
        profiles = [p.to_profile() for p in body.profiles]
        alphas = body.alphas
        if alphas is None:
            alphas = [body.alpha if body.alpha is not None else config.default_alpha]
        results = []
        for alpha in alphas:
            result = upbs(profiles, alpha)
            results.append(
                {
                    "alpha": result.alpha,
                    "beta": result.beta,
                    "p_avg": result.p_avg,
                    "mean_abs_delta": result.mean_abs_delta,
                    "score": result.score,
                    "team_ids": list(result.team_ids),
                }
            )
        # Per-team scores and the pairwise delta matrix ride along so UI
        # clients never have to recompute scoring arithmetic.
        scores = [preparedness(p) for p in profiles]
        teams = [{"team_id": s.team_id, "preparedness": s.value} for s in scores]
        deltas = [
            {
                "team_a": a.team_id,
                "team_b": b.team_id,
                "delta": preparedness_delta(a, b).delta,
            }
            for i, a in enumerate(scores)
            for b in scores[i + 1:]
        ]
        return {"results": results, "teams": teams, "deltas": deltas}

    @app.get("/action-items", dependencies=[Depends(require_token)])
    def get_action_items(domain: str | None = Query(default=None)):
        items = store.registry.open_items(domain)
        return {"items": [item.to_dict() for item in items]}

    return app
