from __future__ import annotations

import json
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

from ttxkit.exercise import Participant, Scenario, create_session
from ttxkit.facilitator.backends import FacilitatorMessage, MockScript
from ttxkit.scoring import TeamProfile

FIXTURES = Path(__file__).parent / "fixtures"

# The two worked-example teams: a seasoned platform team and a team still
# ramping on a new system. P = 50/60 and 28/60.
AZURE_FACTORS = (9, 9, 7, 8, 8, 9)
CRM_FACTORS = (5, 3, 7, 6, 5, 2)


def make_profile(team_id: str, factors, scale_max: float = 10.0) -> TeamProfile:
    s, k, r, c, a, e = factors
    return TeamProfile(
        team_id=team_id,
        skills=s,
        knowledge=k,
        resources=r,
        cohesion=c,
        adaptability=a,
        experience=e,
        scale_max=scale_max,
    )


def uniform_profile(team_id: str, value: float, scale_max: float = 10.0) -> TeamProfile:
    return make_profile(team_id, (value,) * 6, scale_max)


@pytest.fixture
def paper_profiles() -> list[TeamProfile]:
    return [make_profile("azure", AZURE_FACTORS), make_profile("crm", CRM_FACTORS)]


def default_scenario(scope: str = "full") -> Scenario:
    return Scenario(
        narrative="Phishing and MFA-fatigue campaign against staff accounts.",
        scope=scope,
        domains=["Active Directory"] if scope == "micro" else [],
    )


def two_person_session(minutes: float = 60.0, **kwargs):
    return create_session(
        default_scenario(),
        [Participant("alice", "Alice"), Participant("bob", "Bob")],
        timedelta(minutes=minutes),
        **kwargs,
    )


FIVE_TURN_SCRIPT = [
    FacilitatorMessage(
        narrative=(
            "Scene: helpdesk reports a surge of MFA push notifications and two "
            "staff members admit approving one. Shared drives are reachable."
        )
    ),
    FacilitatorMessage(
        narrative=(
            "08:40. Sign-in logs show successful logins from an unfamiliar ASN "
            "for both accounts. IncidentCommander, what are your first actions?"
        ),
        pause_requested=True,
    ),
    FacilitatorMessage(
        narrative=(
            "Your containment holds: the sessions are revoked and conditional "
            "access now blocks the ASN. Mail rules created by the attacker were "
            "found and removed."
        )
    ),
    FacilitatorMessage(
        narrative=(
            "Final sweep is clean; no persistence found on the affected "
            "mailboxes.\nINCIDENT RESOLVED"
        ),
        resolution_declared=True,
    ),
    FacilitatorMessage(
        narrative=(
            "Critical: Session revocation lagged the first malicious login by "
            "over thirty minutes.\n"
            "Improvement: Auto-revoke sessions and require re-auth when a "
            "sign-in arrives from an unseen ASN.\n"
            "Measure: Revocation fires within five minutes in the next drill."
        )
    ),
]


@pytest.fixture
def five_turn_script_path(tmp_path) -> Path:
    path = tmp_path / "script.jsonl"
    MockScript.dump(FIVE_TURN_SCRIPT, path)
    return path


def write_profiles_csv(path: Path, profiles: list[tuple] | None = None) -> Path:
    rows = profiles or [
        ("azure", *AZURE_FACTORS, 10),
        ("crm", *CRM_FACTORS, 10),
    ]
    lines = ["team_id,S,K,R,C,A,E,scale_max"]
    for row in rows:
        lines.append(",".join(str(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def fixed_clock_start() -> datetime:
    return datetime(2025, 3, 4, 9, 0, 0, tzinfo=timezone.utc)
