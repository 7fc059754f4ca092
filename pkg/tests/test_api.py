from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from ttxkit.facilitator.backends import BackendConfig, MockScript
from ttxkit.service.app import create_app
from ttxkit.service.config import ApiConfig
from ttxkit.store import ResponsibilityDomain, Store

from conftest import AZURE_FACTORS, CRM_FACTORS, FIVE_TURN_SCRIPT


def profile_body(team_id: str, factors, scale_max: float = 10.0) -> dict:
    s, k, r, c, a, e = factors
    return {
        "team_id": team_id,
        "S": s,
        "K": k,
        "R": r,
        "C": c,
        "A": a,
        "E": e,
        "scale_max": scale_max,
    }


SCENARIO = {
    "narrative": "Ransom note appears on accounting machines; shares encrypted.",
    "scope": "full",
}


@pytest.fixture
def service(tmp_path):
    script = tmp_path / "script.jsonl"
    MockScript.dump(FIVE_TURN_SCRIPT, script)
    config = ApiConfig(
        storage_root=str(tmp_path / "data"),
        backend=BackendConfig(mode="mock", script_path=str(script)),
    )
    app = create_app(config, api_token="")
    return TestClient(app), config


def create(client, participants=None, minutes=60.0) -> str:
    body = {
        "scenario": SCENARIO,
        "participants": participants
        or [
            {"participant_id": "alice", "display_name": "Alice"},
            {"participant_id": "bob", "display_name": "Bob"},
        ],
        "time_budget_minutes": minutes,
    }
    response = client.post("/sessions", json=body)
    assert response.status_code == 200, response.text
    assert response.json()["phase"] == "Start"
    return response.json()["session_id"]


def advance_to(client, sid: str, steps: int):
    for _ in range(steps):
        response = client.post(f"/sessions/{sid}/advance", json={"signal": "proceed"})
        assert response.status_code == 200, response.text
    return response.json()["phase"]


# -- lifecycle -----------------------------------------------------------------


def test_create_and_view_session(service):
    client, _ = service
    sid = create(client)
    view = client.get(f"/sessions/{sid}").json()
    assert view["phase"] == "Start"
    assert view["legal_signals"] == ["proceed"]
    assert view["pause_requested"] is False
    assert view["resolved"] is False
    assert view["time_remaining"] is True


def test_get_unknown_session_is_404_not_found(service):
    client, _ = service
    response = client.get("/sessions/missing")
    assert response.status_code == 404
    assert response.json()["code"] == "not_found"


def test_create_rejects_empty_participants(service):
    client, _ = service
    response = client.post(
        "/sessions", json={"scenario": SCENARIO, "participants": []}
    )
    assert response.status_code == 400
    assert response.json()["code"] == "validation_error"


def test_assign_role_and_conflict(service):
    client, _ = service
    sid = create(client)
    advance_to(client, sid, 2)  # -> RoleAssignment
    ok = client.post(
        f"/sessions/{sid}/roles",
        json={"participant_id": "alice", "role": "Facilitator"},
    )
    assert ok.status_code == 200
    dup = client.post(
        f"/sessions/{sid}/roles",
        json={"participant_id": "bob", "role": "Facilitator"},
    )
    assert dup.status_code == 409
    assert dup.json()["code"] == "conflict"


def test_role_assignment_wrong_phase_is_phase_error(service):
    client, _ = service
    sid = create(client)
    response = client.post(
        f"/sessions/{sid}/roles",
        json={"participant_id": "alice", "role": "Helpdesk"},
    )
    assert response.status_code == 409
    assert response.json()["code"] == "phase_error"


def test_verdict_yes_at_resolved_check_reaches_debrief(service):
    client, _ = service
    sid = create(client)
    advance_to(client, sid, 5)  # -> ResolvedCheck
    view = client.get(f"/sessions/{sid}").json()
    assert view["phase"] == "ResolvedCheck"
    assert sorted(view["legal_signals"]) == ["resolved_no", "resolved_yes"]
    response = client.post(f"/sessions/{sid}/advance", json={"verdict": "yes"})
    assert response.json()["phase"] == "Debrief"
    assert client.get(f"/sessions/{sid}").json()["resolved"] is True


def test_illegal_signal_maps_to_phase_error(service):
    client, _ = service
    sid = create(client)
    response = client.post(f"/sessions/{sid}/advance", json={"verdict": "yes"})
    assert response.status_code == 409
    assert response.json()["code"] == "phase_error"


def test_declare_resolution_mid_incident_analysis(service):
    client, _ = service
    sid = create(client)
    advance_to(client, sid, 4)  # -> IncidentAnalysis
    response = client.post(f"/sessions/{sid}/resolution")
    assert response.status_code == 200
    assert response.json()["resolved"] is True
    transcript = client.get(f"/sessions/{sid}/transcript").json()
    kinds = [e["kind"] for e in transcript["events"]]
    assert "resolution_declared" in kinds


# -- turns --------------------------------------------------------------------


def test_turn_returns_scripted_message_and_appends_events(service):
    client, _ = service
    sid = create(client)
    advance_to(client, sid, 1)  # -> ScenarioPresentation
    response = client.post(f"/sessions/{sid}/turn", json={})
    assert response.status_code == 200
    assert response.json()["narrative"] == FIVE_TURN_SCRIPT[0].narrative
    transcript = client.get(f"/sessions/{sid}/transcript").json()
    assert transcript["events"][-1]["kind"] == "inject"


def test_turn_cursor_survives_statelessness(service):
    # The mock cursor is derived from the stored transcript, so consecutive
    # requests (each reloading from disk) walk the script in order.
    client, _ = service
    sid = create(client)
    advance_to(client, sid, 1)
    first = client.post(f"/sessions/{sid}/turn", json={}).json()
    second = client.post(
        f"/sessions/{sid}/turn",
        json={"human_input": "We page the on-call."},
    ).json()
    assert first["narrative"] == FIVE_TURN_SCRIPT[0].narrative
    assert second["narrative"] == FIVE_TURN_SCRIPT[1].narrative
    assert second["pause_requested"] is True


def test_turn_while_paused_requires_input(service):
    client, _ = service
    sid = create(client)
    advance_to(client, sid, 1)
    client.post(f"/sessions/{sid}/turn", json={})
    client.post(f"/sessions/{sid}/turn", json={})  # consumes the pausing message
    response = client.post(f"/sessions/{sid}/turn", json={})
    assert response.status_code == 400
    assert response.json()["code"] == "validation_error"
    view = client.get(f"/sessions/{sid}").json()
    assert view["pause_requested"] is True


def test_restart_loses_no_acknowledged_events(service, tmp_path):
    client, config = service
    sid = create(client)
    advance_to(client, sid, 1)
    client.post(f"/sessions/{sid}/turn", json={})
    before = client.get(f"/sessions/{sid}/transcript").json()
    # Simulate a service restart: brand-new app over the same storage root.
    restarted = TestClient(create_app(config, api_token=""))
    after = restarted.get(f"/sessions/{sid}/transcript").json()
    assert after == before


# -- retrospective and action items -----------------------------------------------


def seed_domain(config: ApiConfig):
    store = Store(config.storage_root)
    store.domains.save_domain(
        ResponsibilityDomain(domain_id="ad", name="Active Directory", team_id="identity")
    )


def run_scripted_session(client) -> str:
    sid = create(client)
    advance_to(client, sid, 1)
    client.post(f"/sessions/{sid}/turn", json={})  # msg1
    advance_to(client, sid, 3)  # RoleAssignment -> InitialResponse -> IncidentAnalysis
    client.post(f"/sessions/{sid}/turn", json={})  # msg2 pauses
    client.post(f"/sessions/{sid}/turn", json={"human_input": "Revoke sessions."})  # msg3
    client.post(f"/sessions/{sid}/turn", json={})  # msg4 resolution at IncidentAnalysis
    client.post(f"/sessions/{sid}/advance", json={"signal": "proceed"})  # -> ResolvedCheck
    client.post(f"/sessions/{sid}/advance", json={"verdict": "yes"})  # -> Debrief
    return sid


def test_retrospective_parses_and_stores_items(service):
    client, config = service
    sid = run_scripted_session(client)
    response = client.post(f"/sessions/{sid}/retrospective")
    assert response.status_code == 200, response.text
    body = response.json()
    assert len(body["items"]) == 1
    assert body["items"][0]["finding"].startswith("Session revocation lagged")
    assert len(body["item_ids"]) == 1
    listed = client.get("/action-items").json()["items"]
    assert {i["item_id"] for i in listed} == set(body["item_ids"])


def test_action_items_filter_by_domain(service):
    client, config = service
    seed_domain(config)
    # Session scoped to the registered domain name.
    body = {
        "scenario": {**SCENARIO, "scope": "micro", "domains": ["Active Directory"]},
        "participants": [{"participant_id": "alice", "display_name": "Alice"}],
    }
    sid = client.post("/sessions", json=body).json()["session_id"]
    advance_to(client, sid, 1)
    client.post(f"/sessions/{sid}/turn", json={})
    advance_to(client, sid, 3)
    client.post(f"/sessions/{sid}/turn", json={})
    client.post(f"/sessions/{sid}/turn", json={"human_input": "Block the ASN."})
    client.post(f"/sessions/{sid}/turn", json={})
    response = client.post(f"/sessions/{sid}/retrospective")
    assert response.status_code == 200
    matching = client.get("/action-items", params={"domain": "Active Directory"}).json()
    assert len(matching["items"]) == 1
    other = client.get("/action-items", params={"domain": "Okta"}).json()
    assert other["items"] == []


# -- scoring -------------------------------------------------------------------


def test_upbs_endpoint_reproduces_worked_profiles(service):
    client, _ = service
    response = client.post(
        "/scores/upbs",
        json={
            "profiles": [
                profile_body("azure", AZURE_FACTORS),
                profile_body("crm", CRM_FACTORS),
            ],
            "alphas": [1.0],
        },
    )
    assert response.status_code == 200
    body = response.json()
    result = body["results"][0]
    assert result["p_avg"] == pytest.approx(0.65)
    assert result["score"] == pytest.approx(0.65)
    assert f"{result['score']:.3f}" == "0.650"
    teams = {t["team_id"]: t["preparedness"] for t in body["teams"]}
    assert teams["azure"] == pytest.approx(50 / 60)
    assert teams["crm"] == pytest.approx(28 / 60)
    assert body["deltas"][0]["delta"] == pytest.approx(22 / 60)


def test_upbs_endpoint_validates_alpha(service):
    client, _ = service
    response = client.post(
        "/scores/upbs",
        json={"profiles": [profile_body("a", AZURE_FACTORS)], "alphas": [1.5]},
    )
    assert response.status_code == 400
    assert response.json()["code"] == "validation_error"


def test_upbs_endpoint_uses_default_alpha_when_omitted(service):
    client, config = service
    response = client.post(
        "/scores/upbs", json={"profiles": [profile_body("a", AZURE_FACTORS)]}
    )
    assert response.json()["results"][0]["alpha"] == config.default_alpha


# -- auth ------------------------------------------------------------------------


def test_bearer_token_enforced_when_configured(tmp_path):
    config = ApiConfig(storage_root=str(tmp_path / "data"))
    client = TestClient(create_app(config, api_token="hunter2"))
    denied = client.get("/sessions/any")
    assert denied.status_code == 401
    allowed = client.get(
        "/sessions/any", headers={"Authorization": "Bearer hunter2"}
    )
    assert allowed.status_code == 404  # authenticated, session simply missing
