"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with -s to see them inline)."""

from __future__ import annotations

import io
import json
import random
import subprocess
import sys
import time
from datetime import timedelta

import httpx
import pytest

from ttxkit.errors import PhaseError
from ttxkit.exercise import (
    EDGES,
    EventKind,
    Participant,
    Phase,
    Signal,
    advance,
    create_session,
    legal_signals,
)
from ttxkit.facilitator.backends import BackendConfig, LiveBackend, MockScript
from ttxkit.facilitator.context import estimate_tokens
from ttxkit.scoring import preparedness, preparedness_delta, upbs
from ttxkit.service.cli import main as cli_main
from ttxkit.store import Store

from conftest import (
    AZURE_FACTORS,
    CRM_FACTORS,
    FIVE_TURN_SCRIPT,
    FIXTURES,
    default_scenario,
    make_profile,
    two_person_session,
    uniform_profile,
)


def report(name: str, passed: bool) -> None:
    print(f"[{'PASS' if passed else 'FAIL'}] {name}", flush=True)


def check(name: str, passed: bool) -> None:
    report(name, passed)
    assert passed, name


# -- criterion 1: worked-example reproduction ---------------------------------------


def test_worked_example_reproduction():
    started = time.perf_counter()
    azure = preparedness(make_profile("azure", AZURE_FACTORS))
    crm = preparedness(make_profile("crm", CRM_FACTORS))
    delta = preparedness_delta(azure, crm)
    elapsed = time.perf_counter() - started
    check(
        "worked-example reproduction (delta 0.367 to 3 decimals, < 1 s)",
        f"{delta.delta:.3f}" == "0.367" and elapsed < 1.0,
    )


# -- criterion 2: perfect-prep invariance ---------------------------------------------


def test_perfect_prep_invariance():
    alphas = [i / 10 for i in range(11)]
    ok = True
    for count in range(1, 9):
        teams = [uniform_profile(f"t{i}", 10) for i in range(count)]
        for alpha in alphas:
            if abs(upbs(teams, alpha).score - 1.0) > 1e-12:
                ok = False
    check("perfect-prep invariance (UPBS = 1.000 +/- 1e-12, 1-8 teams)", ok)


# -- criterion 3: uniform-low behavior -------------------------------------------------


def test_uniform_low_behavior():
    alphas = [i / 10 for i in range(11)]
    exact = True
    decreasing = True
    for value in (1, 3, 5, 8, 9):
        teams = [uniform_profile(f"t{i}", value) for i in range(3)]
        p = preparedness(teams[0]).value
        scores = [upbs(teams, alpha).score for alpha in alphas]
        for alpha, score in zip(alphas, scores):
            if score != alpha * p + (1 - alpha):
                exact = False
        if p < 1 and not all(b < a for a, b in zip(scores, scores[1:])):
            decreasing = False
    check("uniform-low behavior (UPBS(a) = a*p + (1-a) exactly, decreasing)", exact and decreasing)


# -- criterion 4: token rule ------------------------------------------------------------


def test_token_rule():
    seventy_five = " ".join(["word"] * 75)
    million_and_a_half = "w " * 1_500_000
    check(
        "token rule (75 words -> 100 tokens, 1.5M words -> 2M tokens)",
        estimate_tokens(seventy_five) == 100
        and estimate_tokens(million_and_a_half) == 2_000_000,
    )


# -- criterion 5: state-machine conformance ------------------------------------------------


def test_state_machine_conformance():
    # Exhaustive (phase, signal) enumeration against the edge set.
    observed = set()
    total_ok = True
    for phase in Phase:
        for signal in Signal:
            for offset in (timedelta(minutes=1), timedelta(hours=2)):
                session = two_person_session()
                session.phase = phase
                now = session.started_at + offset
                legal = signal in legal_signals(phase)
                try:
                    _, target = advance(session, signal, now=now)
                    observed.add((phase, target))
                    if not legal:
                        total_ok = False
                except PhaseError:
                    if legal:
                        total_ok = False
    edges_ok = observed == set(EDGES)

    # 1,000 randomized signal walks all terminate at End once time is
    # exhausted, visiting Debrief and UpdatePolicies on the way.
    rng = random.Random(20250304)
    walks_ok = True
    for _ in range(1000):
        session = two_person_session(minutes=rng.randint(1, 120))
        now = session.started_at
        steps = 0
        while session.phase is not Phase.END and steps < 100_000:
            signal = rng.choice(sorted(legal_signals(session.phase), key=lambda s: s.value))
            now += timedelta(minutes=rng.randint(1, 45))
            advance(session, signal, now=now)
            steps += 1
        if session.phase is not Phase.END:
            walks_ok = False
            break
        visited = {
            Phase(e.body["to"])
            for e in session.events
            if e.kind is EventKind.PHASE_TRANSITION
        }
        if Phase.DEBRIEF not in visited or Phase.UPDATE_POLICIES not in visited:
            walks_ok = False
            break
    check(
        "state-machine conformance (exhaustive pairs + 1000 terminating walks)",
        total_ok and edges_ok and walks_ok,
    )


# -- criterion 6: end-to-end scripted session ------------------------------------------------


def test_end_to_end_scripted_session(tmp_path, monkeypatch, capsys):
    script = tmp_path / "script.jsonl"
    MockScript.dump(FIVE_TURN_SCRIPT, script)

    def run_once(tag: str) -> tuple[bytes, str, Store]:
        data_dir = tmp_path / f"data-{tag}"
        argv = [
            "run",
            "--scope",
            "micro",
            "--domain",
            "Active Directory",
            "--participant",
            "alice",
            "--minutes",
            "45",
            "--script",
            str(script),
            "--data-dir",
            str(data_dir),
            "--session-id",
            "acceptance-e2e",
            "--clock-start",
            "2025-03-04T09:00:00+00:00",
            "--clock-step",
            "30",
        ]
        monkeypatch.setattr("sys.stdin", io.StringIO("We revoke both sessions and block the ASN.\n"))
        code = cli_main(argv)
        stdout = capsys.readouterr().out
        assert code == 0
        log = data_dir / "sessions" / "acceptance-e2e" / "events.log"
        return log.read_bytes(), stdout, Store(data_dir)

    transcripts, outputs, stores = zip(*(run_once(tag) for tag in "abc"))
    identical = transcripts[0] == transcripts[1] == transcripts[2]
    identical_stdout = outputs[0] == outputs[1] == outputs[2]
    items = stores[0].registry.open_items()
    session = stores[0].sessions.load_session("acceptance-e2e")
    pause_event = any(
        e.kind is EventKind.INJECT and e.body.get("pause_requested") for e in session.events
    )
    resolution_event = any(
        e.kind is EventKind.RESOLUTION_DECLARED for e in session.events
    )
    check(
        "end-to-end scripted session (3x byte-identical, >= 1 action item)",
        identical
        and identical_stdout
        and len(items) >= 1
        and session.phase is Phase.END
        and pause_event
        and resolution_event,
    )


# -- criterion 7: persistence round-trip ----------------------------------------------------


def generated_session(rng: random.Random):
    session = create_session(
        default_scenario("micro" if rng.random() < 0.5 else "full"),
        [Participant(f"p{i}", f"Member {i}") for i in range(rng.randint(1, 4))],
        timedelta(minutes=rng.randint(1, 180)),
    )
    now = session.started_at
    for _ in range(rng.randint(0, 30)):
        if session.phase is Phase.END:
            break
        roll = rng.random()
        if roll < 0.5:
            signal = rng.choice(sorted(legal_signals(session.phase), key=lambda s: s.value))
            now += timedelta(minutes=rng.randint(1, 25))
            advance(session, signal, now=now)
        elif roll < 0.75:
            session.append_event(
                EventKind.INJECT,
                "facilitator",
                {"narrative": f"inject {rng.randint(0, 10**9)}"},
                now=now,
            )
        else:
            session.append_event(
                EventKind.HUMAN_RESPONSE,
                "p0",
                {"text": f"response {rng.randint(0, 10**9)}"},
                now=now,
            )
    return session


KILL_CHILD = r"""
import os, signal
from datetime import datetime, timezone
from ttxkit.exercise import EventKind, Phase, SessionEvent
from ttxkit.store import Store

store = Store({root!r})
tail = store.sessions.tail_sequence({sid!r})
event = SessionEvent(
    sequence_number=tail + 1,
    timestamp=datetime(2025, 1, 1, tzinfo=timezone.utc),
    phase=Phase.INCIDENT_ANALYSIS,
    actor="facilitator",
    kind=EventKind.INJECT,
    body={{"narrative": "survives the kill"}},
)
ack = store.sessions.append_event({sid!r}, event)
print(f"ACK {{ack}}", flush=True)
os.kill(os.getpid(), signal.SIGKILL)
"""


def test_persistence_round_trip(tmp_path):
    store = Store(tmp_path / "data")
    rng = random.Random(424242)
    round_trip_ok = True
    for _ in range(100):
        session = generated_session(rng)
        store.sessions.save_session(session)
        loaded = store.sessions.load_session(session.session_id)
        if loaded != session or loaded.state_view() != session.state_view():
            round_trip_ok = False
            break

    victim = two_person_session()
    store.sessions.save_session(victim)
    child = KILL_CHILD.format(root=str(store.root), sid=victim.session_id)
    proc = subprocess.run(
        [sys.executable, "-c", child], capture_output=True, text=True, timeout=60
    )
    killed_ok = "ACK" in proc.stdout and proc.returncode == -9
    reloaded = store.sessions.load_session(victim.session_id)
    survived = reloaded.events[-1].body == {"narrative": "survives the kill"}
    check(
        "persistence round-trip (100 sessions + kill -9 append survival)",
        round_trip_ok and killed_ok and survived,
    )


# -- criterion 8: live-client contract -------------------------------------------------------


def test_live_client_contract(monkeypatch):
    monkeypatch.setenv("TTX_ACCEPT_KEY", "recorded")
    recorded_request = json.loads((FIXTURES / "live_request.json").read_text())
    recorded_response = json.loads((FIXTURES / "live_response.json").read_text())
    seen = {}

    def handler(request: httpx.Request) -> httpx.Response:
        seen["body"] = json.loads(request.content)
        return httpx.Response(200, json=recorded_response)

    config = BackendConfig(
        mode="live",
        endpoint="https://llm.internal/v1/chat",
        credential_env="TTX_ACCEPT_KEY",
        model=recorded_request["model"],
        token_limit=recorded_request["max_tokens"],
    )
    backend = LiveBackend(config, transport=httpx.MockTransport(handler))
    reply = backend.next_message(recorded_request["messages"])
    check(
        "live-client contract (recorded fixtures replay verbatim, no network)",
        seen["body"] == recorded_request
        and reply.narrative == recorded_response["choices"][0]["message"]["content"],
    )
