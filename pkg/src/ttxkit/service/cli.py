"""Command-line interface.

Subcommands: serve (HTTP service), run (interactive terminal exercise,
micro-tabletop by default), score (preparedness report for a profile
table), sweep (configuration x alpha score table), retro (retrospective
over a stored session).

Exit codes: 0 success, 1 validation failure, 2 backend failure.
"""

from __future__ import annotations

import argparse
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

from ..errors import BackendError, TtxError, ValidationError
from ..exercise import Participant, Scenario
from ..facilitator.backends import BackendConfig, make_backend
from ..facilitator.turns import run_retrospective
from ..scoring import (
    emit_score_table,
    load_profiles,
    mean_abs_delta,
    preparedness,
    preparedness_delta,
    upbs,
    write_score_table,
)
from ..store import Store
from .config import ApiConfig, ensure_writable, load_config
from .runner import TickClock, WallClock, run_exercise

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_BACKEND = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ttx", description=__doc__)
    parser.add_argument("--config", help="INI config file (sections: server, storage, backend, scoring)")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host")
    serve.add_argument("--port", type=int)

    run = sub.add_parser("run", help="run a terminal exercise (micro-tabletop by default)")
    run.add_argument("--scope", choices=["micro", "full"], default="micro")
    run.add_argument("--domain", default="Active Directory", help="responsibility domain (micro scope)")
    run.add_argument("--narrative", default="", help="scenario narrative (full scope, or micro environment notes)")
    run.add_argument("--participant", default="operator", help="participant id for the single human")
    run.add_argument("--minutes", type=float, default=30.0, help="exercise time budget")
    run.add_argument("--script", help="mock facilitator script (JSONL)")
    run.add_argument("--data-dir", help="storage root; the finished session is saved here")
    run.add_argument("--session-id", help="fixed session id (deterministic runs)")
    run.add_argument("--clock-start", help="fixed ISO start time; makes the run deterministic")
    run.add_argument("--clock-step", type=float, default=60.0, help="seconds per clock tick with --clock-start")

    score = sub.add_parser("score", help="print P, pairwise deltas, and the unified score")
    score.add_argument("--profiles", required=True, help="team profile CSV")
    score.add_argument("--alpha", type=float, default=None)

    sweep = sub.add_parser("sweep", help="emit the configuration x alpha score table as CSV")
    sweep.add_argument(
        "--profiles",
        action="append",
        required=True,
        metavar="NAME=PATH",
        help="named configuration profile CSV; repeatable",
    )
    sweep.add_argument("--alphas", default="0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")
    sweep.add_argument("--output", default="-", help="output CSV path, '-' for stdout")

    retro = sub.add_parser("retro", help="run a retrospective over a stored session")
    retro.add_argument("--data-dir", required=True)
    retro.add_argument("--session-id", required=True)
    retro.add_argument("--script", help="mock facilitator script override")

    return parser


def _backend_config(config: ApiConfig, script_override: str | None) -> BackendConfig:
    backend = config.backend
    if script_override:
        backend = BackendConfig(
            mode="mock",
            token_limit=backend.token_limit,
            timeout_seconds=backend.timeout_seconds,
            retries=backend.retries,
            backoff_seconds=backend.backoff_seconds,
            script_path=script_override,
        )
    return backend


def cmd_serve(args, config: ApiConfig) -> int:
    import uvicorn

    from .app import create_app

    if args.host:
        config.listen_host = args.host
    if args.port:
        config.listen_port = args.port
    app = create_app(config)
    uvicorn.run(app, host=config.listen_host, port=config.listen_port)
    return EXIT_OK


def cmd_run(args, config: ApiConfig) -> int:
    backend_config = _backend_config(config, args.script)
    if backend_config.mode == "mock" and not backend_config.script_path:
        raise ValidationError("mock mode needs --script or a [backend] script entry")

    if args.scope == "micro":
        scenario = Scenario(
            narrative=args.narrative or f"Micro exercise against {args.domain}.",
            scope="micro",
            domains=[args.domain],
        )
    else:
        if not args.narrative:
            raise ValidationError("full-scope runs need --narrative")
        scenario = Scenario(narrative=args.narrative, scope="full")

    store = None
    if args.data_dir:
        store = Store(ensure_writable(args.data_dir))
        if scenario.scope == "micro" and scenario.domains:
            digest = store.registry.context_for_future(scenario.domains[0])
            if digest:
                scenario.prior_findings = digest

    if args.clock_start:
        start = datetime.fromisoformat(args.clock_start)
        if start.tzinfo is None:
            start = start.replace(tzinfo=timezone.utc)
        clock = TickClock(start, step_seconds=args.clock_step)
    else:
        clock = WallClock()

    backend = make_backend(backend_config)

    def read_input(prompt: str) -> str:
        sys.stdout.write(prompt)
        sys.stdout.flush()
        line = sys.stdin.readline()
        if not line:
            raise ValidationError("facilitator paused but stdin is exhausted")
        return line.rstrip("\n")

    result = run_exercise(
        scenario,
        [Participant(args.participant, args.participant)],
        timedelta(minutes=args.minutes),
        backend,
        backend_config,
        input_fn=read_input,
        output_fn=lambda line: print(line),
        clock=clock,
        session_id=args.session_id,
    )

    if store is not None:
        store.sessions.save_session(result.session)
        domain = scenario.domains[0] if scenario.domains else None
        for item in result.parsed.items:
            item.responsibility_domain = (
                domain
                if domain and (store.domains.has_domain(domain) or store.domains.find_by_name(domain))
                else None
            )
        store.registry.store_action_items(
            result.parsed.items,
            source_session=result.session.session_id,
            now=clock.now(),
        )
        print(f"session saved: {result.session.session_id}")
    print(f"phase: {result.session.phase.value}; action items: {len(result.parsed.items)}")
    return EXIT_OK


def cmd_score(args, config: ApiConfig) -> int:
    profiles = load_profiles(args.profiles)
    if not profiles:
        raise ValidationError("profile file has no team rows")
    alpha = args.alpha if args.alpha is not None else config.default_alpha
    scores = [preparedness(p) for p in profiles]
    for score in scores:
        print(f"P({score.team_id}) = {score.value:.3f}")
    for i in range(len(scores)):
        for j in range(i + 1, len(scores)):
            delta = preparedness_delta(scores[i], scores[j])
            print(f"delta({delta.team_a}, {delta.team_b}) = {delta.delta:.3f}")
    result = upbs(profiles, alpha)
    print(f"mean |delta| = {mean_abs_delta(profiles):.3f}")
    print(f"UPBS(alpha={alpha:g}) = {result.score:.3f}")
    return EXIT_OK


def cmd_sweep(args, config: ApiConfig) -> int:
    configurations = {}
    for entry in args.profiles:
        name, sep, path = entry.partition("=")
        if not sep or not name or not path:
            raise ValidationError(f"--profiles expects NAME=PATH, got {entry!r}")
        configurations[name] = load_profiles(path)
    alphas = [float(a) for a in args.alphas.split(",") if a.strip()]
    rows = emit_score_table(configurations, alphas)
    if args.output == "-":
        write_score_table(rows, sys.stdout, precision=3)
    else:
        with open(args.output, "w", encoding="utf-8", newline="") as handle:
            write_score_table(rows, handle, precision=3)
        print(f"wrote {len(rows)} rows to {args.output}")
    return EXIT_OK


def cmd_retro(args, config: ApiConfig) -> int:
    store = Store(Path(args.data_dir))
    session = store.sessions.load_session(args.session_id)
    backend_config = _backend_config(config, args.script)
    if backend_config.mode == "mock" and not backend_config.script_path:
        raise ValidationError("mock mode needs --script or a [backend] script entry")

    from .app import consumed_script_messages

    if backend_config.mode == "mock":
        from ..facilitator.backends import MockScript

        backend = MockScript.load(backend_config.script_path).player(
            start=consumed_script_messages(session)
        )
    else:
        backend = make_backend(backend_config)

    text, parsed = run_retrospective(session, backend, config=backend_config)
    store.sessions.save_session(session)
    store.registry.store_action_items(parsed.items, source_session=session.session_id)
    print(text)
    for item in parsed.items:
        print(f"- {item.finding} -> {item.improvement}")
        if item.measurable_criterion:
            print(f"  measure: {item.measurable_criterion}")
    for warning in parsed.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        if args.command == "serve":
            return cmd_serve(args, config)
        if args.command == "run":
            return cmd_run(args, config)
        if args.command == "score":
            return cmd_score(args, config)
        if args.command == "sweep":
            return cmd_sweep(args, config)
        if args.command == "retro":
            return cmd_retro(args, config)
        parser.error(f"unknown command {args.command!r}")
    except BackendError as exc:
        print(f"backend failure: {exc.message}", file=sys.stderr)
        return EXIT_BACKEND
    except TtxError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
