"""Terminal entry points: run one session interactively, replay a transcript,
run the benchmark grid, or start the HTTP service.

Exit codes are a stable contract: 0 converged, 2 exhausted, 3 waiting for a
human answer timed out, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import build_session_spec, load_config_file
from .errors import ConfigError, HumanTimeout, MultitalkError
from .model import SessionStatus, serialize_plan

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_EXHAUSTED = 2
EXIT_HUMAN_TIMEOUT = 3


class TerminalHuman:
    """Interactive Q&A on stdin; blocks until the operator answers."""

    def ask(self, questions: list[str], timeout: float | None) -> list[str]:
        answers = []
        for q in questions:
            print(f"\n[planner asks] {q}")
            answers.append(input("> "))
        return answers


def format_event(doc: dict, verbose: bool = False) -> str | None:
    kind = doc.get("kind", "?")
    body = doc.get("body", {})
    seq = doc.get("seq", "?")
    prefix = f"[{seq:>3}]"
    if kind == "status":
        extra = ""
        if "iterations_used" in body:
            extra = f" after {body['iterations_used']} iterations"
        if body.get("error"):
            extra += f" ({body['error']})"
        return f"{prefix} STATUS     {body.get('status', '?')}{extra}"
    if kind == "planner_output":
        variant = body.get("variant")
        if variant == "instructions":
            steps = body.get("plan", [])
            rendered = json.dumps(steps) if verbose else f"{len(steps)} steps"
            return f"{prefix} PLANNER    instructions: {rendered}"
        if variant == "question human":
            return f"{prefix} PLANNER    asks: {'; '.join(body.get('questions', []))}"
        return f"{prefix} PLANNER    requests re-scan: {body.get('reason', '')}"
    if kind == "feedback":
        return f"{prefix} FEEDBACK   ({body.get('source')}): {body.get('text', '')}"
    if kind == "verdict":
        if body.get("result") == "success":
            return f"{prefix} SIMULATOR  success"
        if body.get("result") == "skipped":
            return f"{prefix} SIMULATOR  skipped (ablation)"
        return (
            f"{prefix} SIMULATOR  {body.get('kind')}: {body.get('detail', '')} "
            f"| suggestion: {body.get('suggestion', '')}"
        )
    if kind == "question":
        return f"{prefix} QUESTION   {'; '.join(body.get('questions', []))}"
    if kind == "answer":
        return f"{prefix} HUMAN      {'; '.join(body.get('answers', []))}"
    return f"{prefix} {kind.upper()} {json.dumps(body)}" if verbose else None


def _status_exit(status: SessionStatus) -> int:
    if status is SessionStatus.CONVERGED:
        return EXIT_OK
    if status is SessionStatus.EXHAUSTED:
        return EXIT_EXHAUSTED
    if status is SessionStatus.AWAITING_HUMAN_TIMEOUT:
        return EXIT_HUMAN_TIMEOUT
    return EXIT_ERROR


def cmd_plan(args) -> int:
    from .orchestrator import run_session

    config_path = Path(args.config)
    doc = load_config_file(config_path)
    spec = build_session_spec(doc, base_dir=config_path.parent, seed=args.seed)
    human = spec.human if spec.human is not None else TerminalHuman()

    out_path = Path(args.transcript_out or f"{config_path.stem}.transcript.jsonl")
    written = []

    def on_event(event):
        envelope = {"seq": event.seq, "timestamp": event.timestamp,
                    "kind": event.kind, "body": event.body}
        written.append(envelope)
        line = format_event(envelope, verbose=args.verbose)
        if line:
            print(line)

    result = run_session(
        spec.instruction, spec.source, spec.planner_backend,
        spec.analyzer_backend, human, spec.model, spec.session_config,
        on_event=on_event,
    )

    with open(out_path, "w", encoding="utf-8") as fh:
        for envelope in written:
            fh.write(json.dumps(envelope, sort_keys=True) + "\n")

    print()
    if result.final_plan is not None:
        print(f"final plan: {serialize_plan(result.final_plan)}")
    print(f"status: {result.status.value}")
    if result.status is SessionStatus.EXHAUSTED:
        print(f"exhausted after {result.iterations_used} iterations")
    if result.error:
        print(f"error: {result.error}", file=sys.stderr)
    print(f"transcript: {out_path}")
    return _status_exit(result.status)


def cmd_replay(args) -> int:
    path = Path(args.transcript)
    if not path.exists():
        print(f"error: transcript not found: {path}", file=sys.stderr)
        return EXIT_ERROR
    lines = path.read_text().splitlines()
    if not lines:
        print("error: empty transcript at line 1", file=sys.stderr)
        return EXIT_ERROR
    for i, line in enumerate(lines, start=1):
        try:
            doc = json.loads(line)
        except ValueError:
            if i == len(lines):
                print(f"warning: truncated last line {i} ignored", file=sys.stderr)
                return EXIT_OK
            print(f"error: corrupt transcript at line {i}", file=sys.stderr)
            return EXIT_ERROR
        rendered = format_event(doc, verbose=args.verbose)
        if rendered:
            print(rendered)
    return EXIT_OK


def _parse_tasks(text: str) -> list[str]:
    from .bench import TASK_ORDER

    if text in ("all", ""):
        return list(TASK_ORDER)
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo_i, hi_i = TASK_ORDER.index(lo), TASK_ORDER.index(hi)
        return TASK_ORDER[lo_i:hi_i + 1]
    tasks = [t.strip() for t in text.split(",") if t.strip()]
    for t in tasks:
        if t not in TASK_ORDER:
            raise ConfigError(f"unknown task {t!r}")
    return tasks


def _parse_ablations(text: str) -> list[str]:
    from .bench import ABLATION_ORDER

    if text in ("all", ""):
        return list(ABLATION_ORDER)
    names = [a.strip() for a in text.split(",") if a.strip()]
    for a in names:
        if a not in ABLATION_ORDER:
            raise ConfigError(
                f"unknown ablation {a!r}; expected one of {ABLATION_ORDER}"
            )
    return names


def cmd_bench(args) -> int:
    from .bench import run_benchmark, report_table, write_report

    tasks = _parse_tasks(args.tasks)
    ablations = _parse_ablations(args.ablations)
    out_dir = Path(args.out)
    report = run_benchmark(
        tasks=tasks,
        n_configs=args.configs,
        repeats=args.repeats,
        ablations=ablations,
        backend=args.backend,
        seed=args.seed,
        workers=args.workers,
        transcript_dir=out_dir / "runs",
    )
    csv_path, txt_path = write_report(report, out_dir)
    print(report_table(report))
    print(f"report: {csv_path}")
    print(f"table: {txt_path}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    defaults = load_config_file(args.config_defaults) if args.config_defaults else None
    console_dir = args.console_dir
    if console_dir is None:
        candidate = Path("frontend/dist")
        console_dir = candidate if candidate.is_dir() else None
    app = create_app(
        data_dir=args.data_dir,
        config_defaults=defaults,
        max_sessions=args.max_sessions,
        console_dir=console_dir,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multitalk",
        description="dialogue-driven robot task planning with a kinematic "
                    "feasibility simulator",
    )
    parser.add_argument("--verbose", action="store_true", help="print more detail")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="run one planning session")
    p.add_argument("--config", required=True, help="session config file (json/yaml)")
    p.add_argument("--seed", type=int, default=None, help="scene generator seed")
    p.add_argument("--transcript-out", default=None, help="transcript output path")
    p.set_defaults(fn=cmd_plan)

    p = sub.add_parser("replay", help="pretty-print a session transcript")
    p.add_argument("transcript", help="transcript JSONL file")
    p.set_defaults(fn=cmd_replay)

    p = sub.add_parser("bench", help="run the benchmark grid")
    p.add_argument("--tasks", default="all", help="e.g. T1..T8 or T3,T6")
    p.add_argument("--configs", type=int, default=5)
    p.add_argument("--repeats", type=int, default=2)
    p.add_argument("--ablations", default="all",
                   help="comma list of full,planner_analyzer,planner_simulator,planner")
    p.add_argument("--backend", default="oracle",
                   help="oracle | direct-swap | scripted:<dir> | live")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="bench-out")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8008)
    p.add_argument("--data-dir", default="./data")
    p.add_argument("--config-defaults", default=None,
                   help="config file merged under every session request")
    p.add_argument("--max-sessions", type=int, default=16)
    p.add_argument("--console-dir", default=None,
                   help="static console bundle (default: ./frontend/dist if present)")
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except HumanTimeout as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HUMAN_TIMEOUT
    except MultitalkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except KeyboardInterrupt:
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
