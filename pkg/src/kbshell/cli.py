"""Command-line front end: check, fmt, consult, run, and serve.

Exit codes follow the usual triad: 0 on success, 1 when the knowledge
base has error-level findings or a run fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

from .engine import (
    AdviceEvent,
    InvalidAnswer,
    Session,
    render_transcript,
    run_scripted,
    start_session,
)
from .formatter import format_kb
from .lint import lint
from .model import Diagnostic, KnowledgeBase
from .parser import parse_kb


def read_source(path: Path) -> str:
    """Read a KB file as UTF-8, replacing undecodable bytes."""
    return path.read_bytes().decode("utf-8", "replace")


def gate_load(path: Path) -> tuple[Optional[KnowledgeBase], list[Diagnostic]]:
    """Parse and lint one file.

    Returns (kb, findings); kb is None when any finding is error-level,
    which is exactly the condition under which consulting is forbidden.
    """
    result = parse_kb(read_source(path))
    findings: list[Diagnostic] = list(result.diagnostics)
    findings.extend(lint(result.kb))
    findings.sort(key=lambda d: (d.span, d.code))
    if any(f.severity == "error" for f in findings):
        return None, findings
    return result.kb, findings


def _report(findings: list[Diagnostic], filename: str) -> None:
    for finding in findings:
        print(finding.render(filename), file=sys.stderr)


def cmd_check(args: argparse.Namespace) -> int:
    kb, findings = gate_load(args.file)
    _report(findings, str(args.file))
    return 0 if kb is not None else 1


def cmd_fmt(args: argparse.Namespace) -> int:
    result = parse_kb(read_source(args.file))
    if result.has_errors:
        _report(result.diagnostics, str(args.file))
        return 1
    text = format_kb(result.kb)
    if args.write:
        args.file.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    kb, findings = gate_load(args.file)
    if kb is None:
        _report(findings, str(args.file))
        return 1
    answers = read_source(args.answers).splitlines()
    events = run_scripted(kb, answers)
    sys.stdout.write(render_transcript(events))
    sys.stdout.flush()
    finished = events[-1]
    return 1 if getattr(finished, "reason", "error") == "error" else 0


def _show_new_advice(session: Session, shown: int, out) -> int:
    for event in session.events[shown:]:
        if isinstance(event, AdviceEvent):
            out.write("\n" + event.text + "\n")
    return len(session.events)


def cmd_consult(args: argparse.Namespace) -> int:
    kb, findings = gate_load(args.file)
    if kb is None:
        _report(findings, str(args.file))
        return 1
    out = sys.stdout
    out.write(f"== {kb.title or args.file.name} ==\n")
    session = start_session(kb)
    shown = _show_new_advice(session, 0, out)
    while session.finished is None:
        question = session.question
        assert question is not None
        out.write("\n" + question.prompt + "\n")
        if question.ptype == "category":
            for value in question.values:
                out.write(f"  - {value}\n")
        elif question.ptype == "boolean":
            out.write("  (yes/no)\n")
        out.write("> ")
        out.flush()
        line = sys.stdin.readline()
        if line == "":
            out.write("\n")
            session.abort("input closed")
            break
        try:
            session.submit_answer(line.rstrip("\r\n"))
        except InvalidAnswer as exc:
            out.write(exc.message + "\n")
            continue
        shown = _show_new_advice(session, shown, out)
    assert session.finished is not None
    out.write(f"\nConsultation finished ({session.finished.reason}).\n")
    return 1 if session.finished.reason == "error" else 0


def load_kb_dir(directory: Path) -> dict[str, KnowledgeBase]:
    """Load every *.kb file under a directory, failing on gate errors.

    KB names are file stems; files load in sorted order so the registry
    listing is stable across platforms.
    """
    registry: dict[str, KnowledgeBase] = {}
    for path in sorted(directory.glob("*.kb")):
        kb, findings = gate_load(path)
        if kb is None:
            _report(findings, str(path))
            raise SystemExit(1)
        registry[path.stem] = kb
    return registry


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    registry = load_kb_dir(args.kb_dir)
    static_dir = args.static_dir
    if static_dir is None:
        candidate = Path("frontend") / "dist"
        static_dir = candidate if candidate.is_dir() else None
    app = create_app(registry, static_dir=static_dir)
    print(f"serving {len(registry)} knowledge base(s) on "
          f"http://{args.host}:{args.port}", file=sys.stderr)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kbshell",
        description="Knowledge-base expert system shell.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="parse and lint a KB file")
    p_check.add_argument("file", type=Path)
    p_check.set_defaults(func=cmd_check)

    p_fmt = sub.add_parser("fmt", help="print (or rewrite) the canonical form")
    p_fmt.add_argument("file", type=Path)
    p_fmt.add_argument("--write", action="store_true",
                       help="rewrite the file in place")
    p_fmt.set_defaults(func=cmd_fmt)

    p_consult = sub.add_parser("consult", help="interactive consultation")
    p_consult.add_argument("file", type=Path)
    p_consult.set_defaults(func=cmd_consult)

    p_run = sub.add_parser("run", help="scripted consultation")
    p_run.add_argument("file", type=Path)
    p_run.add_argument("--answers", type=Path, required=True,
                       help="file with one answer per line")
    p_run.set_defaults(func=cmd_run)

    p_serve = sub.add_parser("serve", help="HTTP consultation service")
    p_serve.add_argument("--port", type=int, default=8080)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--kb-dir", type=Path, default=Path("kbs"))
    p_serve.add_argument("--static-dir", type=Path, default=None,
                         help="directory of web client assets to serve at /")
    p_serve.set_defaults(func=cmd_serve)

    return parser


def run_cli(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    except OSError as exc:
        print(f"kbshell: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    raise SystemExit(run_cli())
