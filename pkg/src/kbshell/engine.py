"""Backward-chaining consultation engine.

Execution starts at the `start` section and walks rules in textual
order. A rule's condition is evaluated tri-state: True, False, or
Unknown(p) naming the leftmost parameter whose value is missing, in
which case the session suspends and asks for exactly that parameter.
Nothing is asked up front and nothing is asked that no evaluated
condition demanded; each parameter is asked at most once per session.

Actions of a satisfied rule run in order: `advice` records output,
`set` binds a parameter (which will then never be asked), `goto` enters
another section with call/return semantics (control resumes at the
action after the goto once the target's rules are exhausted), and
`stop` ends the session. All satisfied rules in a section fire, not
just the first. The session finishes when `start`'s rules are
exhausted, a `stop` runs, or a runtime cap trips (goto nesting beyond
64 frames, or the overall step budget).

The transcript is an ordered event log with a canonical text form: one
event per line, fields tab-separated, free-text fields escaped so an
event never spans lines (\\ -> \\\\, newline -> \\n, tab -> \\t):

    ENTER<TAB>section
    QUESTION<TAB>param<TAB>prompt
    ANSWER<TAB>param<TAB>value
    ADVICE<TAB>section<TAB>rule-index<TAB>text
    EXIT<TAB>section
    FINISHED<TAB>reason[<TAB>detail]
    WARNING<TAB>message

Identical knowledge base plus identical answers always yields a
byte-identical canonical transcript.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .formatter import format_number
from .lint import Finding, error_findings, lint
from .model import (
    Advice,
    And,
    BoolConst,
    Compare,
    Condition,
    Goto,
    KnowledgeBase,
    Not,
    Or,
    Parameter,
    ParamRef,
    SetParam,
    Stop,
    START_SECTION,
)

MAX_STACK_DEPTH = 64

# A bound value: bool, binary64 number, or text/category string.
Value = Union[bool, float, str]
Bindings = dict[str, Value]


@dataclass(frozen=True)
class Unknown:
    """Tri-state "don't know yet": names the parameter to ask for."""

    param: str


TriState = Union[bool, Unknown]


class LintGateFailed(Exception):
    """The knowledge base has error-level findings and cannot be consulted."""

    def __init__(self, findings: list[Finding]):
        codes = ", ".join(f.code for f in findings)
        super().__init__(f"knowledge base failed the lint gate: {codes}")
        self.findings = findings


class InvalidAnswer(Exception):
    """The submitted answer does not fit the pending question's type."""

    def __init__(self, message: str, allowed: tuple[str, ...] = ()):
        super().__init__(message)
        self.message = message
        self.allowed = allowed


class SessionFinishedError(Exception):
    """An answer arrived after the session already finished."""


# ---------------------------------------------------------------------------
# Condition evaluation
# ---------------------------------------------------------------------------

def evaluate_condition(cond: Condition, bindings: Bindings) -> TriState:
    """Left-to-right short-circuit tri-state evaluation.

    `and` never touches its right operand once the left is False, `or`
    once the left is True, and Unknown propagates the leftmost demanded
    parameter. With complete bindings the result is always a bool.
    """
    if isinstance(cond, BoolConst):
        return cond.value
    if isinstance(cond, ParamRef):
        if cond.name in bindings:
            return bool(bindings[cond.name])
        return Unknown(cond.name)
    if isinstance(cond, Compare):
        if cond.name not in bindings:
            return Unknown(cond.name)
        return _compare(bindings[cond.name], cond.op, cond.literal.value)
    if isinstance(cond, Not):
        result = evaluate_condition(cond.operand, bindings)
        if isinstance(result, Unknown):
            return result
        return not result
    if isinstance(cond, And):
        left = evaluate_condition(cond.left, bindings)
        if left is False or isinstance(left, Unknown):
            return left
        return evaluate_condition(cond.right, bindings)
    if isinstance(cond, Or):
        left = evaluate_condition(cond.left, bindings)
        if left is True or isinstance(left, Unknown):
            return left
        return evaluate_condition(cond.right, bindings)
    raise TypeError(f"not a condition node: {cond!r}")


def _compare(value: Value, op: str, literal: Value) -> bool:
    if op == "=":
        return value == literal
    if op == "<>":
        return value != literal
    if op == "<":
        return value < literal
    if op == "<=":
        return value <= literal
    if op == ">":
        return value > literal
    return value >= literal


# ---------------------------------------------------------------------------
# Answers
# ---------------------------------------------------------------------------

_NUMBER_RE = re.compile(r"-?[0-9]+(\.[0-9]+)?([eE][+-]?[0-9]+)?\Z")


def parse_answer(param: Parameter, raw: str) -> Value:
    """Convert a raw answer to the parameter's value type.

    Text is taken verbatim. For the other types surrounding whitespace
    is stripped; booleans accept true/false/yes/no case-insensitively,
    numbers must match the DSL's numeric grammar, and category answers
    must equal one of the declared values (case-sensitive).
    """
    if param.ptype == "text":
        return raw
    text = raw.strip()
    if param.ptype == "boolean":
        lowered = text.lower()
        if lowered in ("true", "yes"):
            return True
        if lowered in ("false", "no"):
            return False
        raise InvalidAnswer(
            f"expected true, false, yes, or no, got {raw!r}",
            allowed=("true", "false", "yes", "no"))
    if param.ptype == "number":
        if not _NUMBER_RE.match(text):
            raise InvalidAnswer(f"expected a number, got {raw!r}")
        value = float(text)
        if math.isinf(value):
            raise InvalidAnswer("number out of range")
        return value
    if text in param.values:
        return text
    raise InvalidAnswer(
        f"expected one of {', '.join(param.values)}, got {raw!r}",
        allowed=param.values)


# ---------------------------------------------------------------------------
# Transcript events
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SectionEnter:
    section: str


@dataclass(frozen=True)
class SectionExit:
    section: str


@dataclass(frozen=True)
class QuestionEvent:
    param: str
    prompt: str


@dataclass(frozen=True)
class AnswerEvent:
    param: str
    value: Value


@dataclass(frozen=True)
class AdviceEvent:
    text: str
    section: str
    rule_index: int


@dataclass(frozen=True)
class FinishedEvent:
    reason: str  # "completed" | "stopped" | "error"
    detail: Optional[str] = None


@dataclass(frozen=True)
class WarningEvent:
    message: str


Event = Union[SectionEnter, SectionExit, QuestionEvent, AnswerEvent,
              AdviceEvent, FinishedEvent, WarningEvent]

Transcript = list


def escape_field(text: str) -> str:
    """Keep a free-text field on one line of the canonical transcript."""
    return (text.replace("\\", "\\\\")
                .replace("\t", "\\t")
                .replace("\n", "\\n"))


def render_value(value: Value) -> str:
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, float):
        return format_number(value)
    return escape_field(value)


def render_event(event: Event) -> str:
    if isinstance(event, SectionEnter):
        return f"ENTER\t{event.section}"
    if isinstance(event, SectionExit):
        return f"EXIT\t{event.section}"
    if isinstance(event, QuestionEvent):
        return f"QUESTION\t{event.param}\t{escape_field(event.prompt)}"
    if isinstance(event, AnswerEvent):
        return f"ANSWER\t{event.param}\t{render_value(event.value)}"
    if isinstance(event, AdviceEvent):
        return f"ADVICE\t{event.section}\t{event.rule_index}\t{escape_field(event.text)}"
    if isinstance(event, FinishedEvent):
        if event.detail is not None:
            return f"FINISHED\t{event.reason}\t{escape_field(event.detail)}"
        return f"FINISHED\t{event.reason}"
    if isinstance(event, WarningEvent):
        return f"WARNING\t{escape_field(event.message)}"
    raise TypeError(f"not a transcript event: {event!r}")


def render_transcript(events: list[Event]) -> str:
    """Canonical text form: UTF-8 lines, one trailing newline."""
    if not events:
        return ""
    return "\n".join(render_event(e) for e in events) + "\n"


# ---------------------------------------------------------------------------
# Sessions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Question:
    """What the session is waiting for, ready to present to a user."""

    param: str
    prompt: str
    ptype: str
    values: tuple[str, ...] = ()


@dataclass(frozen=True)
class ExplainEntry:
    """One fully evaluated rule condition and how it came out."""

    section: str
    rule_index: int
    condition: Condition
    outcome: bool


@dataclass
class _Frame:
    section: str
    rule: int = 0
    action: int = 0


class Session:
    """One consultation over an immutable knowledge base.

    Externally synchronized: callers must not overlap operations on one
    session, though distinct sessions over the same KB are independent.
    Use :func:`start_session` to create one; the constructor does not
    run the lint gate.
    """

    def __init__(self, kb: KnowledgeBase):
        self.kb = kb
        self.bindings: Bindings = {}
        self.events: list[Event] = []
        self.question: Optional[Question] = None
        self.finished: Optional[FinishedEvent] = None
        self._stack: list[_Frame] = []
        self._asked: set[str] = set()
        self._explain: list[ExplainEntry] = []
        # Step budget makes termination unconditional even for KBs whose
        # goto tree stays under the depth cap but fans out combinatorially.
        rule_count = sum(len(s.rules) for s in kb.sections.values())
        max_actions = max(
            (len(r.actions) for s in kb.sections.values() for r in s.rules),
            default=1)
        self._steps_left = max(MAX_STACK_DEPTH * rule_count * max_actions, 1)

    @property
    def status(self) -> str:
        return "finished" if self.finished is not None else "awaiting_answer"

    def advice_texts(self) -> list[str]:
        return [e.text for e in self.events if isinstance(e, AdviceEvent)]

    def explain(self) -> list[ExplainEntry]:
        """Fully evaluated rule conditions, in evaluation order."""
        return list(self._explain)

    # -- operations --------------------------------------------------------

    def submit_answer(self, raw: str) -> "Session":
        """Bind the pending question's parameter and resume execution.

        Raises InvalidAnswer (session unchanged, question still pending)
        or SessionFinishedError (no question will ever be pending again).
        """
        if self.finished is not None:
            raise SessionFinishedError("session already finished")
        assert self.question is not None
        param = self.kb.lookup_parameter(self.question.param)
        value = parse_answer(param, raw)
        self.bindings[param.name] = value
        self.events.append(AnswerEvent(param.name, value))
        self.question = None
        self._run()
        return self

    def abort(self, detail: str) -> None:
        """Force an error finish (scripted runs, lost clients)."""
        if self.finished is None:
            self._finish("error", detail)

    # -- engine internals --------------------------------------------------

    def _finish(self, reason: str, detail: Optional[str] = None) -> None:
        self.question = None
        self.finished = FinishedEvent(reason, detail)
        self.events.append(self.finished)

    def _ask(self, name: str) -> None:
        param = self.kb.lookup_parameter(name)
        prompt = param.question if param.question is not None else f"Value of {name}?"
        self._asked.add(name)
        self.question = Question(name, prompt, param.ptype, param.values)
        self.events.append(QuestionEvent(name, prompt))

    def _enter(self, name: str) -> None:
        self._stack.append(_Frame(name))
        self.events.append(SectionEnter(name))

    def _spend_step(self) -> bool:
        self._steps_left -= 1
        if self._steps_left < 0:
            self._finish("error", "step budget exceeded")
            return False
        return True

    def _run(self) -> None:
        """Advance until a question is pending or the session finishes."""
        while self.finished is None:
            if not self._stack:
                self._finish("completed")
                return
            frame = self._stack[-1]
            section = self.kb.sections[frame.section]
            if frame.rule >= len(section.rules):
                self.events.append(SectionExit(frame.section))
                self._stack.pop()
                continue
            rule = section.rules[frame.rule]

            if frame.action == 0:
                # Condition not yet confirmed for this activation.
                if not self._spend_step():
                    return
                result = evaluate_condition(rule.condition, self.bindings)
                if isinstance(result, Unknown):
                    self._ask(result.param)
                    return
                self._explain.append(ExplainEntry(
                    frame.section, frame.rule, rule.condition, result))
                if result is False:
                    frame.rule += 1
                    continue

            entered = False
            while frame.action < len(rule.actions):
                if not self._spend_step():
                    return
                action = rule.actions[frame.action]
                frame.action += 1
                if isinstance(action, Advice):
                    self.events.append(AdviceEvent(
                        action.text, frame.section, frame.rule))
                elif isinstance(action, SetParam):
                    self.bindings[action.name] = _literal_value(action.value)
                elif isinstance(action, Goto):
                    if len(self._stack) >= MAX_STACK_DEPTH:
                        self._finish("error", "depth cap exceeded")
                        return
                    self._enter(action.target)
                    entered = True
                    break
                else:  # Stop
                    self._finish("stopped")
                    return
            if entered:
                continue
            frame.rule += 1
            frame.action = 0


def _literal_value(literal) -> Value:
    # bool / float / text pass through; ident literals become the value name.
    return literal.value


def start_session(kb: KnowledgeBase) -> Session:
    """Lint-gate the KB, then run from `start` until input is needed.

    Raises LintGateFailed when the KB has error-level findings.
    """
    errors = error_findings(lint(kb))
    if errors:
        raise LintGateFailed(errors)
    session = Session(kb)
    session._enter(START_SECTION)
    session._run()
    return session


def run_scripted(kb: KnowledgeBase, answers: list[str]) -> list[Event]:
    """Replay a consultation from a fixed answer list.

    Running out of answers or submitting an invalid one finishes the
    transcript with an error; unused answers add a warning event.
    """
    session = start_session(kb)
    used = 0
    while session.status == "awaiting_answer":
        if used >= len(answers):
            session.abort("answers exhausted")
            break
        raw = answers[used]
        used += 1
        try:
            session.submit_answer(raw)
        except InvalidAnswer as err:
            session.abort(f"invalid answer for '{session.question.param}': {err.message}")
            break
    if used < len(answers):
        session.events.append(WarningEvent(
            f"extra answers ignored: {len(answers) - used}"))
    return list(session.events)
