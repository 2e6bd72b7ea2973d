"""Consultation engine: tri-state evaluation, sessions, transcripts."""

from __future__ import annotations

import pytest

from kbshell.engine import (
    AdviceEvent,
    AnswerEvent,
    FinishedEvent,
    InvalidAnswer,
    LintGateFailed,
    QuestionEvent,
    SectionEnter,
    SectionExit,
    SessionFinishedError,
    Unknown,
    WarningEvent,
    escape_field,
    evaluate_condition,
    parse_answer,
    render_event,
    render_transcript,
    run_scripted,
    start_session,
)
from kbshell.model import (
    And,
    BoolConst,
    Compare,
    Literal,
    Not,
    Or,
    Parameter,
    ParamRef,
)
from kbshell.parser import parse_kb

A, B = ParamRef("a"), ParamRef("b")


def load(source):
    result = parse_kb(source)
    assert result.diagnostics == [], result.diagnostics
    return result.kb


# ---------------------------------------------------------------------------
# evaluate_condition
# ---------------------------------------------------------------------------

def test_constants_and_refs():
    assert evaluate_condition(BoolConst(True), {}) is True
    assert evaluate_condition(BoolConst(False), {}) is False
    assert evaluate_condition(A, {"a": True}) is True
    assert evaluate_condition(A, {}) == Unknown("a")


def test_and_short_circuits_on_false_left():
    assert evaluate_condition(And(BoolConst(False), A), {}) is False


def test_or_short_circuits_on_true_left():
    assert evaluate_condition(Or(BoolConst(True), A), {}) is True


def test_unknown_names_the_leftmost_missing_parameter():
    assert evaluate_condition(And(A, B), {}) == Unknown("a")
    assert evaluate_condition(And(A, B), {"a": True}) == Unknown("b")
    # an unknown left child wins even if the right child could decide
    assert evaluate_condition(And(A, BoolConst(False)), {}) == Unknown("a")
    assert evaluate_condition(Or(A, BoolConst(True)), {}) == Unknown("a")


def test_not_propagates_unknown():
    assert evaluate_condition(Not(A), {}) == Unknown("a")
    assert evaluate_condition(Not(A), {"a": True}) is False


def test_comparison_operators_on_numbers():
    bindings = {"n": 5.0}
    table = [("=", 5.0, True), ("=", 4.0, False), ("<>", 4.0, True),
             ("<", 6.0, True), ("<", 5.0, False), ("<=", 5.0, True),
             (">", 4.0, True), (">=", 5.0, True), (">=", 6.0, False)]
    for op, rhs, expected in table:
        cond = Compare("n", op, Literal("number", rhs))
        assert evaluate_condition(cond, bindings) is expected


def test_equality_on_text_and_category_and_bool():
    assert evaluate_condition(
        Compare("t", "=", Literal("text", "hi")), {"t": "hi"}) is True
    assert evaluate_condition(
        Compare("c", "<>", Literal("ident", "red")), {"c": "blue"}) is True
    assert evaluate_condition(
        Compare("b", "=", Literal("bool", False)), {"b": False}) is True


# ---------------------------------------------------------------------------
# parse_answer
# ---------------------------------------------------------------------------

def test_parse_answer_boolean_accepts_yes_no_any_case():
    param = Parameter("b", "boolean")
    assert parse_answer(param, "true") is True
    assert parse_answer(param, " YES ") is True
    assert parse_answer(param, "No") is False
    with pytest.raises(InvalidAnswer) as exc:
        parse_answer(param, "maybe")
    assert exc.value.allowed == ("true", "false", "yes", "no")


def test_parse_answer_number():
    param = Parameter("n", "number")
    assert parse_answer(param, " 42 ") == 42.0
    assert parse_answer(param, "-2.5e1") == -25.0
    with pytest.raises(InvalidAnswer):
        parse_answer(param, "five")
    with pytest.raises(InvalidAnswer):
        parse_answer(param, "1e999")


def test_parse_answer_text_is_verbatim():
    param = Parameter("t", "text")
    assert parse_answer(param, "  spaced  ") == "  spaced  "
    assert parse_answer(param, "") == ""


def test_parse_answer_category_is_case_sensitive():
    param = Parameter("c", "category", values=("red", "blue"))
    assert parse_answer(param, "red") == "red"
    assert parse_answer(param, " blue ") == "blue"
    with pytest.raises(InvalidAnswer) as exc:
        parse_answer(param, "Red")
    assert exc.value.allowed == ("red", "blue")


# ---------------------------------------------------------------------------
# Sessions
# ---------------------------------------------------------------------------

ASK_TWICE = """
parameter p: boolean
  question "Is it so?"

section start {
  if p do advice "first"
  if p do advice "second"
}
"""


def test_parameter_is_asked_once_then_reused():
    session = start_session(load(ASK_TWICE))
    assert session.question.param == "p"
    session.submit_answer("yes")
    questions = [e for e in session.events if isinstance(e, QuestionEvent)]
    assert len(questions) == 1
    assert session.advice_texts() == ["first", "second"]


def test_set_suppresses_asking():
    kb = load("""
parameter p: boolean

section start {
  always do set p := true
  if p do advice "derived"
}
""")
    session = start_session(kb)
    assert session.finished is not None
    assert session.advice_texts() == ["derived"]
    assert not any(isinstance(e, QuestionEvent) for e in session.events)


def test_set_overwrites_an_answered_value():
    kb = load("""
parameter p: boolean
  question "p?"

section start {
  if p do advice "asked true", set p := false
  if p do advice "still true"
  if p = false do advice "overwritten"
}
""")
    events = run_scripted(kb, ["yes"])
    texts = [e.text for e in events if isinstance(e, AdviceEvent)]
    assert texts == ["asked true", "overwritten"]


def test_conditions_reevaluate_from_the_root_after_each_answer():
    kb = load("""
parameter a: boolean
  question "a?"
parameter b: boolean
  question "b?"

section start {
  if a and b do advice "both"
}
""")
    session = start_session(kb)
    assert session.question.param == "a"
    session.submit_answer("yes")
    assert session.question.param == "b"
    session.submit_answer("yes")
    assert session.finished.reason == "completed"
    assert session.advice_texts() == ["both"]


def test_goto_enters_and_returns_in_stack_order():
    kb = load("""
section start {
  always do goto inner, advice "after"
}

section inner {
  always do advice "inside"
}
""")
    events = run_scripted(kb, [])
    assert [type(e).__name__ for e in events] == [
        "SectionEnter", "SectionEnter", "AdviceEvent", "SectionExit",
        "AdviceEvent", "SectionExit", "FinishedEvent"]


def test_all_matching_rules_fire_in_order():
    kb = load("""
section start {
  always do advice "one"
  if false do advice "skipped"
  always do advice "two"
}
""")
    events = run_scripted(kb, [])
    texts = [e.text for e in events if isinstance(e, AdviceEvent)]
    assert texts == ["one", "two"]


def test_stop_finishes_immediately_without_unwinding():
    kb = load('section start { always do advice "a", stop, advice "never" }')
    events = run_scripted(kb, [])
    assert [type(e).__name__ for e in events] == [
        "SectionEnter", "AdviceEvent", "FinishedEvent"]
    assert events[-1].reason == "stopped"


def test_self_recursion_is_cut_off():
    # pad the step budget with unreachable rules so the depth cap,
    # not the budget, is what trips
    pad = "\n".join(f'  always do advice "pad{i}"' for i in range(40))
    kb = load("section start { always do goto start }\n"
              f"section pad {{\n{pad}\n}}")
    events = run_scripted(kb, [])
    assert events[-1] == FinishedEvent("error", "depth cap exceeded")
    enters = sum(isinstance(e, SectionEnter) for e in events)
    assert enters == 64


def test_exponential_fanout_hits_the_step_budget():
    lines = ["section start { always do goto s1, goto s1 }"]
    for i in range(1, 30):
        lines.append(
            f"section s{i} {{ always do goto s{i + 1}, goto s{i + 1} }}")
    lines.append('section s30 { always do advice "leaf" }')
    kb = load("\n".join(lines))
    events = run_scripted(kb, [])
    assert events[-1] == FinishedEvent("error", "step budget exceeded")
    # termination must come well before the 2**30 leaves are visited
    assert len(events) < 100_000


def test_lint_gate_blocks_consultation():
    result = parse_kb('title "no start"')
    with pytest.raises(LintGateFailed) as exc:
        start_session(result.kb)
    assert [f.code for f in exc.value.findings] == ["E100"]


def test_answer_after_finish_raises():
    session = start_session(load('section start { always do stop }'))
    assert session.finished is not None
    with pytest.raises(SessionFinishedError):
        session.submit_answer("x")


def test_invalid_answer_leaves_session_unchanged():
    session = start_session(load(ASK_TWICE))
    before = list(session.events)
    with pytest.raises(InvalidAnswer):
        session.submit_answer("dunno")
    assert session.events == before
    assert session.question.param == "p"
    session.submit_answer("no")
    assert session.finished.reason == "completed"


def test_default_prompt_when_question_is_missing():
    kb = load("parameter p: boolean\nsection start { if p do stop }")
    session = start_session(kb)
    assert session.question.prompt == "Value of p?"


def test_scripted_run_aborts_when_answers_run_out():
    kb = load(ASK_TWICE)
    events = run_scripted(kb, [])
    assert events[-1] == FinishedEvent("error", "answers exhausted")


def test_scripted_run_warns_about_extra_answers():
    kb = load('section start { always do advice "hi" }')
    events = run_scripted(kb, ["spare", "spare"])
    warnings = [e for e in events if isinstance(e, WarningEvent)]
    assert len(warnings) == 1
    assert "2" in warnings[0].message


def test_scripted_run_aborts_on_invalid_answer():
    kb = load(ASK_TWICE)
    events = run_scripted(kb, ["perhaps"])
    assert events[-1].reason == "error"
    assert "invalid answer" in events[-1].detail


def test_bindings_only_grow_in_set_free_runs():
    kb = load(ASK_TWICE)
    session = start_session(kb)
    seen = dict(session.bindings)
    session.submit_answer("yes")
    for key, value in seen.items():
        assert session.bindings[key] == value
    assert "p" in session.bindings


def test_explain_records_fully_evaluated_conditions():
    session = start_session(load(ASK_TWICE))
    session.submit_answer("no")
    outcomes = [(e.section, e.rule_index, e.outcome)
                for e in session.explain()]
    assert outcomes == [("start", 0, False), ("start", 1, False)]


# ---------------------------------------------------------------------------
# Transcript rendering
# ---------------------------------------------------------------------------

def test_escape_field_keeps_events_single_line():
    assert escape_field("a\tb\nc\\d") == "a\\tb\\nc\\\\d"


def test_render_event_fields():
    assert render_event(SectionEnter("s")) == "ENTER\ts"
    assert render_event(SectionExit("s")) == "EXIT\ts"
    assert render_event(QuestionEvent("p", "why?\nbecause")) == \
        "QUESTION\tp\twhy?\\nbecause"
    assert render_event(AnswerEvent("p", True)) == "ANSWER\tp\ttrue"
    assert render_event(AnswerEvent("n", 2.5)) == "ANSWER\tn\t2.5"
    assert render_event(AnswerEvent("n", 4.0)) == "ANSWER\tn\t4"
    assert render_event(AdviceEvent("text", "sec", 3)) == "ADVICE\tsec\t3\ttext"
    assert render_event(FinishedEvent("completed")) == "FINISHED\tcompleted"
    assert render_event(FinishedEvent("error", "why")) == "FINISHED\terror\twhy"
    assert render_event(WarningEvent("careful")) == "WARNING\tcareful"


def test_render_transcript_trailing_newline():
    assert render_transcript([]) == ""
    text = render_transcript([SectionEnter("s"), FinishedEvent("completed")])
    assert text == "ENTER\ts\nFINISHED\tcompleted\n"


def test_transcript_never_contains_raw_control_chars_in_fields():
    # the DSL escapes newlines in strings; tabs are legal raw characters
    # there, but the transcript must escape both to stay line-oriented
    kb = load('section start { always do advice "line\\none\ttab" }')
    text = render_transcript(run_scripted(kb, []))
    advice_line = [l for l in text.splitlines() if l.startswith("ADVICE")][0]
    assert advice_line == "ADVICE\tstart\t0\tline\\none\\ttab"
