"""Canonical formatter: minimal parentheses, stable number and string forms."""

from __future__ import annotations

import random

from genkb import gen_kb, render_noisy
from kbshell.formatter import (
    format_condition,
    format_kb,
    format_number,
    format_string,
)
from kbshell.model import (
    And,
    BoolConst,
    KnowledgeBase,
    Literal,
    Not,
    Or,
    ParamRef,
)
from kbshell.parser import parse_condition, parse_kb

A, B, C = ParamRef("a"), ParamRef("b"), ParamRef("c")


def test_string_escaping():
    assert format_string('plain') == '"plain"'
    assert format_string('say "hi"') == '"say \\"hi\\""'
    assert format_string("back\\slash") == '"back\\\\slash"'
    assert format_string("two\nlines") == '"two\\nlines"'


def test_number_integral_form_within_exact_range():
    assert format_number(2.0) == "2"
    assert format_number(-150.0) == "-150"
    assert format_number(9007199254740992.0) == "9007199254740992"
    # beyond 2**53 the integral rendering could lie; fall back to repr
    assert format_number(9007199254740994.0) == "9007199254740994.0"


def test_number_fractional_and_exponent_forms_reparse_exactly():
    for value in (2.5, 1e300, 1e-9, 6.02e23, -0.125, 3.141592653589793):
        text = format_number(value)
        assert parse_condition(f"n = {text}").literal.value == value


def test_minimal_parentheses():
    cases = [
        (Or(And(A, B), C), "a and b or c"),
        (And(Or(A, B), C), "(a or b) and c"),
        (Or(A, And(B, C)), "a or b and c"),
        (Or(Or(A, B), C), "a or b or c"),
        (Or(A, Or(B, C)), "a or (b or c)"),
        (And(And(A, B), C), "a and b and c"),
        (And(A, And(B, C)), "a and (b and c)"),
        (Not(A), "not a"),
        (Not(And(A, B)), "not (a and b)"),
        (Not(Not(A)), "not (not a)"),
        (And(Not(A), B), "not a and b"),
        (BoolConst(True), "true"),
    ]
    for condition, expected in cases:
        assert format_condition(condition) == expected
        # and the text parses back to the same tree
        assert parse_condition(expected) == condition


def test_unconditional_rule_formats_as_always():
    kb = parse_kb('section start { if true do stop }').kb
    assert "always do stop" in format_kb(kb)


def test_multi_action_rules_indent_one_action_per_line():
    kb = parse_kb('section s { if a do advice "x", stop }').kb
    assert format_kb(kb) == (
        'section s {\n  if a do\n    advice "x",\n    stop\n}\n')


def test_empty_section_and_empty_kb():
    kb = parse_kb("section done {\n}").kb
    assert format_kb(kb) == "section done {\n}\n"
    assert format_kb(KnowledgeBase.build()) == ""


def test_parameter_rendering_with_and_without_question():
    source = ('parameter kind: category\n'
              '  question "What kind?"\n'
              '  values cat, dog\n'
              '\n'
              'parameter weight: number\n')
    kb = parse_kb(source).kb
    assert format_kb(kb) == source


def test_bundled_style_formatting_is_fixed_point():
    source = ('title "T"\n\nparameter p: boolean\n\nsection start {\n'
              '  if p do advice "yes"\n}\n')
    kb = parse_kb(source).kb
    assert format_kb(kb) == source


def test_random_kbs_roundtrip_and_are_idempotent():
    rng = random.Random(90125)
    for _ in range(60):
        kb = gen_kb(rng)
        canonical = format_kb(kb)
        result = parse_kb(canonical)
        assert result.diagnostics == []
        assert result.kb == kb
        assert format_kb(result.kb) == canonical


def test_noisy_spellings_normalize_to_the_same_canonical_text():
    rng = random.Random(5150)
    for _ in range(60):
        kb = gen_kb(rng)
        canonical = format_kb(kb)
        result = parse_kb(render_noisy(rng, kb))
        assert result.diagnostics == []
        assert format_kb(result.kb) == canonical
