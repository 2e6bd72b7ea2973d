"""The bundled Sanjeevani knowledge base and its golden transcripts."""

from __future__ import annotations

from pathlib import Path

from kbshell import (
    SANJEEVANI,
    TREATMENT_SECTIONS,
    builtin_kb,
    builtin_source,
    format_kb,
    lint,
    parse_kb,
    render_transcript,
    run_scripted,
)
from kbshell.engine import AdviceEvent, QuestionEvent

REPO = Path(__file__).resolve().parent.parent


def test_kb_identity():
    kb = builtin_kb()
    assert SANJEEVANI == "sanjeevani"
    assert kb.title == "Sanjeevani"


def test_parameters_match_the_consultation_flow():
    kb = builtin_kb()
    assert list(kb.parameters) == ["disease", "diabetesop"]
    disease = kb.parameters["disease"]
    assert disease.ptype == "category"
    assert disease.values == ("diabetes",)
    method = kb.parameters["diabetesop"]
    assert method.ptype == "category"
    assert method.values == (
        "naturalcare", "acupuncture", "homeopathic", "massage", "gems")


def test_sections_present_and_lint_clean():
    kb = builtin_kb()
    assert list(kb.sections)[:3] == ["start", "causeofdiabetes",
                                    "diabetesoption"]
    assert set(TREATMENT_SECTIONS.values()) <= set(kb.sections)
    assert len(kb.sections) == 8
    assert lint(kb) == []


def test_bundled_source_formats_idempotently():
    # the shipped file keeps a comment header, which canonical form
    # drops; one formatting pass must then be a fixed point
    result = parse_kb(builtin_source())
    assert result.diagnostics == []
    canonical = format_kb(result.kb)
    reparsed = parse_kb(canonical)
    assert reparsed.diagnostics == []
    assert reparsed.kb == result.kb
    assert format_kb(reparsed.kb) == canonical


def test_repo_copy_matches_packaged_resource():
    repo_copy = (REPO / "kbs" / "sanjeevani.kb").read_bytes()
    assert repo_copy == builtin_source().encode("utf-8")


def test_each_method_reaches_its_treatment_section():
    kb = builtin_kb()
    for method, section in TREATMENT_SECTIONS.items():
        events = run_scripted(kb, ["diabetes", method])
        assert events[-1].reason == "completed"
        advice_sections = [e.section for e in events
                           if isinstance(e, AdviceEvent)]
        assert advice_sections == ["causeofdiabetes", section]


def test_golden_files_are_current():
    kb = builtin_kb()
    for method in TREATMENT_SECTIONS:
        expected = (REPO / "golden" / f"{method}.txt").read_bytes()
        events = run_scripted(kb, ["diabetes", method])
        assert render_transcript(events).encode("utf-8") == expected


def test_only_two_questions_are_ever_asked():
    events = run_scripted(builtin_kb(), ["diabetes", "gems"])
    questions = [e.param for e in events if isinstance(e, QuestionEvent)]
    assert questions == ["disease", "diabetesop"]


def test_disclaimer_marker_on_every_advice():
    kb = builtin_kb()
    for method in TREATMENT_SECTIONS:
        events = run_scripted(kb, ["diabetes", method])
        for event in events:
            if isinstance(event, AdviceEvent):
                assert event.text.endswith("(sample content; not medical advice)")
