"""Static analysis of a parsed knowledge base.

The checks split into errors (anything that could crash or mis-type a
consultation) and warnings (dead code and style), with stable codes:

    E100  no `start` section
    E101  goto targets an undefined section
    E102  condition or set references an undefined parameter
    E103  type mismatch (ordering op on non-number, bare reference to a
          non-boolean, literal kind vs parameter type)
    E104  category literal is not among the declared values
    W200  section unreachable from `start`
    W201  parameter never referenced
    W202  section with no rules

A knowledge base with zero E-findings can be consulted without hitting
an undefined reference at runtime; the engine's lint gate relies on
that. Reachability is syntactic: every goto counts, whether or not its
guarding condition is satisfiable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .model import (
    And,
    Compare,
    Condition,
    Diagnostic,
    Goto,
    KnowledgeBase,
    Literal,
    Not,
    Or,
    Parameter,
    ParamRef,
    Section,
    SetParam,
    Span,
    START_SECTION,
    ORDERING_OPS,
)

# Literal kind that matches each parameter type.
_LITERAL_KIND_FOR = {
    "boolean": "bool",
    "text": "text",
    "number": "number",
    "category": "ident",
}


@dataclass(frozen=True)
class Finding(Diagnostic):
    """A lint result; `subject` names the parameter or section concerned."""

    subject: Optional[str] = None


def _finding(code: str, message: str, span: Span, subject: str = None) -> Finding:
    severity = "error" if code.startswith("E") else "warning"
    return Finding(severity=severity, code=code, message=message, span=span,
                   subject=subject)


def reachable_sections(kb: KnowledgeBase) -> set[str]:
    """Defined sections reachable from `start` over goto edges.

    Least fixpoint containing `start` (when present) and closed under
    every goto appearing anywhere in a reachable section's rules;
    conditions are not evaluated. Dangling goto targets never enter the
    result (they are E101's concern). Empty set when `start` is absent.
    """
    if START_SECTION not in kb.sections:
        return set()
    reached = {START_SECTION}
    worklist = [START_SECTION]
    while worklist:
        section = kb.sections[worklist.pop()]
        for rule in section.rules:
            for action in rule.actions:
                if isinstance(action, Goto):
                    target = action.target
                    if target in kb.sections and target not in reached:
                        reached.add(target)
                        worklist.append(target)
    return reached


def _walk_condition(cond: Condition):
    """Yield the ParamRef and Compare leaves in evaluation order."""
    if isinstance(cond, (ParamRef, Compare)):
        yield cond
    elif isinstance(cond, Not):
        yield from _walk_condition(cond.operand)
    elif isinstance(cond, (And, Or)):
        yield from _walk_condition(cond.left)
        yield from _walk_condition(cond.right)


def _check_literal(param: Parameter, literal: Literal, findings: list[Finding]) -> None:
    expected = _LITERAL_KIND_FOR[param.ptype]
    if literal.kind != expected:
        findings.append(_finding(
            "E103",
            f"{literal.kind} literal does not match parameter "
            f"'{param.name}' of type {param.ptype}",
            literal.span, subject=param.name))
    elif param.ptype == "category" and literal.value not in param.values:
        findings.append(_finding(
            "E104",
            f"'{literal.value}' is not a declared value of category "
            f"parameter '{param.name}'",
            literal.span, subject=param.name))


def lint(kb: KnowledgeBase) -> list[Finding]:
    """Run every check; returns findings ordered by span, then code."""
    findings: list[Finding] = []
    referenced: set[str] = set()

    if START_SECTION not in kb.sections:
        findings.append(_finding(
            "E100", "missing start section", Span(1, 1), subject=START_SECTION))

    for section in kb.sections.values():
        if not section.rules:
            findings.append(_finding(
                "W202", f"section '{section.name}' has no rules",
                section.span, subject=section.name))
        for rule in section.rules:
            for leaf in _walk_condition(rule.condition):
                referenced.add(leaf.name)
                param = kb.lookup_parameter(leaf.name)
                if param is None:
                    findings.append(_finding(
                        "E102", f"'{leaf.name}' is not a defined parameter",
                        leaf.span, subject=leaf.name))
                    continue
                if isinstance(leaf, ParamRef):
                    if param.ptype != "boolean":
                        findings.append(_finding(
                            "E103",
                            f"bare reference to '{param.name}' requires a boolean "
                            f"parameter, not {param.ptype}",
                            leaf.span, subject=param.name))
                elif leaf.op in ORDERING_OPS and param.ptype != "number":
                    findings.append(_finding(
                        "E103",
                        f"ordering operator '{leaf.op}' requires a number "
                        f"parameter, '{param.name}' is {param.ptype}",
                        leaf.span, subject=param.name))
                else:
                    _check_literal(param, leaf.literal, findings)
            for action in rule.actions:
                if isinstance(action, Goto):
                    if action.target not in kb.sections:
                        findings.append(_finding(
                            "E101",
                            f"goto target '{action.target}' is not a defined section",
                            action.span, subject=action.target))
                elif isinstance(action, SetParam):
                    referenced.add(action.name)
                    param = kb.lookup_parameter(action.name)
                    if param is None:
                        findings.append(_finding(
                            "E102", f"'{action.name}' is not a defined parameter",
                            action.span, subject=action.name))
                    else:
                        _check_literal(param, action.value, findings)

    reached = reachable_sections(kb)
    for section in kb.sections.values():
        if section.name != START_SECTION and section.name not in reached:
            findings.append(_finding(
                "W200", f"section '{section.name}' is unreachable from start",
                section.span, subject=section.name))

    for param in kb.parameters.values():
        if param.name not in referenced:
            findings.append(_finding(
                "W201", f"parameter '{param.name}' is never referenced",
                param.span, subject=param.name))

    findings.sort(key=lambda f: (f.span, f.code))
    return findings


def error_findings(findings: list[Finding]) -> list[Finding]:
    """Just the E-severity findings (the consultation gate)."""
    return [f for f in findings if f.severity == "error"]
