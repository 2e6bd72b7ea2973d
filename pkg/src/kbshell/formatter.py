"""Canonical pretty-printer for knowledge bases.

The output is the fixed house style: one item per block separated by a
blank line, two-space indent inside sections, `always` for rules whose
condition is the literal `true`, minimal parentheses (re-inserted only
where precedence or associativity demands them), and normalized string
escapes. Formatting then reparsing yields a structurally identical
knowledge base, and formatting is idempotent byte-for-byte.
"""

from __future__ import annotations

from .model import (
    Action,
    Advice,
    And,
    BoolConst,
    Compare,
    Condition,
    Goto,
    KnowledgeBase,
    Literal,
    Not,
    Or,
    Parameter,
    ParamRef,
    Rule,
    Section,
    SetParam,
    Stop,
)

# Binding strength; atoms bind tightest. `and`/`or` are left-associative,
# so a right child of equal precedence must be re-parenthesized, and the
# grammar allows only one `not` per atom, so nested `not` needs parens too.
_PREC_OR = 1
_PREC_AND = 2
_PREC_NOT = 3
_PREC_ATOM = 4


def _precedence(cond: Condition) -> int:
    if isinstance(cond, Or):
        return _PREC_OR
    if isinstance(cond, And):
        return _PREC_AND
    if isinstance(cond, Not):
        return _PREC_NOT
    return _PREC_ATOM


def format_string(text: str) -> str:
    """Quote and escape a string literal (escapes: \\\\, \\", \\n)."""
    escaped = text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return f'"{escaped}"'


def format_number(value: float) -> str:
    """Shortest form that reparses to the same binary64 value."""
    if value.is_integer() and abs(value) <= 2 ** 53:
        return str(int(value))
    return repr(value)


def format_literal(literal: Literal) -> str:
    if literal.kind == "text":
        return format_string(literal.value)
    if literal.kind == "number":
        return format_number(literal.value)
    if literal.kind == "bool":
        return "true" if literal.value else "false"
    return literal.value  # ident


def format_condition(cond: Condition) -> str:
    if isinstance(cond, BoolConst):
        return "true" if cond.value else "false"
    if isinstance(cond, ParamRef):
        return cond.name
    if isinstance(cond, Compare):
        return f"{cond.name} {cond.op} {format_literal(cond.literal)}"
    if isinstance(cond, Not):
        operand = format_condition(cond.operand)
        if _precedence(cond.operand) < _PREC_ATOM:
            operand = f"({operand})"
        return f"not {operand}"
    if isinstance(cond, (And, Or)):
        word = "and" if isinstance(cond, And) else "or"
        prec = _PREC_AND if isinstance(cond, And) else _PREC_OR
        left = format_condition(cond.left)
        if _precedence(cond.left) < prec:
            left = f"({left})"
        right = format_condition(cond.right)
        if _precedence(cond.right) <= prec:
            right = f"({right})"
        return f"{left} {word} {right}"
    raise TypeError(f"not a condition node: {cond!r}")


def format_action(action: Action) -> str:
    if isinstance(action, Advice):
        return f"advice {format_string(action.text)}"
    if isinstance(action, Goto):
        return f"goto {action.target}"
    if isinstance(action, SetParam):
        return f"set {action.name} := {format_literal(action.value)}"
    if isinstance(action, Stop):
        return "stop"
    raise TypeError(f"not an action node: {action!r}")


def _format_rule(rule: Rule) -> list[str]:
    if isinstance(rule.condition, BoolConst) and rule.condition.value:
        head = "always do"
    else:
        head = f"if {format_condition(rule.condition)} do"
    actions = [format_action(a) for a in rule.actions]
    if len(actions) == 1:
        return [f"  {head} {actions[0]}"]
    lines = [f"  {head}"]
    for action in actions[:-1]:
        lines.append(f"    {action},")
    lines.append(f"    {actions[-1]}")
    return lines


def _format_parameter(param: Parameter) -> list[str]:
    lines = [f"parameter {param.name}: {param.ptype}"]
    if param.question is not None:
        lines.append(f"  question {format_string(param.question)}")
    if param.values:
        lines.append(f"  values {', '.join(param.values)}")
    return lines


def _format_section(section: Section) -> list[str]:
    lines = [f"section {section.name} {{"]
    for rule in section.rules:
        lines.extend(_format_rule(rule))
    lines.append("}")
    return lines


def format_kb(kb: KnowledgeBase) -> str:
    """Render the canonical text form; empty KB renders as ""."""
    blocks: list[list[str]] = []
    if kb.title:
        blocks.append([f"title {format_string(kb.title)}"])
    for param in kb.parameters.values():
        blocks.append(_format_parameter(param))
    for section in kb.sections.values():
        blocks.append(_format_section(section))
    if not blocks:
        return ""
    return "\n\n".join("\n".join(block) for block in blocks) + "\n"
