"""In-memory representation of a knowledge base.

A knowledge base is a title plus two ordered name->object maps: typed
parameters (the variables a consultation may ask the user about) and
sections (ordered lists of if-do rules). Everything here is immutable
after construction; the parser, linter, and engine all consume these
types and never mutate them.

Spans are carried for diagnostics only and are excluded from equality,
so two structurally identical knowledge bases compare equal no matter
where in a source file they came from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

IDENT_FIRST = frozenset("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz")
IDENT_REST = IDENT_FIRST | frozenset("0123456789_")

PARAMETER_TYPES = ("boolean", "text", "number", "category")

COMPARE_OPS = ("=", "<>", "<", "<=", ">", ">=")
ORDERING_OPS = frozenset(("<", "<=", ">", ">="))

START_SECTION = "start"


def is_identifier(text: str) -> bool:
    """Case-sensitive ASCII identifier: [A-Za-z][A-Za-z0-9_]*."""
    if not text or text[0] not in IDENT_FIRST:
        return False
    return all(c in IDENT_REST for c in text[1:])


@dataclass(frozen=True, order=True)
class Span:
    """1-based (line, column) of the token a node or diagnostic points at."""

    line: int = 1
    col: int = 1

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


# Default span for nodes built in memory rather than parsed from text.
NO_SPAN = Span(1, 1)


@dataclass(frozen=True)
class Diagnostic:
    """A positioned parse- or lint-level message with a stable code."""

    severity: str  # "error" | "warning"
    code: str      # fixed-width tag, e.g. "E010"
    message: str
    span: Span

    def render(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.span}: {self.code} {self.message}"


class DuplicateNameError(ValueError):
    """Raised when a knowledge base would contain two items of one name."""

    def __init__(self, name: str, span: Span):
        super().__init__(f"duplicate name '{name}' at {span}")
        self.name = name
        self.span = span


# ---------------------------------------------------------------------------
# Literals and conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Literal:
    """A literal value: kind is "text", "number", "ident", or "bool".

    Number payloads are binary64 floats and must be finite; "ident"
    literals name category values.
    """

    kind: str
    value: Union[str, float, bool]
    span: Span = field(default=NO_SPAN, compare=False)

    def __post_init__(self):
        if self.kind == "number" and not math.isfinite(self.value):
            raise ValueError("number literal must be finite")


class Condition:
    """Base class for condition AST nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class BoolConst(Condition):
    """The condition literal `true` or `false`."""

    value: bool
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class ParamRef(Condition):
    """A bare reference to a boolean parameter."""

    name: str
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class Compare(Condition):
    """`name op literal`; op is one of = <> < <= > >=."""

    name: str
    op: str
    literal: Literal
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class Not(Condition):
    operand: Condition
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class And(Condition):
    left: Condition
    right: Condition
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class Or(Condition):
    left: Condition
    right: Condition
    span: Span = field(default=NO_SPAN, compare=False)


TRUE = BoolConst(True)
FALSE = BoolConst(False)


# ---------------------------------------------------------------------------
# Actions and rules
# ---------------------------------------------------------------------------

class Action:
    """Base class for rule actions."""

    __slots__ = ()


@dataclass(frozen=True)
class Advice(Action):
    """Emit a piece of advice text to the user. Text is non-empty."""

    text: str
    span: Span = field(default=NO_SPAN, compare=False)

    def __post_init__(self):
        if not self.text:
            raise ValueError("advice text must be non-empty")


@dataclass(frozen=True)
class Goto(Action):
    """Enter another section; control returns here when it is exhausted."""

    target: str
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class SetParam(Action):
    """Bind a parameter to a literal value, overwriting any prior binding."""

    name: str
    value: Literal
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class Stop(Action):
    """Finish the consultation immediately."""

    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class Rule:
    """An if-do pair: a condition guarding a non-empty action list.

    Unconditional rules carry the literal `true` condition.
    """

    condition: Condition
    actions: tuple[Action, ...]
    span: Span = field(default=NO_SPAN, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))
        if not self.actions:
            raise ValueError("rule must have at least one action")


@dataclass(frozen=True)
class Section:
    """A named, ordered list of rules. The rule list may be empty."""

    name: str
    rules: tuple[Rule, ...] = ()
    span: Span = field(default=NO_SPAN, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))


@dataclass(frozen=True)
class Parameter:
    """A typed variable the consultation can ask about.

    `values` is the declared value list for category parameters and must
    be empty for every other type. `question` is the prompt shown when
    the engine needs this parameter's value.
    """

    name: str
    ptype: str
    question: Optional[str] = None
    values: tuple[str, ...] = ()
    span: Span = field(default=NO_SPAN, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if self.ptype not in PARAMETER_TYPES:
            raise ValueError(f"unknown parameter type {self.ptype!r}")
        if self.ptype == "category":
            if not self.values:
                raise ValueError("category parameter needs at least one value")
            if len(set(self.values)) != len(self.values):
                raise ValueError("category values must be unique")
        elif self.values:
            raise ValueError(f"{self.ptype} parameter cannot declare values")


# ---------------------------------------------------------------------------
# The knowledge base itself
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KnowledgeBase:
    """Title + parameters + sections; the unit of parsing and consulting.

    Build one with :meth:`build`, which rejects duplicate names. The
    direct constructor accepts prebuilt maps (keyed by item name) and
    re-validates the invariants, so a well-formed instance cannot hold
    a duplicate or a name shared between a parameter and a section.
    """

    title: str
    parameters: dict[str, Parameter]
    sections: dict[str, Section]

    def __post_init__(self):
        for name, param in self.parameters.items():
            if name != param.name:
                raise ValueError(f"parameter map key {name!r} != name {param.name!r}")
        for name, section in self.sections.items():
            if name != section.name:
                raise ValueError(f"section map key {name!r} != name {section.name!r}")
        for name in self.parameters.keys() & self.sections.keys():
            raise DuplicateNameError(name, self.sections[name].span)

    @classmethod
    def build(
        cls,
        title: str = "",
        parameters: Iterable[Parameter] = (),
        sections: Iterable[Section] = (),
    ) -> "KnowledgeBase":
        """Construct from item lists, rejecting any duplicated name."""
        params: dict[str, Parameter] = {}
        secs: dict[str, Section] = {}
        for param in parameters:
            if param.name in params:
                raise DuplicateNameError(param.name, param.span)
            params[param.name] = param
        for section in sections:
            if section.name in secs or section.name in params:
                raise DuplicateNameError(section.name, section.span)
            secs[section.name] = section
        return cls(title=title, parameters=params, sections=secs)

    def lookup_parameter(self, name: str) -> Optional[Parameter]:
        """Exact, case-sensitive lookup; None when undefined."""
        return self.parameters.get(name)

    def lookup_section(self, name: str) -> Optional[Section]:
        """Exact, case-sensitive lookup; None when undefined."""
        return self.sections.get(name)


EMPTY_KB = KnowledgeBase(title="", parameters={}, sections={})
