"""Lexer and recursive-descent parser for the `.kb` knowledge-base DSL.

The surface syntax (EBNF; `#` starts a line comment, whitespace is free):

    kb        = { item } ;
    item      = "title" string
              | "parameter" ident ":" ptype [ "question" string ]
                                           [ "values" ident { "," ident } ]
              | "section" ident "{" { rule } "}" ;
    ptype     = "boolean" | "text" | "number" | "category" ;
    rule      = ( "if" condition | "always" ) "do" action { "," action } ;
    action    = "advice" string | "goto" ident | "set" ident ":=" literal
              | "stop" ;
    condition = conj { "or" conj } ;
    conj      = neg { "and" neg } ;
    neg       = [ "not" ] atom ;
    atom      = "true" | "false" | ident [ cmpop literal ] | "(" condition ")" ;
    cmpop     = "=" | "<>" | "<" | "<=" | ">" | ">=" ;
    literal   = string | number | ident | "true" | "false" ;

Parsing is total: any input yields a ParseResult whose knowledge base
holds every item that parsed cleanly, alongside positioned diagnostics
for everything that did not. Recovery is synchronize-to-top-level: a
syntax error drops the current item and scanning resumes at the next
`title`, `parameter`, or `section` keyword.

Diagnostic codes: E001 syntax error, E002 duplicate name, E010
unterminated string, E011 illegal character.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

from .model import (
    Action,
    Advice,
    And,
    BoolConst,
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
    Rule,
    Section,
    SetParam,
    Span,
    Stop,
)

KEYWORDS = frozenset(
    "title parameter question values section if always do advice goto set stop "
    "and or not true false boolean text number category".split()
)

ITEM_KEYWORDS = frozenset(("title", "parameter", "section"))

PUNCT = (":=", "<=", ">=", "<>", ":", ",", "{", "}", "(", ")", "=", "<", ">")

_STRING_ESCAPES = {'"': '"', "\\": "\\", "n": "\n"}


@dataclass(frozen=True)
class Token:
    """One lexeme with its kind and 1-based source position.

    `value` carries the decoded payload for string and number tokens;
    for everything else it equals the lexeme.
    """

    kind: str  # "keyword" | "ident" | "string" | "number" | "punct" | "eof"
    lexeme: str
    span: Span
    value: Union[str, float] = ""


@dataclass
class ParseResult:
    """A (possibly empty) knowledge base plus ordered diagnostics.

    Any error-severity diagnostic means the KB must not be consulted;
    the lint gate enforces that downstream.
    """

    kb: KnowledgeBase
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def has_errors(self) -> bool:
        return any(d.severity == "error" for d in self.diagnostics)


class KbSyntaxError(Exception):
    """Raised by the standalone condition parser; carries the Diagnostic."""

    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.render())
        self.diagnostic = diagnostic


def _error(code: str, message: str, span: Span) -> Diagnostic:
    return Diagnostic(severity="error", code=code, message=message, span=span)


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

def _is_digit(c: str) -> bool:
    return "0" <= c <= "9"


def tokenize(source: str) -> tuple[list[Token], list[Diagnostic]]:
    """Lex `source` into tokens, recovering from bad input.

    Unterminated strings (E010) and illegal characters (E011) produce
    diagnostics but never stop the scan; an unterminated string still
    yields a token holding what was read before the line or file ended.
    """
    tokens: list[Token] = []
    diagnostics: list[Diagnostic] = []
    i = 0
    line = 1
    col = 1
    n = len(source)

    def advance() -> str:
        nonlocal i, line, col
        c = source[i]
        i += 1
        if c == "\n":
            line += 1
            col = 1
        else:
            col += 1
        return c

    while i < n:
        c = source[i]
        start = Span(line, col)

        if c in " \t\r\n":
            advance()
            continue

        if c == "#":
            while i < n and source[i] != "\n":
                advance()
            continue

        if c == '"':
            start_i = i
            advance()
            parts: list[str] = []
            closed = False
            while i < n:
                if source[i] == "\n":
                    break
                ch = advance()
                if ch == '"':
                    closed = True
                    break
                if ch == "\\":
                    esc_span = Span(line, col - 1)
                    if i < n and source[i] != "\n":
                        esc = advance()
                        if esc in _STRING_ESCAPES:
                            parts.append(_STRING_ESCAPES[esc])
                        else:
                            diagnostics.append(_error(
                                "E011", f"illegal escape sequence '\\{esc}'", esc_span))
                            parts.append(esc)
                    else:
                        break
                else:
                    parts.append(ch)
            if not closed:
                diagnostics.append(_error("E010", "unterminated string", start))
            tokens.append(Token("string", source[start_i:i], start, value="".join(parts)))
            continue

        if c.isascii() and c.isalpha():
            parts = []
            while i < n and (source[i].isascii() and (source[i].isalnum() or source[i] == "_")):
                parts.append(advance())
            word = "".join(parts)
            kind = "keyword" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, start, value=word))
            continue

        # ASCII digits only: str.isdigit() accepts superscripts and other
        # Unicode digits that float() rejects.
        if _is_digit(c) or (c == "-" and i + 1 < n and _is_digit(source[i + 1])):
            parts = []
            if c == "-":
                parts.append(advance())
            while i < n and _is_digit(source[i]):
                parts.append(advance())
            if i + 1 < n and source[i] == "." and _is_digit(source[i + 1]):
                parts.append(advance())
                while i < n and _is_digit(source[i]):
                    parts.append(advance())
            if i < n and source[i] in "eE":
                # Exponent only counts if digits (with optional sign) follow.
                j = i + 1
                if j < n and source[j] in "+-":
                    j += 1
                if j < n and _is_digit(source[j]):
                    while i < j:
                        parts.append(advance())
                    while i < n and _is_digit(source[i]):
                        parts.append(advance())
            lexeme = "".join(parts)
            tokens.append(Token("number", lexeme, start, value=float(lexeme)))
            continue

        for punct in PUNCT:
            if source.startswith(punct, i):
                for _ in punct:
                    advance()
                tokens.append(Token("punct", punct, start, value=punct))
                break
        else:
            diagnostics.append(_error("E011", f"illegal character {c!r}", start))
            advance()

    tokens.append(Token("eof", "", Span(line, col)))
    return tokens, diagnostics


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _SyntaxError(Exception):
    """Internal unwind signal; converted to an E001 diagnostic."""

    def __init__(self, message: str, span: Span):
        super().__init__(message)
        self.diagnostic = _error("E001", message, span)


# Parentheses are the grammar's only recursion; cap them so arbitrary
# input cannot overflow the interpreter stack.
_MAX_CONDITION_DEPTH = 150


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.cond_depth = 0

    # -- token plumbing ----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "keyword" and tok.lexeme == word

    def at_punct(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "punct" and tok.lexeme == text

    def accept_keyword(self, word: str) -> Optional[Token]:
        if self.at_keyword(word):
            return self.next()
        return None

    def accept_punct(self, text: str) -> Optional[Token]:
        if self.at_punct(text):
            return self.next()
        return None

    def expect_punct(self, text: str) -> Token:
        tok = self.peek()
        if tok.kind == "punct" and tok.lexeme == text:
            return self.next()
        raise _SyntaxError(f"expected '{text}', found {_describe(tok)}", tok.span)

    def expect_ident(self, what: str) -> Token:
        tok = self.peek()
        if tok.kind == "ident":
            return self.next()
        raise _SyntaxError(f"expected {what}, found {_describe(tok)}", tok.span)

    def expect_string(self, what: str) -> Token:
        tok = self.peek()
        if tok.kind == "string":
            return self.next()
        raise _SyntaxError(f"expected {what}, found {_describe(tok)}", tok.span)

    def synchronize(self) -> None:
        """Skip ahead to the next top-level item keyword (or EOF)."""
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                return
            if tok.kind == "keyword" and tok.lexeme in ITEM_KEYWORDS:
                return
            self.next()

    # -- grammar ----------------------------------------------------------

    def parse_condition(self) -> Condition:
        left = self.parse_conj()
        while self.at_keyword("or"):
            op = self.next()
            right = self.parse_conj()
            left = Or(left, right, span=op.span)
        return left

    def parse_conj(self) -> Condition:
        left = self.parse_neg()
        while self.at_keyword("and"):
            op = self.next()
            right = self.parse_neg()
            left = And(left, right, span=op.span)
        return left

    def parse_neg(self) -> Condition:
        not_tok = self.accept_keyword("not")
        atom = self.parse_atom()
        if not_tok is not None:
            return Not(atom, span=not_tok.span)
        return atom

    def parse_atom(self) -> Condition:
        tok = self.peek()
        if self.accept_keyword("true"):
            return BoolConst(True, span=tok.span)
        if self.accept_keyword("false"):
            return BoolConst(False, span=tok.span)
        if self.accept_punct("("):
            if self.cond_depth >= _MAX_CONDITION_DEPTH:
                raise _SyntaxError("condition nesting too deep", tok.span)
            self.cond_depth += 1
            try:
                inner = self.parse_condition()
            finally:
                self.cond_depth -= 1
            self.expect_punct(")")
            return inner
        if tok.kind == "ident":
            self.next()
            for op in ("<=", ">=", "<>", "=", "<", ">"):
                if self.at_punct(op):
                    self.next()
                    literal = self.parse_literal()
                    return Compare(tok.lexeme, op, literal, span=tok.span)
            return ParamRef(tok.lexeme, span=tok.span)
        raise _SyntaxError(f"expected condition, found {_describe(tok)}", tok.span)

    def parse_literal(self) -> Literal:
        tok = self.peek()
        if tok.kind == "string":
            self.next()
            return Literal("text", tok.value, span=tok.span)
        if tok.kind == "number":
            self.next()
            if math.isinf(tok.value):
                raise _SyntaxError("number literal out of range", tok.span)
            return Literal("number", tok.value, span=tok.span)
        if tok.kind == "ident":
            self.next()
            return Literal("ident", tok.lexeme, span=tok.span)
        if self.accept_keyword("true"):
            return Literal("bool", True, span=tok.span)
        if self.accept_keyword("false"):
            return Literal("bool", False, span=tok.span)
        raise _SyntaxError(f"expected literal, found {_describe(tok)}", tok.span)

    def parse_action(self) -> Action:
        tok = self.peek()
        if self.accept_keyword("advice"):
            text = self.expect_string("advice text")
            if text.value == "":
                raise _SyntaxError("advice text must be non-empty", text.span)
            return Advice(text.value, span=tok.span)
        if self.accept_keyword("goto"):
            target = self.expect_ident("section name")
            return Goto(target.lexeme, span=target.span)
        if self.accept_keyword("set"):
            name = self.expect_ident("parameter name")
            self.expect_punct(":=")
            literal = self.parse_literal()
            return SetParam(name.lexeme, literal, span=name.span)
        if self.accept_keyword("stop"):
            return Stop(span=tok.span)
        raise _SyntaxError(f"expected action, found {_describe(tok)}", tok.span)

    def parse_rule(self) -> Rule:
        tok = self.peek()
        if self.accept_keyword("always"):
            condition: Condition = BoolConst(True, span=tok.span)
        elif self.accept_keyword("if"):
            condition = self.parse_condition()
        else:
            raise _SyntaxError(f"expected rule, found {_describe(tok)}", tok.span)
        do_tok = self.peek()
        if self.accept_keyword("do") is None:
            raise _SyntaxError(f"expected 'do', found {_describe(do_tok)}", do_tok.span)
        actions = [self.parse_action()]
        while self.accept_punct(","):
            actions.append(self.parse_action())
        return Rule(condition, tuple(actions), span=tok.span)

    def parse_section(self) -> Section:
        self.next()  # "section" keyword
        name = self.expect_ident("section name")
        self.expect_punct("{")
        rules: list[Rule] = []
        while not self.at_punct("}"):
            tok = self.peek()
            if tok.kind == "eof":
                raise _SyntaxError("expected '}' before end of input", tok.span)
            rules.append(self.parse_rule())
        self.expect_punct("}")
        return Section(name.lexeme, tuple(rules), span=name.span)

    def parse_parameter(self) -> Parameter:
        self.next()  # "parameter" keyword
        name = self.expect_ident("parameter name")
        self.expect_punct(":")
        ptype_tok = self.peek()
        ptype = None
        for candidate in ("boolean", "text", "number", "category"):
            if self.accept_keyword(candidate):
                ptype = candidate
                break
        if ptype is None:
            raise _SyntaxError(
                f"expected parameter type, found {_describe(ptype_tok)}", ptype_tok.span)
        question = None
        if self.accept_keyword("question"):
            question = self.expect_string("question text").value
        values: list[str] = []
        values_tok = None
        if self.at_keyword("values"):
            values_tok = self.next()
            first = self.expect_ident("value name")
            values.append(first.lexeme)
            while self.accept_punct(","):
                value = self.expect_ident("value name")
                if value.lexeme in values:
                    raise _SyntaxError(f"duplicate value '{value.lexeme}'", value.span)
                values.append(value.lexeme)
        if ptype == "category" and not values:
            raise _SyntaxError(
                f"category parameter '{name.lexeme}' needs a values list", name.span)
        if ptype != "category" and values_tok is not None:
            raise _SyntaxError(
                f"only category parameters declare values, '{name.lexeme}' is {ptype}",
                values_tok.span)
        return Parameter(name.lexeme, ptype, question, tuple(values), span=name.span)


def _describe(tok: Token) -> str:
    if tok.kind == "eof":
        return "end of input"
    if tok.kind == "string":
        return "string"
    return f"'{tok.lexeme}'"


def parse_kb(source: str) -> ParseResult:
    """Parse a whole `.kb` document; never raises on bad input."""
    tokens, diagnostics = tokenize(source)
    parser = _Parser(tokens)
    title = ""
    parameters: dict[str, Parameter] = {}
    sections: dict[str, Section] = {}

    def defined(name: str) -> bool:
        return name in parameters or name in sections

    while True:
        tok = parser.peek()
        if tok.kind == "eof":
            break
        try:
            if parser.at_keyword("title"):
                parser.next()
                title = parser.expect_string("title text").value
            elif parser.at_keyword("parameter"):
                param = parser.parse_parameter()
                if defined(param.name):
                    diagnostics.append(_error(
                        "E002", f"duplicate name '{param.name}'", param.span))
                else:
                    parameters[param.name] = param
            elif parser.at_keyword("section"):
                section = parser.parse_section()
                if defined(section.name):
                    diagnostics.append(_error(
                        "E002", f"duplicate name '{section.name}'", section.span))
                else:
                    sections[section.name] = section
            else:
                raise _SyntaxError(
                    f"expected 'title', 'parameter', or 'section', found {_describe(tok)}",
                    tok.span)
        except _SyntaxError as err:
            diagnostics.append(err.diagnostic)
            parser.synchronize()

    kb = KnowledgeBase(title=title, parameters=parameters, sections=sections)
    return ParseResult(kb=kb, diagnostics=diagnostics)


def parse_condition(source: str) -> Condition:
    """Parse a standalone condition; the whole input must be consumed.

    Raises KbSyntaxError carrying the first offending diagnostic.
    """
    tokens, diagnostics = tokenize(source)
    for diag in diagnostics:
        raise KbSyntaxError(diag)
    parser = _Parser(tokens)
    try:
        condition = parser.parse_condition()
    except _SyntaxError as err:
        raise KbSyntaxError(err.diagnostic) from None
    trailing = parser.peek()
    if trailing.kind != "eof":
        raise KbSyntaxError(_error(
            "E001", f"unexpected {_describe(trailing)} after condition", trailing.span))
    return condition
