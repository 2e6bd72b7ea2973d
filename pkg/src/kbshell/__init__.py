"""kbshell: an expert-system shell around a small knowledge-base DSL.

Parse `.kb` files into an immutable model, lint them, and run
backward-chaining consultations interactively, scripted, over HTTP, or
from the bundled Sanjeevani knowledge base.
"""

from .builtin import SANJEEVANI, TREATMENT_SECTIONS, builtin_kb, builtin_source
from .cli import run_cli
from .engine import (
    InvalidAnswer,
    LintGateFailed,
    Question,
    Session,
    SessionFinishedError,
    Unknown,
    evaluate_condition,
    render_transcript,
    run_scripted,
    start_session,
)
from .formatter import format_condition, format_kb
from .lint import Finding, lint, reachable_sections
from .model import (
    Action,
    Advice,
    And,
    BoolConst,
    Compare,
    Condition,
    Diagnostic,
    DuplicateNameError,
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
from .parser import KbSyntaxError, ParseResult, Token, parse_condition, parse_kb, tokenize

__version__ = "0.1.0"
