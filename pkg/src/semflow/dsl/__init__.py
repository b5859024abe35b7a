from .ast import (
    And,
    Atom,
    GuardClause,
    GuardPredicate,
    Not,
    OneOrMore,
    Optional,
    Or,
    PatternExpr,
    Seq,
    Times,
    Within,
    format_pattern,
    seq,
)
from .parser import parse_pattern
from .validate import ValidationResult, Violation, validate_pattern

__all__ = [
    "And",
    "Atom",
    "GuardClause",
    "GuardPredicate",
    "Not",
    "OneOrMore",
    "Optional",
    "Or",
    "PatternExpr",
    "Seq",
    "Times",
    "Within",
    "format_pattern",
    "parse_pattern",
    "seq",
    "validate_pattern",
    "ValidationResult",
    "Violation",
]
