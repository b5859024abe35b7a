from .compile import EventCondition, NegGuard, Nfa, compile_pattern, emit_dot
from .matcher import DEFAULT_INSTANCE_CAP, Matcher, PatternMatch

__all__ = [
    "EventCondition",
    "NegGuard",
    "Nfa",
    "compile_pattern",
    "emit_dot",
    "Matcher",
    "PatternMatch",
    "DEFAULT_INSTANCE_CAP",
]
