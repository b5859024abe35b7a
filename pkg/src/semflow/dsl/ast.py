"""Pattern expression AST and canonical text rendering.

Durations are normalized to integer seconds when nodes are built; "days"
means 86400 s. All nodes are frozen, so structural equality works for
round-trip checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

GUARD_OPS = ("=", "!=", "contains")

SECONDS_PER_UNIT = {
    "s": 1,
    "min": 60,
    "h": 3600,
    "days": 86400,
}


@dataclass(frozen=True)
class GuardClause:
    attr_key: str
    op: str  # one of GUARD_OPS
    literal: str


@dataclass(frozen=True)
class GuardPredicate:
    """Conjunction of attribute clauses; an absent key never matches."""

    clauses: tuple[GuardClause, ...]

    def matches(self, attrs: dict[str, str]) -> bool:
        for c in self.clauses:
            value = attrs.get(c.attr_key)
            if value is None:
                return False
            if c.op == "=" and value != c.literal:
                return False
            if c.op == "!=" and value == c.literal:
                return False
            if c.op == "contains" and c.literal not in value:
                return False
        return True


class PatternExpr:
    """Base class for pattern AST nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Atom(PatternExpr):
    event_type: str
    guard: GuardPredicate | None = None


@dataclass(frozen=True)
class Seq(PatternExpr):
    children: tuple[PatternExpr, ...]


@dataclass(frozen=True)
class And(PatternExpr):
    left: PatternExpr
    right: PatternExpr


@dataclass(frozen=True)
class Or(PatternExpr):
    left: PatternExpr
    right: PatternExpr


@dataclass(frozen=True)
class Not(PatternExpr):
    child: PatternExpr


@dataclass(frozen=True)
class Times(PatternExpr):
    child: PatternExpr
    n: int


@dataclass(frozen=True)
class OneOrMore(PatternExpr):
    child: PatternExpr


@dataclass(frozen=True)
class Optional(PatternExpr):
    child: PatternExpr


@dataclass(frozen=True)
class Within(PatternExpr):
    child: PatternExpr
    delta_t: int  # seconds, > 0


def seq(*children: PatternExpr) -> Seq:
    return Seq(tuple(children))


def format_duration(seconds: int) -> str:
    """Render seconds using the largest unit that divides evenly."""
    for unit in ("days", "h", "min"):
        size = SECONDS_PER_UNIT[unit]
        if seconds % size == 0 and seconds >= size:
            return f"{seconds // size} {unit}"
    return f"{seconds} s"


def _format_guard(guard: GuardPredicate) -> str:
    parts = []
    for c in guard.clauses:
        if c.op == "contains":
            parts.append(f'{c.attr_key} contains "{c.literal}"')
        else:
            parts.append(f'{c.attr_key}{c.op}"{c.literal}"')
    return "{" + ", ".join(parts) + "}"


def format_pattern(expr: PatternExpr) -> str:
    """Canonical text form; parse_pattern(format_pattern(e)) == e structurally."""
    if isinstance(expr, Atom):
        text = expr.event_type
        if expr.guard is not None:
            text += _format_guard(expr.guard)
        return text
    if isinstance(expr, Seq):
        return "SEQ(" + ", ".join(format_pattern(c) for c in expr.children) + ")"
    if isinstance(expr, And):
        return f"AND({format_pattern(expr.left)}, {format_pattern(expr.right)})"
    if isinstance(expr, Or):
        return f"OR({format_pattern(expr.left)}, {format_pattern(expr.right)})"
    if isinstance(expr, Not):
        return f"NOT({format_pattern(expr.child)})"
    if isinstance(expr, Times):
        return f"TIMES({format_pattern(expr.child)}, {expr.n})"
    if isinstance(expr, OneOrMore):
        return f"ONE_OR_MORE({format_pattern(expr.child)})"
    if isinstance(expr, Optional):
        return f"OPTIONAL({format_pattern(expr.child)})"
    if isinstance(expr, Within):
        return f"WITHIN({format_pattern(expr.child)}, {format_duration(expr.delta_t)})"
    raise TypeError(f"not a pattern node: {expr!r}")


def children_of(expr: PatternExpr) -> tuple[PatternExpr, ...]:
    if isinstance(expr, Seq):
        return expr.children
    if isinstance(expr, (And, Or)):
        return (expr.left, expr.right)
    if isinstance(expr, (Not, Times, OneOrMore, Optional, Within)):
        return (expr.child,)
    return ()


def walk(expr: PatternExpr):
    """Yield every node of the tree, pre-order."""
    yield expr
    for child in children_of(expr):
        yield from walk(child)
