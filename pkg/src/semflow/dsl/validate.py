"""Structural validation of pattern expressions.

Negation rules are enforced here, before compilation: every NOT must be
bounded by an enclosing WITHIN, must negate a plain event atom, must sit
in a sequence-element or WITHIN-child position, and must be preceded by
at least one mandatory consuming element so the absence interval has an
anchor. Violations are returned as values, not raised.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ast import (
    And,
    Atom,
    Not,
    OneOrMore,
    Optional,
    Or,
    PatternExpr,
    Seq,
    Times,
    Within,
    children_of,
    format_pattern,
    walk,
)

UNBOUNDED_NEGATION = "UnboundedNegation"
MISPLACED_NEGATION = "MisplacedNegation"
EMPTY_SEQ = "EmptySeq"
NON_ATOMIC_NEGATION = "NonAtomicNegation"
NESTED_UNBOUNDED_QUANTIFIER = "NestedUnboundedQuantifier"


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


@dataclass
class ValidationResult:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}


def min_consumed(expr: PatternExpr) -> int:
    """Lower bound on events any match of expr must consume."""
    if isinstance(expr, Atom):
        return 1
    if isinstance(expr, Seq):
        return sum(min_consumed(c) for c in expr.children)
    if isinstance(expr, And):
        return min_consumed(expr.left) + min_consumed(expr.right)
    if isinstance(expr, Or):
        return min(min_consumed(expr.left), min_consumed(expr.right))
    if isinstance(expr, Times):
        return expr.n * min_consumed(expr.child)
    if isinstance(expr, OneOrMore):
        return min_consumed(expr.child)
    if isinstance(expr, (Not, Optional)):
        return 0
    if isinstance(expr, Within):
        return min_consumed(expr.child)
    raise TypeError(f"not a pattern node: {expr!r}")


def validate_pattern(expr: PatternExpr) -> ValidationResult:
    result = ValidationResult()

    for node in walk(expr):
        if isinstance(node, Seq) and not node.children:
            result.violations.append(Violation(EMPTY_SEQ, "SEQ with no elements"))

    _check_negation_positions(expr, result)
    _check_negation_bounds(expr, result)
    _check_preceding_consumers(expr, False, result)
    _check_quantifier_nesting(expr, False, result)
    return result


def _check_negation_positions(expr: PatternExpr, result: ValidationResult) -> None:
    def visit(node: PatternExpr, parent: PatternExpr | None) -> None:
        if isinstance(node, Not):
            if not isinstance(parent, (Seq, Within)):
                result.violations.append(
                    Violation(
                        MISPLACED_NEGATION,
                        f"NOT must be a SEQ element or WITHIN child, "
                        f"found under {type(parent).__name__ if parent else 'top level'}",
                    )
                )
            if not isinstance(node.child, Atom):
                result.violations.append(
                    Violation(
                        NON_ATOMIC_NEGATION,
                        f"NOT must negate a single event type, got "
                        f"{format_pattern(node.child)}",
                    )
                )
        for child in children_of(node):
            visit(child, node)

    visit(expr, None)


def _check_negation_bounds(expr: PatternExpr, result: ValidationResult) -> None:
    def visit(node: PatternExpr, bounded: bool) -> None:
        if isinstance(node, Not) and not bounded:
            result.violations.append(
                Violation(
                    UNBOUNDED_NEGATION,
                    f"NOT({format_pattern(node.child)}) has no enclosing WITHIN",
                )
            )
        is_bound = bounded or isinstance(node, Within)
        for child in children_of(node):
            visit(child, is_bound)

    visit(expr, False)


def _check_preceding_consumers(
    expr: PatternExpr, preceded: bool, result: ValidationResult
) -> bool:
    """Return whether a mandatory consuming element exists after expr.

    Flags every NOT that can be reached with nothing consumed before it;
    such a negation would have no anchor event for its absence interval.
    """
    if isinstance(expr, Atom):
        return True
    if isinstance(expr, Not):
        if not preceded:
            result.violations.append(
                Violation(
                    MISPLACED_NEGATION,
                    f"NOT({format_pattern(expr.child)}) has no preceding "
                    "consuming element to anchor it",
                )
            )
        return preceded
    if isinstance(expr, Seq):
        p = preceded
        for child in expr.children:
            p = _check_preceding_consumers(child, p, result)
        return p
    if isinstance(expr, And):
        # both expansion orders must be anchored, so each side only gets
        # the precededness established outside the conjunction
        _check_preceding_consumers(expr.left, preceded, result)
        _check_preceding_consumers(expr.right, preceded, result)
        return preceded or min_consumed(expr) >= 1
    if isinstance(expr, Or):
        _check_preceding_consumers(expr.left, preceded, result)
        _check_preceding_consumers(expr.right, preceded, result)
        return preceded or min_consumed(expr) >= 1
    if isinstance(expr, (Times, OneOrMore)):
        _check_preceding_consumers(expr.child, preceded, result)
        return preceded or min_consumed(expr) >= 1
    if isinstance(expr, Optional):
        _check_preceding_consumers(expr.child, preceded, result)
        return preceded
    if isinstance(expr, Within):
        return _check_preceding_consumers(expr.child, preceded, result)
    raise TypeError(f"not a pattern node: {expr!r}")


def _check_quantifier_nesting(
    expr: PatternExpr, inside_unbounded: bool, result: ValidationResult
) -> None:
    if isinstance(expr, OneOrMore):
        if inside_unbounded:
            result.violations.append(
                Violation(
                    NESTED_UNBOUNDED_QUANTIFIER,
                    "ONE_OR_MORE nested inside ONE_OR_MORE is not supported",
                )
            )
        inside_unbounded = True
    for child in children_of(expr):
        _check_quantifier_nesting(child, inside_unbounded, result)
