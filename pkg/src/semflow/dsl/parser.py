"""Recursive-descent parser for pattern expressions.

Grammar (keywords case-insensitive):

    expr     := SEQ(expr, expr*) | AND(expr, expr) | OR(expr, expr)
              | NOT(expr) | TIMES(expr, int) | ONE_OR_MORE(expr)
              | OPTIONAL(expr) | WITHIN(expr, duration)
              | ident guard?
    duration := int ("s" | "min" | "h" | "days")
    guard    := "{" clause ("," clause)* "}"
    clause   := key "=" literal | key "!=" literal | key contains literal
"""

from __future__ import annotations

import re

from ..errors import DurationError, PatternSyntaxError
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
    SECONDS_PER_UNIT,
    Times,
    Within,
)

_KEYWORDS = {"SEQ", "AND", "OR", "NOT", "TIMES", "ONE_OR_MORE", "OPTIONAL", "WITHIN"}
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT_RE = re.compile(r"-?\d+")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str) -> PatternSyntaxError:
        return PatternSyntaxError(message, self.pos)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def eof(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def expect(self, token: str) -> None:
        self.skip_ws()
        if not self.text.startswith(token, self.pos):
            raise self.error(f"expected {token!r}")
        self.pos += len(token)

    def ident(self) -> str:
        self.skip_ws()
        m = _IDENT_RE.match(self.text, self.pos)
        if m is None:
            raise self.error("expected identifier")
        self.pos = m.end()
        return m.group()

    def integer(self) -> int:
        self.skip_ws()
        m = _INT_RE.match(self.text, self.pos)
        if m is None:
            raise self.error("expected integer")
        self.pos = m.end()
        return int(m.group())

    def parse_expr(self) -> PatternExpr:
        self.skip_ws()
        start = self.pos
        name = self.ident()
        keyword = name.upper()
        if keyword in _KEYWORDS:
            return self.parse_construct(keyword)
        # plain event atom, optionally guarded
        self.pos = start
        return self.parse_atom()

    def parse_construct(self, keyword: str) -> PatternExpr:
        self.expect("(")
        if keyword == "SEQ":
            children = [self.parse_expr()]
            while self.peek_comma():
                children.append(self.parse_expr())
            self.expect(")")
            return Seq(tuple(children))
        if keyword in ("AND", "OR"):
            left = self.parse_expr()
            self.expect(",")
            right = self.parse_expr()
            self.expect(")")
            return And(left, right) if keyword == "AND" else Or(left, right)
        if keyword == "NOT":
            child = self.parse_expr()
            self.expect(")")
            return Not(child)
        if keyword == "TIMES":
            child = self.parse_expr()
            self.expect(",")
            self.skip_ws()
            n = self.integer()
            if n < 1:
                raise self.error("TIMES count must be >= 1")
            self.expect(")")
            return Times(child, n)
        if keyword == "ONE_OR_MORE":
            child = self.parse_expr()
            self.expect(")")
            return OneOrMore(child)
        if keyword == "OPTIONAL":
            child = self.parse_expr()
            self.expect(")")
            return Optional(child)
        if keyword == "WITHIN":
            child = self.parse_expr()
            self.expect(",")
            delta = self.parse_duration()
            self.expect(")")
            return Within(child, delta)
        raise self.error(f"unknown construct {keyword}")  # pragma: no cover

    def peek_comma(self) -> bool:
        self.skip_ws()
        if self.pos < len(self.text) and self.text[self.pos] == ",":
            self.pos += 1
            return True
        return False

    def parse_duration(self) -> int:
        self.skip_ws()
        value = self.integer()
        self.skip_ws()
        m = _IDENT_RE.match(self.text, self.pos)
        if m is None:
            raise self.error("expected duration unit")
        unit = m.group().lower()
        if unit not in SECONDS_PER_UNIT:
            raise self.error(f"unknown duration unit {m.group()!r}")
        self.pos = m.end()
        seconds = value * SECONDS_PER_UNIT[unit]
        if seconds <= 0:
            raise DurationError(f"duration must be positive, got {value} {unit}")
        return seconds

    def parse_atom(self) -> Atom:
        name = self.ident()
        guard = None
        self.skip_ws()
        if self.pos < len(self.text) and self.text[self.pos] == "{":
            guard = self.parse_guard()
        return Atom(name, guard)

    def parse_guard(self) -> GuardPredicate:
        self.expect("{")
        clauses = [self.parse_clause()]
        while self.peek_comma():
            clauses.append(self.parse_clause())
        self.expect("}")
        return GuardPredicate(tuple(clauses))

    def parse_clause(self) -> GuardClause:
        key = self.ident()
        self.skip_ws()
        if self.text.startswith("!=", self.pos):
            self.pos += 2
            op = "!="
        elif self.text.startswith("=", self.pos):
            self.pos += 1
            op = "="
        else:
            word = self.ident()
            if word.lower() != "contains":
                raise self.error("expected '=', '!=' or 'contains'")
            op = "contains"
        literal = self.parse_literal()
        return GuardClause(key, op, literal)

    def parse_literal(self) -> str:
        self.skip_ws()
        if self.pos < len(self.text) and self.text[self.pos] == '"':
            end = self.text.find('"', self.pos + 1)
            if end < 0:
                raise self.error("unterminated string literal")
            literal = self.text[self.pos + 1 : end]
            self.pos = end + 1
            return literal
        m = re.compile(r"[A-Za-z0-9_.-]+").match(self.text, self.pos)
        if m is None:
            raise self.error("expected literal")
        self.pos = m.end()
        return m.group()


def parse_pattern(text: str) -> PatternExpr:
    """Parse pattern text into an AST; raises PatternSyntaxError / DurationError."""
    parser = _Parser(text)
    expr = parser.parse_expr()
    if not parser.eof():
        raise parser.error("unexpected trailing input")
    return expr
