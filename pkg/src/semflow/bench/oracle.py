"""Brute-force pattern matching by exhaustive enumeration.

This is the independent ground truth the NFA matcher is checked against.
It never looks at the compiled automaton: candidates are enumerated
directly from the expression tree and filtered by the declarative rules
(ordering by (timestamp, arrival) with strict tie-break, window span over
consumed events, negation forbidden strictly between its anchor and the
next consumed event and never later than anchor + bound, with the bound
taken from the nearest enclosing WITHIN). Watermark is +infinity: the
whole finite stream is known.

Hard limits keep the enumeration tractable; inputs beyond them raise
OracleLimitError.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..dsl.ast import (
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
)
from ..dsl.validate import validate_pattern
from ..errors import OracleLimitError
from ..events import SemanticEvent

MAX_EVENTS = 12
MAX_DEPTH = 6

Key = tuple  # (timestamp, position)


def _cond_matches(atom: Atom, event: SemanticEvent) -> bool:
    # deliberately re-implemented here: the oracle shares nothing with
    # the compiled-NFA execution path
    if event.event_type != atom.event_type:
        return False
    if atom.guard is None:
        return True
    for clause in atom.guard.clauses:
        value = event.attrs.get(clause.attr_key)
        if value is None:
            return False
        if clause.op == "=" and value != clause.literal:
            return False
        if clause.op == "!=" and value == clause.literal:
            return False
        if clause.op == "contains" and clause.literal not in value:
            return False
    return True


@dataclass(frozen=True)
class _Neg:
    atom: Atom
    prev: tuple | None  # (ts, key) of anchor event, None while unresolved
    next_key: Key | None  # key of first consumed event after the NOT
    bound: int | None  # seconds; set by the nearest enclosing WITHIN


@dataclass(frozen=True)
class _Cand:
    consumed: tuple  # ((event, key), ...) in key order
    negs: tuple  # (_Neg, ...)


def _depth(expr: PatternExpr) -> int:
    kids = children_of(expr)
    if not kids:
        return 1
    return 1 + max(_depth(c) for c in kids)


def _combine(left: list[_Cand], right: list[_Cand]) -> list[_Cand]:
    out = []
    for lc in left:
        for rc in right:
            if lc.consumed and rc.consumed and not (lc.consumed[-1][1] < rc.consumed[0][1]):
                continue
            negs = []
            for neg in lc.negs:
                if neg.next_key is None and rc.consumed:
                    negs.append(
                        _Neg(neg.atom, neg.prev, rc.consumed[0][1], neg.bound)
                    )
                else:
                    negs.append(neg)
            for neg in rc.negs:
                if neg.prev is None and lc.consumed:
                    ev, key = lc.consumed[-1]
                    negs.append(_Neg(neg.atom, (ev.timestamp, key), neg.next_key, neg.bound))
                else:
                    negs.append(neg)
            out.append(_Cand(lc.consumed + rc.consumed, tuple(negs)))
    return out


def _candidates(expr: PatternExpr, events: list) -> list[_Cand]:
    if isinstance(expr, Atom):
        return [
            _Cand(((ev, key),), ())
            for ev, key in events
            if _cond_matches(expr, ev)
        ]
    if isinstance(expr, Seq):
        acc = [_Cand((), ())]
        for child in expr.children:
            acc = _combine(acc, _candidates(child, events))
        return acc
    if isinstance(expr, Or):
        return _candidates(expr.left, events) + _candidates(expr.right, events)
    if isinstance(expr, And):
        return _candidates(Seq((expr.left, expr.right)), events) + _candidates(
            Seq((expr.right, expr.left)), events
        )
    if isinstance(expr, Times):
        acc = [_Cand((), ())]
        for _ in range(expr.n):
            acc = _combine(acc, _candidates(expr.child, events))
        return acc
    if isinstance(expr, OneOrMore):
        reps = _candidates(expr.child, events)
        acc = list(dict.fromkeys(reps))
        out = list(acc)
        for _ in range(max(0, len(events) - 1)):
            acc = list(dict.fromkeys(_combine(acc, reps)))
            if not acc:
                break
            out.extend(acc)
        return list(dict.fromkeys(out))
    if isinstance(expr, Optional):
        return _candidates(expr.child, events) + [_Cand((), ())]
    if isinstance(expr, Within):
        out = []
        for cand in _candidates(expr.child, events):
            if cand.consumed:
                span = cand.consumed[-1][0].timestamp - cand.consumed[0][0].timestamp
                if span > expr.delta_t:
                    continue
            negs = tuple(
                _Neg(n.atom, n.prev, n.next_key, expr.delta_t) if n.bound is None else n
                for n in cand.negs
            )
            out.append(_Cand(cand.consumed, negs))
        return out
    if isinstance(expr, Not):
        if not isinstance(expr.child, Atom):
            raise ValueError("NOT must negate an atom")
        return [_Cand((), (_Neg(expr.child, None, None, None),))]
    raise TypeError(f"not a pattern node: {expr!r}")


def _neg_violated(neg: _Neg, events: list) -> bool:
    assert neg.prev is not None and neg.bound is not None, (
        "unanchored or unbounded negation survived validation"
    )
    prev_ts, prev_key = neg.prev
    for ev, key in events:
        if key <= prev_key:
            continue
        if neg.next_key is not None and not (key < neg.next_key):
            continue
        if ev.timestamp > prev_ts + neg.bound:
            continue
        if _cond_matches(neg.atom, ev):
            return True
    return False


def oracle_match(expr: PatternExpr, events: list[SemanticEvent]) -> set[tuple[str, ...]]:
    """All matches of expr over one entity's sorted event list, as a set
    of event-id tuples (stream order)."""
    if len(events) > MAX_EVENTS:
        raise OracleLimitError(f"oracle handles at most {MAX_EVENTS} events, got {len(events)}")
    if _depth(expr) > MAX_DEPTH:
        raise OracleLimitError(f"oracle handles pattern depth <= {MAX_DEPTH}")
    result = validate_pattern(expr)
    if not result.ok:
        raise ValueError(f"pattern invalid: {[v.code for v in result.violations]}")

    keyed = [(ev, (ev.timestamp, i)) for i, ev in enumerate(events)]
    matches: set[tuple[str, ...]] = set()
    for cand in _candidates(expr, keyed):
        if not cand.consumed:
            continue  # matches never consume zero events
        if any(_neg_violated(neg, keyed) for neg in cand.negs):
            continue
        matches.add(tuple(ev.event_id for ev, _ in cand.consumed))
    return matches
