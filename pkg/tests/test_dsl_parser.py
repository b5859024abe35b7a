import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semflow.dsl import (
    And,
    Atom,
    GuardClause,
    GuardPredicate,
    Not,
    OneOrMore,
    Optional,
    Or,
    Seq,
    Times,
    Within,
    format_pattern,
    parse_pattern,
)
from semflow.errors import DurationError, PatternSyntaxError


def test_paper_discharge_pattern():
    expr = parse_pattern("SEQ(Discharge, WITHIN(NOT(FollowUp), 30 days))")
    assert expr == Seq(
        (
            Atom("Discharge"),
            Within(Not(Atom("FollowUp")), 30 * 86400),
        )
    )
    assert expr.children[1].delta_t == 2_592_000


def test_within_seq_with_negation():
    expr = parse_pattern("WITHIN(SEQ(A, NOT(B)), 10 s)")
    assert expr == Within(Seq((Atom("A"), Not(Atom("B")))), 10)


def test_unbalanced_input_reports_offset():
    with pytest.raises(PatternSyntaxError) as excinfo:
        parse_pattern("SEQ(A,")
    assert excinfo.value.offset == len("SEQ(A,")


def test_trailing_garbage_rejected():
    with pytest.raises(PatternSyntaxError):
        parse_pattern("SEQ(A, B) extra")


def test_zero_duration_is_duration_error():
    with pytest.raises(DurationError):
        parse_pattern("WITHIN(A, 0 s)")
    with pytest.raises(DurationError):
        parse_pattern("WITHIN(A, -5 min)")


def test_times_count_must_be_positive():
    with pytest.raises(PatternSyntaxError):
        parse_pattern("TIMES(A, 0)")


def test_duration_units():
    assert parse_pattern("WITHIN(A, 90 s)").delta_t == 90
    assert parse_pattern("WITHIN(A, 5 min)").delta_t == 300
    assert parse_pattern("WITHIN(A, 2 h)").delta_t == 7200
    assert parse_pattern("WITHIN(A, 1 days)").delta_t == 86400


def test_keywords_case_insensitive():
    assert parse_pattern("seq(a, b)") == Seq((Atom("a"), Atom("b")))
    assert parse_pattern("within(A, 10 S)") == Within(Atom("A"), 10)


def test_guard_parsing():
    expr = parse_pattern('Admit{ward="icu", source!="transfer", note contains "sepsis"}')
    assert expr == Atom(
        "Admit",
        GuardPredicate(
            (
                GuardClause("ward", "=", "icu"),
                GuardClause("source", "!=", "transfer"),
                GuardClause("note", "contains", "sepsis"),
            )
        ),
    )


def test_format_simple():
    assert format_pattern(Seq((Atom("A"), Atom("B")))) == "SEQ(A, B)"
    assert format_pattern(Times(Atom("A"), 2)) == "TIMES(A, 2)"
    assert format_pattern(Within(Not(Atom("B")), 30 * 86400)) == "WITHIN(NOT(B), 30 days)"


def test_paper_pattern_round_trips():
    text = "SEQ(Discharge, WITHIN(NOT(FollowUp), 30 days))"
    expr = parse_pattern(text)
    assert parse_pattern(format_pattern(expr)) == expr


_event_types = st.sampled_from(["A", "B", "C", "Discharge", "FollowUp"])

_guards = st.one_of(
    st.none(),
    st.builds(
        GuardPredicate,
        st.tuples(
            st.builds(
                GuardClause,
                st.sampled_from(["ward", "kind"]),
                st.sampled_from(["=", "!=", "contains"]),
                st.sampled_from(["icu", "er", "x y"]),
            )
        ),
    ),
)


def _exprs(depth: int):
    atom = st.builds(Atom, _event_types, _guards)
    if depth <= 1:
        return atom
    sub = _exprs(depth - 1)
    return st.one_of(
        atom,
        st.builds(lambda kids: Seq(tuple(kids)), st.lists(sub, min_size=1, max_size=3)),
        st.builds(And, sub, sub),
        st.builds(Or, sub, sub),
        st.builds(Not, atom),
        st.builds(Times, sub, st.integers(min_value=1, max_value=4)),
        st.builds(OneOrMore, sub),
        st.builds(Optional, sub),
        st.builds(Within, sub, st.integers(min_value=1, max_value=10_000_000)),
    )


@settings(max_examples=300, deadline=None)
@given(_exprs(5))
def test_round_trip_property(expr):
    assert parse_pattern(format_pattern(expr)) == expr
