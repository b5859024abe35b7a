"""Compilation of validated pattern expressions into a shared NFA.

The automaton uses three transition kinds: Take consumes an event and
advances, Ignore bypasses an event (skip-till-any-match), Proceed is an
epsilon move. Structure notes:

- Sequencing chains Take edges; interior nodes get Ignore self-loops.
- Disjunction branches via Proceed edges; conjunction expands to the two
  sequence orders; TIMES(n) unrolls n copies; ONE_OR_MORE adds a backward
  Proceed so the body's first Take acts as the repetition edge; OPTIONAL
  adds a Proceed bypass.
- Negation never consumes: it compiles to a guard marker on a Proceed
  edge. The guard opens when an instance crosses the marker (anchored at
  the previous consumed event), kills the instance on a forbidden event
  inside its bound, closes at the instance's next Take, and defers
  acceptance while open at an accept node. The bound comes from the
  nearest enclosing WITHIN.
- WITHIN compiles to a scope: take edges inside it carry span checks
  against the scope anchor, which is (re)set when an instance crosses the
  scope's entry marker.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..dsl.ast import (
    And,
    Atom,
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
)
from ..dsl.validate import validate_pattern
from ..errors import CompileError

START = "start"
INTERMEDIATE = "intermediate"
ACCEPT = "accept"

TAKE = "take"
IGNORE = "ignore"
PROCEED = "proceed"

PREV_ELEMENT = "prev_element"
WINDOW_START = "window_start"


@dataclass(frozen=True)
class EventCondition:
    event_type: str
    guard: GuardPredicate | None = None

    def __post_init__(self):
        if not self.event_type:
            raise CompileError("event condition needs a non-empty event type")

    def matches(self, event) -> bool:
        if event.event_type != self.event_type:
            return False
        if self.guard is not None:
            return self.guard.matches(event.attrs)
        return True

    def label(self) -> str:
        if self.guard is None:
            return self.event_type
        return format_pattern(Atom(self.event_type, self.guard))


@dataclass
class Node:
    node_id: int
    kind: str = INTERMEDIATE


@dataclass(frozen=True)
class SpanCheck:
    scope_id: int
    delta_t: int


@dataclass
class Edge:
    src: int
    dst: int
    kind: str
    condition: EventCondition | None = None
    span_checks: tuple[SpanCheck, ...] = ()
    arm_scopes: tuple[int, ...] = ()  # proceed: crossing re-anchors these scopes
    open_guards: tuple[int, ...] = ()  # proceed: crossing opens these guards


@dataclass
class NegGuard:
    """Bounded stop-state produced by a NOT.

    active_between records the structural span of the guard marker; the
    runtime activates the guard when crossing it and closes it at the
    instance's next Take.
    """

    guard_id: int
    active_between: tuple[int, int]
    forbidden: EventCondition
    bound: int  # seconds; always finite
    bound_anchor: str = PREV_ELEMENT


@dataclass
class Nfa:
    nodes: list[Node] = field(default_factory=list)
    edges: list[Edge] = field(default_factory=list)
    neg_guards: list[NegGuard] = field(default_factory=list)
    scopes: dict[int, int] = field(default_factory=dict)  # scope_id -> delta_t
    window: int | None = None  # top-level WITHIN, when present
    pattern_text: str = ""

    def node(self, node_id: int) -> Node:
        return self.nodes[node_id]

    def out_edges(self, node_id: int, kind: str | None = None) -> list[Edge]:
        return [
            e
            for e in self.edges
            if e.src == node_id and (kind is None or e.kind == kind)
        ]

    def guard(self, guard_id: int) -> NegGuard:
        return self._guards_by_id[guard_id]

    def finalize(self) -> None:
        self._guards_by_id = {g.guard_id: g for g in self.neg_guards}
        self._out = {n.node_id: [] for n in self.nodes}
        for e in self.edges:
            self._out[e.src].append(e)

    def outgoing(self, node_id: int) -> list[Edge]:
        return self._out[node_id]


class _Builder:
    def __init__(self):
        self.nfa = Nfa()
        self._scope_counter = 0
        self._guard_counter = 0
        self._enclosing: list[tuple[int, int]] = []  # (scope_id, delta_t), outermost first

    def new_node(self, kind: str = INTERMEDIATE) -> int:
        node = Node(len(self.nfa.nodes), kind)
        self.nfa.nodes.append(node)
        return node.node_id

    def take(self, src: int, dst: int, condition: EventCondition) -> None:
        checks = tuple(SpanCheck(sid, delta) for sid, delta in self._enclosing)
        self.nfa.edges.append(Edge(src, dst, TAKE, condition, span_checks=checks))

    def proceed(self, src: int, dst: int, arm=(), guards=()) -> None:
        self.nfa.edges.append(
            Edge(src, dst, PROCEED, arm_scopes=tuple(arm), open_guards=tuple(guards))
        )

    def build(self, expr: PatternExpr, entry: int) -> int:
        """Construct the segment for expr starting at entry; return its exit node."""
        if isinstance(expr, Atom):
            exit_node = self.new_node()
            self.take(entry, exit_node, EventCondition(expr.event_type, expr.guard))
            return exit_node

        if isinstance(expr, Seq):
            node = entry
            for child in expr.children:
                node = self.build(child, node)
            return node

        if isinstance(expr, Or):
            left_entry = self.new_node()
            right_entry = self.new_node()
            self.proceed(entry, left_entry)
            self.proceed(entry, right_entry)
            left_exit = self.build(expr.left, left_entry)
            right_exit = self.build(expr.right, right_entry)
            exit_node = self.new_node()
            self.proceed(left_exit, exit_node)
            self.proceed(right_exit, exit_node)
            return exit_node

        if isinstance(expr, And):
            expansion = Or(
                Seq((expr.left, expr.right)),
                Seq((expr.right, expr.left)),
            )
            return self.build(expansion, entry)

        if isinstance(expr, Times):
            node = entry
            for _ in range(expr.n):
                node = self.build(expr.child, node)
            return node

        if isinstance(expr, OneOrMore):
            body_entry = self.new_node()
            self.proceed(entry, body_entry)
            body_exit = self.build(expr.child, body_entry)
            self.proceed(body_exit, body_entry)  # repetition back-edge
            exit_node = self.new_node()
            self.proceed(body_exit, exit_node)
            return exit_node

        if isinstance(expr, Optional):
            child_entry = self.new_node()
            self.proceed(entry, child_entry)
            child_exit = self.build(expr.child, child_entry)
            exit_node = self.new_node()
            self.proceed(child_exit, exit_node)
            self.proceed(entry, exit_node)  # bypass
            return exit_node

        if isinstance(expr, Within):
            self._scope_counter += 1
            scope_id = self._scope_counter
            self.nfa.scopes[scope_id] = expr.delta_t
            child_entry = self.new_node()
            self.proceed(entry, child_entry, arm=(scope_id,))
            self._enclosing.append((scope_id, expr.delta_t))
            child_exit = self.build(expr.child, child_entry)
            self._enclosing.pop()
            exit_node = self.new_node()
            self.proceed(child_exit, exit_node)
            return exit_node

        if isinstance(expr, Not):
            if not isinstance(expr.child, Atom):
                raise CompileError("NOT must negate a single event type")
            if not self._enclosing:
                raise CompileError("NOT with no enclosing WITHIN survived validation")
            self._guard_counter += 1
            guard_id = self._guard_counter
            bound = self._enclosing[-1][1]  # nearest enclosing WITHIN
            exit_node = self.new_node()
            self.nfa.neg_guards.append(
                NegGuard(
                    guard_id,
                    (entry, exit_node),
                    EventCondition(expr.child.event_type, expr.child.guard),
                    bound,
                )
            )
            self.proceed(entry, exit_node, guards=(guard_id,))
            return exit_node

        raise CompileError(f"not a pattern node: {expr!r}")


def compile_pattern(expr: PatternExpr) -> Nfa:
    """Compile a validated expression; raises CompileError on invariants
    that validation should have caught."""
    result = validate_pattern(expr)
    if not result.ok:
        raise CompileError(
            "pattern failed validation: "
            + "; ".join(f"{v.code}: {v.message}" for v in result.violations)
        )

    builder = _Builder()
    start = builder.new_node(START)
    exit_node = builder.build(expr, start)
    nfa = builder.nfa
    nfa.node(exit_node).kind = ACCEPT
    if isinstance(expr, Within):
        nfa.window = expr.delta_t
    nfa.pattern_text = format_pattern(expr)

    # skip-till-any-match: every non-start node that can still take events
    # retains its instance on unrelated arrivals
    for node in nfa.nodes:
        if node.kind != START and any(
            e.kind == TAKE for e in nfa.edges if e.src == node.node_id
        ):
            nfa.edges.append(Edge(node.node_id, node.node_id, IGNORE))

    nfa.finalize()
    return nfa


def emit_dot(nfa: Nfa) -> str:
    """Render the automaton in dot format for debugging and the UI."""
    lines = ["digraph nfa {", "  rankdir=LR;"]
    for node in nfa.nodes:
        shape = {START: "circle", INTERMEDIATE: "ellipse", ACCEPT: "doublecircle"}[node.kind]
        lines.append(f'  n{node.node_id} [label="n{node.node_id}:{node.kind}" shape={shape}];')
    for edge in nfa.edges:
        if edge.kind == TAKE:
            label = f"Take:{edge.condition.label()}"
        elif edge.kind == IGNORE:
            label = "Ignore"
        else:
            label = "Proceed"
            if edge.arm_scopes:
                label += " " + ",".join(f"w{s}" for s in edge.arm_scopes)
        lines.append(f'  n{edge.src} -> n{edge.dst} [label="{label}"];')
    for guard in nfa.neg_guards:
        src, dst = guard.active_between
        lines.append(
            f'  n{src} -> n{dst} [style=dashed color=red '
            f'label="NOT {guard.forbidden.label()} <= {guard.bound}s"];'
        )
    lines.append("}")
    return "\n".join(lines)
