"""Per-entity runtime for compiled pattern NFAs.

Instances ("configs") share the compiled automaton and hold isolated
state: current node, matched events, window anchors, and open negation
guards. Runtime rules:

- Skip-till-any-match: on a Take, a clone advances while the original
  stays put, so every viable combination is explored. Unrelated events
  are bypassed.
- Ties at equal timestamps are broken by arrival order; "after" always
  means lexicographically larger (timestamp, seq).
- An open negation guard kills its instance when a forbidden event
  arrives within bound seconds of the guard's anchor event; it closes
  (harmlessly) at the instance's next Take, which makes the interval
  strictly between the anchor and the closing event.
- Acceptance with open (trailing) guards is deferred: the candidate is
  frozen and emits only once the watermark passes its deadline, matching
  the survives-the-full-window rule. Emission never happens twice for
  the same event combination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import InstanceCapExceeded, OutOfOrderError
from ..events import SemanticEvent
from .compile import ACCEPT, IGNORE, PROCEED, TAKE, Edge, EventCondition, Nfa

Key = tuple  # (timestamp, arrival_seq)

DEFAULT_INSTANCE_CAP = 10000


@dataclass(frozen=True)
class OpenGuard:
    guard_id: int
    forbidden: EventCondition
    bound: int
    prev_ts: int

    def hit_by(self, ev: SemanticEvent) -> bool:
        # arriving events are always (ts, seq)-after the anchor event
        return ev.timestamp <= self.prev_ts + self.bound and self.forbidden.matches(ev)

    @property
    def deadline(self) -> int:
        return self.prev_ts + self.bound


@dataclass(frozen=True)
class Config:
    """One lightweight NFA instance."""

    instance_id: int
    node: int
    matched: tuple[SemanticEvent, ...]
    anchors: tuple[tuple[int, int], ...]  # (scope_id, anchor_ts), sorted
    armed: frozenset[int]
    guards: tuple[OpenGuard, ...]

    def dedup_key(self):
        return (
            self.node,
            tuple(e.event_id for e in self.matched),
            self.anchors,
            self.armed,
            tuple((g.guard_id, g.prev_ts) for g in self.guards),
        )


@dataclass
class DeferredMatch:
    events: tuple[SemanticEvent, ...]
    guards: tuple[OpenGuard, ...]
    deadline: int
    first_ts: int

    def dedup_key(self):
        return (
            tuple(e.event_id for e in self.events),
            tuple(sorted((g.guard_id, g.prev_ts) for g in self.guards)),
        )


@dataclass
class PatternMatch:
    pattern_id: str
    entity_id: str
    events: tuple[SemanticEvent, ...]
    window: tuple[int, int]  # (first_ts, last_effective_ts)
    emitted_at: float  # watermark value; math.inf when emitted by flush

    def event_ids(self) -> tuple[str, ...]:
        return tuple(e.event_id for e in self.events)

    def to_json(self) -> dict:
        return {
            "pattern_id": self.pattern_id,
            "entity_id": self.entity_id,
            "event_ids": list(self.event_ids()),
            "events": [e.to_json() for e in self.events],
            "window": list(self.window),
            "emitted_at": None if math.isinf(self.emitted_at) else self.emitted_at,
        }


@dataclass
class _EntityState:
    configs: list[Config] = field(default_factory=list)
    deferred: list[DeferredMatch] = field(default_factory=list)
    emitted_ids: set = field(default_factory=set)
    matches: list[PatternMatch] = field(default_factory=list)
    watermark: float = -math.inf
    seq: int = 0
    next_instance: int = 1


class Matcher:
    """Stateful matcher for one compiled pattern over an entity-keyed
    event stream. Entities are independent; calls for one entity must be
    serialized by the caller."""

    def __init__(self, nfa: Nfa, pattern_id: str = "pattern", instance_cap: int = DEFAULT_INSTANCE_CAP):
        self.nfa = nfa
        self.pattern_id = pattern_id
        self.instance_cap = instance_cap
        self.entities: dict[str, _EntityState] = {}
        self._closure_cache: dict[int, list] = {}
        self._start_stops = self._closure(0)

    # -- epsilon machinery -------------------------------------------------

    def _closure(self, origin: int):
        """All stopping points reachable from origin via Proceed edges,
        with the scope-arming and guard-opening markers crossed en route.
        A stopping point is a node with outgoing Take edges or an accept
        node."""
        if origin in self._closure_cache:
            return self._closure_cache[origin]
        results = []
        seen = set()

        def visit(node: int, armed: frozenset, guards: tuple, on_path: frozenset):
            node_obj = self.nfa.node(node)
            has_take = any(e.kind == TAKE for e in self.nfa.outgoing(node))
            if has_take or node_obj.kind == ACCEPT:
                entry = (node, armed, guards)
                if entry not in seen:
                    seen.add(entry)
                    results.append(entry)
            for e in self.nfa.outgoing(node):
                if e.kind != PROCEED or e.dst in on_path:
                    continue
                next_guards = guards + tuple(
                    g for g in e.open_guards if g not in guards
                )
                visit(
                    e.dst,
                    armed | frozenset(e.arm_scopes),
                    next_guards,
                    on_path | {e.dst},
                )

        visit(origin, frozenset(), (), frozenset({origin}))
        self._closure_cache[origin] = results
        return results

    # -- state helpers -----------------------------------------------------

    def _entity(self, entity_id: str) -> _EntityState:
        return self.entities.setdefault(entity_id, _EntityState())

    def _span_ok(self, edge: Edge, config: Config, ts: int) -> bool:
        anchors = dict(config.anchors)
        for check in edge.span_checks:
            if check.scope_id in config.armed:
                continue  # this take re-anchors the scope
            anchor = anchors.get(check.scope_id)
            if anchor is None or ts - anchor > check.delta_t:
                return False
        return True

    def _take_viable(self, edge: Edge, config: Config, now: float) -> bool:
        anchors = dict(config.anchors)
        for check in edge.span_checks:
            if check.scope_id in config.armed:
                continue
            anchor = anchors.get(check.scope_id)
            if anchor is None or now > anchor + check.delta_t:
                return False
        return True

    def _expire(self, es: _EntityState, now: float, out: list[PatternMatch], entity_id: str):
        still_pending = []
        for d in es.deferred:
            if d.deadline < now:
                self._emit(es, entity_id, d.events, (d.first_ts, d.deadline), now, out)
            else:
                still_pending.append(d)
        es.deferred = still_pending
        es.configs = [
            c
            for c in es.configs
            if any(
                e.kind == TAKE and self._take_viable(e, c, now)
                for e in self.nfa.outgoing(c.node)
            )
        ]

    def _emit(self, es, entity_id, events, window, watermark, out):
        ids = tuple(e.event_id for e in events)
        if ids in es.emitted_ids:
            return
        es.emitted_ids.add(ids)
        match = PatternMatch(self.pattern_id, entity_id, events, window, watermark)
        es.matches.append(match)
        out.append(match)

    # -- the two advancing operations ---------------------------------------

    def advance(self, ev: SemanticEvent) -> list[PatternMatch]:
        es = self._entity(ev.entity_id)
        if ev.timestamp < es.watermark:
            raise OutOfOrderError(
                f"entity {ev.entity_id!r}: event at {ev.timestamp} after watermark {es.watermark}"
            )
        out: list[PatternMatch] = []
        self._expire(es, ev.timestamp, out, ev.entity_id)

        # kill checks apply to guards opened by earlier events only: a
        # guard's absence interval starts strictly after its anchor event
        es.deferred = [
            d for d in es.deferred if not any(g.hit_by(ev) for g in d.guards)
        ]

        new_configs: list[Config] = []
        survivors: list[Config] = []

        # fresh instances spawn from the start node's stopping points
        for node, armed, guards in self._start_stops:
            base = Config(0, node, (), (), armed, guards)
            self._try_takes(es, base, ev, new_configs, out)

        for config in es.configs:
            self._try_takes(es, config, ev, new_configs, out)
            if any(g.hit_by(ev) for g in config.guards):
                continue  # forbidden event inside an open guard: instance dies
            survivors.append(config)

        merged: dict = {}
        for config in survivors + new_configs:
            merged.setdefault(config.dedup_key(), config)
        es.configs = list(merged.values())

        if len(es.configs) + len(es.deferred) > self.instance_cap:
            raise InstanceCapExceeded(
                f"entity {ev.entity_id!r} exceeded instance cap {self.instance_cap}"
            )
        es.watermark = ev.timestamp
        return out

    def _try_takes(
        self,
        es: _EntityState,
        config: Config,
        ev: SemanticEvent,
        new_configs: list[Config],
        out: list[PatternMatch],
    ) -> None:
        for edge in self.nfa.outgoing(config.node):
            if edge.kind != TAKE or edge.condition is None:
                continue
            if not edge.condition.matches(ev):
                continue
            if not self._span_ok(edge, config, ev.timestamp):
                continue
            matched = config.matched + (ev,)
            anchors = dict(config.anchors)
            for sid in config.armed:
                anchors[sid] = ev.timestamp
            frozen_anchors = tuple(sorted(anchors.items()))
            for node, armed, guard_ids in self._closure(edge.dst):
                guards = tuple(
                    OpenGuard(
                        gid,
                        self.nfa.guard(gid).forbidden,
                        self.nfa.guard(gid).bound,
                        ev.timestamp,
                    )
                    for gid in guard_ids
                )
                node_obj = self.nfa.node(node)
                if node_obj.kind == ACCEPT:
                    first_ts = matched[0].timestamp
                    if guards:
                        deadline = max(g.deadline for g in guards)
                        d = DeferredMatch(matched, guards, deadline, first_ts)
                        if all(d.dedup_key() != x.dedup_key() for x in es.deferred):
                            es.deferred.append(d)
                    else:
                        self._emit(
                            es,
                            ev.entity_id,
                            matched,
                            (first_ts, ev.timestamp),
                            ev.timestamp,
                            out,
                        )
                if any(e.kind == TAKE for e in self.nfa.outgoing(node)):
                    new_configs.append(
                        Config(
                            self._next_instance(es),
                            node,
                            matched,
                            frozen_anchors,
                            armed,
                            guards,
                        )
                    )

    def _next_instance(self, es: _EntityState) -> int:
        iid = es.next_instance
        es.next_instance += 1
        return iid

    def on_watermark(self, entity_id: str, watermark: float) -> list[PatternMatch]:
        es = self._entity(entity_id)
        if watermark < es.watermark:
            raise OutOfOrderError(
                f"entity {entity_id!r}: watermark regression {watermark} < {es.watermark}"
            )
        out: list[PatternMatch] = []
        self._expire(es, watermark, out, entity_id)
        es.watermark = watermark
        return out

    def flush(self) -> list[PatternMatch]:
        """Advance every entity's watermark to +inf; deferred negation
        matches that survived emit, everything else dies. Idempotent."""
        out: list[PatternMatch] = []
        for entity_id in sorted(self.entities):
            out.extend(self.on_watermark(entity_id, math.inf))
        return out

    # -- inspection ----------------------------------------------------------

    def snapshot(self) -> dict:
        """Read-only trace: per-entity instance counts, partial matches,
        and emitted matches (with evidence spans)."""
        entities = {}
        for entity_id in sorted(self.entities):
            es = self.entities[entity_id]
            entities[entity_id] = {
                "active_instances": len(es.configs),
                "pending_negations": len(es.deferred),
                "watermark": None if math.isinf(es.watermark) else es.watermark,
                "instances": [
                    {
                        "instance_id": c.instance_id,
                        "node": c.node,
                        "matched": [e.event_id for e in c.matched],
                    }
                    for c in es.configs
                ],
                "matches": [m.to_json() for m in es.matches],
            }
        return {
            "pattern_id": self.pattern_id,
            "pattern": self.nfa.pattern_text,
            "entities": entities,
        }

    def all_matches(self) -> list[PatternMatch]:
        out = []
        for entity_id in sorted(self.entities):
            out.extend(self.entities[entity_id].matches)
        return out
