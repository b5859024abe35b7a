"""Typed, timestamped, entity-keyed facts extracted from documents."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class SemanticEvent:
    """The atomic unit of pattern matching.

    evidence_span is (start, end) character offsets into the source
    document's text, when the extractor could localize the event.
    """

    event_id: str
    entity_id: str
    event_type: str
    timestamp: int
    description: str = ""
    attrs: dict = field(default_factory=dict, hash=False, compare=False)
    source_doc: str = ""
    evidence_span: tuple[int, int] | None = None

    def __post_init__(self):
        if not self.event_type:
            raise ValueError("event_type must be non-empty")
        if self.timestamp < 0:
            raise ValueError("timestamp must be >= 0")

    def to_json(self) -> dict:
        return {
            "event_id": self.event_id,
            "entity_id": self.entity_id,
            "event_type": self.event_type,
            "timestamp": self.timestamp,
            "description": self.description,
            "attrs": dict(self.attrs),
            "source_doc": self.source_doc,
            "evidence_span": list(self.evidence_span) if self.evidence_span else None,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SemanticEvent":
        span = obj.get("evidence_span")
        return cls(
            event_id=obj["event_id"],
            entity_id=obj["entity_id"],
            event_type=obj["event_type"],
            timestamp=int(obj["timestamp"]),
            description=obj.get("description", ""),
            attrs=dict(obj.get("attrs") or {}),
            source_doc=obj.get("source_doc", ""),
            evidence_span=tuple(span) if span else None,
        )
