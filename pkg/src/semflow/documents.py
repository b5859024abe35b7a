"""Raw stream records and their JSON-lines wire format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator


@dataclass
class Document:
    """One unstructured record flowing through an operator graph.

    timestamp is integer epoch seconds; entity_id is the partition key
    used for pattern matching.
    """

    doc_id: str
    entity_id: str
    timestamp: int
    text: str
    attrs: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.entity_id:
            raise ValueError("entity_id must be non-empty")
        if self.timestamp < 0:
            raise ValueError("timestamp must be >= 0")

    def to_json(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "entity_id": self.entity_id,
            "timestamp": self.timestamp,
            "text": self.text,
            "attrs": dict(self.attrs),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Document":
        return cls(
            doc_id=obj["doc_id"],
            entity_id=obj["entity_id"],
            timestamp=int(obj["timestamp"]),
            text=obj["text"],
            attrs=dict(obj.get("attrs") or {}),
        )


def dump_jsonl(docs: Iterable[Document]) -> str:
    return "".join(json.dumps(d.to_json(), sort_keys=True) + "\n" for d in docs)


def parse_jsonl(text: str) -> Iterator[Document]:
    for line in text.splitlines():
        line = line.strip()
        if line:
            yield Document.from_json(json.loads(line))


def read_jsonl(path) -> list[Document]:
    with open(path, "r", encoding="utf-8") as fh:
        return list(parse_jsonl(fh.read()))
