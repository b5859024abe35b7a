"""Completion and embedding providers with token accounting.

Mock backends are pure functions and therefore deterministic: the mock
completion backend delegates to a pluggable responder, and the mock
embedding backend is a 64-dim hashed bag-of-words. Every call, mock or
real, yields a TokenUsage record collected by the run's CallLog.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
import zlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .documents import Document
from .errors import BackendError, DuplicateDocError

MOCK_EMBED_DIM = 64

# sentinels used by prompts that carry a document body; mock responders
# recover the body with read_body()
BODY_OPEN = "<<<\n"
BODY_CLOSE = "\n>>>"


def wrap_body(text: str) -> str:
    return f"{BODY_OPEN}{text}{BODY_CLOSE}"


def read_body(prompt: str) -> str:
    start = prompt.find(BODY_OPEN)
    end = prompt.rfind(BODY_CLOSE)
    if start < 0 or end < 0 or end < start:
        raise BackendError("prompt has no document body")
    return prompt[start + len(BODY_OPEN) : end]


def count_tokens(text: str) -> int:
    """Mock accounting rule: whitespace tokens."""
    return len(text.split())


def input_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class TokenUsage:
    prompt_tokens: int
    completion_tokens: int
    latency_ms: int
    call_id: int


@dataclass
class CallRecord:
    call_id: int
    kind: str  # "complete" | "embed"
    operator_id: str
    input_hash: str
    output: object  # completion text, or embedding vector as list
    usage: TokenUsage


class CallLog:
    """Per-run accounting: every backend call lands here, tagged with the
    operator that made it."""

    def __init__(self):
        self.records: list[CallRecord] = []
        self.current_operator = ""
        self._next_id = 1

    def set_operator(self, operator_id: str) -> None:
        self.current_operator = operator_id

    def next_call_id(self) -> int:
        cid = self._next_id
        self._next_id += 1
        return cid

    def record(self, kind: str, text: str, output: object, usage: TokenUsage) -> None:
        self.records.append(
            CallRecord(usage.call_id, kind, self.current_operator, input_hash(text), output, usage)
        )

    def totals(self) -> dict:
        prompt = sum(r.usage.prompt_tokens for r in self.records)
        completion = sum(r.usage.completion_tokens for r in self.records)
        return {
            "calls": len(self.records),
            "prompt_tokens": prompt,
            "completion_tokens": completion,
            "total_tokens": prompt + completion,
        }

    def totals_by_operator(self) -> dict[str, dict]:
        out: dict[str, dict] = {}
        for r in self.records:
            agg = out.setdefault(
                r.operator_id,
                {"calls": 0, "prompt_tokens": 0, "completion_tokens": 0, "latency_ms": 0},
            )
            agg["calls"] += 1
            agg["prompt_tokens"] += r.usage.prompt_tokens
            agg["completion_tokens"] += r.usage.completion_tokens
            agg["latency_ms"] += r.usage.latency_ms
        return out

    def transcript_jsonl(self) -> str:
        lines = []
        for r in self.records:
            lines.append(
                json.dumps(
                    {"call_id": r.call_id, "kind": r.kind, "input_hash": r.input_hash, "output": r.output},
                    sort_keys=True,
                )
            )
        return "\n".join(lines) + ("\n" if lines else "")


class ModelBackend:
    """Base provider. Subclasses implement complete() and/or embed() as
    pure calls returning (output, token counts); accounting wraps them."""

    provider = "base"
    capabilities: frozenset = frozenset()

    def complete_raw(self, prompt: str) -> str:
        raise BackendError(f"{self.provider} does not support complete")

    def embed_raw(self, text: str) -> np.ndarray:
        raise BackendError(f"{self.provider} does not support embed")


class MockCompletionBackend(ModelBackend):
    provider = "mock"
    capabilities = frozenset({"complete"})

    def __init__(self, responder: Callable[[str], str]):
        self.responder = responder

    def complete_raw(self, prompt: str) -> str:
        return self.responder(prompt)


class EchoBackend(MockCompletionBackend):
    def __init__(self):
        super().__init__(lambda prompt: prompt)


class MockEmbeddingBackend(ModelBackend):
    """Hashed bag-of-words; stable across processes (crc32, not hash())."""

    provider = "mock-embed"
    capabilities = frozenset({"embed"})

    def __init__(self, dim: int = MOCK_EMBED_DIM):
        self.dim = dim

    def embed_raw(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        for token in text.lower().split():
            vec[zlib.crc32(token.encode("utf-8")) % self.dim] += 1.0
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec /= norm
        return vec


class OpenAIStyleBackend(ModelBackend):
    """Chat-completions client for hosted providers. Optional; never used
    by tests. Key and base URL come from MODEL_API_KEY / MODEL_API_BASE."""

    provider = "openai-style"
    capabilities = frozenset({"complete"})

    def __init__(self, model: str, timeout: float = 60.0, max_retries: int = 2):
        self.model = model
        self.timeout = timeout
        self.max_retries = max_retries
        self.base = os.environ.get("MODEL_API_BASE", "")
        self.key = os.environ.get("MODEL_API_KEY", "")
        if not self.base:
            raise BackendError("MODEL_API_BASE not set")

    def complete_raw(self, prompt: str) -> str:
        import requests

        last_error: Exception | None = None
        for _ in range(self.max_retries + 1):
            try:
                resp = requests.post(
                    f"{self.base.rstrip('/')}/chat/completions",
                    headers={"Authorization": f"Bearer {self.key}"},
                    json={
                        "model": self.model,
                        "messages": [{"role": "user", "content": prompt}],
                    },
                    timeout=self.timeout,
                )
                resp.raise_for_status()
                return resp.json()["choices"][0]["message"]["content"]
            except Exception as exc:  # transport or schema failure: retry
                last_error = exc
        raise BackendError(f"completion failed after retries: {last_error}")


class ReplayBackend(ModelBackend):
    """Serves recorded outputs keyed by input hash; byte-identical replay."""

    provider = "replay"
    capabilities = frozenset({"complete", "embed"})

    def __init__(self, transcript_lines: str):
        self.outputs: dict[tuple[str, str], object] = {}
        for line in transcript_lines.splitlines():
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            self.outputs[(rec["kind"], rec["input_hash"])] = rec["output"]

    def complete_raw(self, prompt: str) -> str:
        key = ("complete", input_hash(prompt))
        if key not in self.outputs:
            raise BackendError(f"no recorded completion for hash {key[1]}")
        return self.outputs[key]

    def embed_raw(self, text: str) -> np.ndarray:
        key = ("embed", input_hash(text))
        if key not in self.outputs:
            raise BackendError(f"no recorded embedding for hash {key[1]}")
        return np.asarray(self.outputs[key], dtype=np.float64)


class Backends:
    """Bundle of the providers a pipeline run uses, plus its call log.

    Operators call complete()/embed() here so token usage is attributed
    to whichever operator the executor marked current.
    """

    def __init__(
        self,
        complete: ModelBackend | None = None,
        embed: ModelBackend | None = None,
        call_log: CallLog | None = None,
    ):
        self.completion_backend = complete
        self.embedding_backend = embed
        self.call_log = call_log or CallLog()

    def complete(self, prompt: str) -> tuple[str, TokenUsage]:
        if self.completion_backend is None:
            raise BackendError("no completion backend configured")
        started = time.perf_counter()
        text = self.completion_backend.complete_raw(prompt)
        latency_ms = int((time.perf_counter() - started) * 1000)
        usage = TokenUsage(
            prompt_tokens=count_tokens(prompt),
            completion_tokens=count_tokens(text),
            latency_ms=latency_ms,
            call_id=self.call_log.next_call_id(),
        )
        self.call_log.record("complete", prompt, text, usage)
        return text, usage

    def embed(self, text: str) -> tuple[np.ndarray, TokenUsage]:
        if self.embedding_backend is None:
            raise BackendError("no embedding backend configured")
        started = time.perf_counter()
        vec = self.embedding_backend.embed_raw(text)
        latency_ms = int((time.perf_counter() - started) * 1000)
        usage = TokenUsage(
            prompt_tokens=count_tokens(text),
            completion_tokens=0,
            latency_ms=latency_ms,
            call_id=self.call_log.next_call_id(),
        )
        self.call_log.record("embed", text, [float(x) for x in vec], usage)
        return vec, usage

    def embed_vec(self, text: str) -> np.ndarray:
        return self.embed(text)[0]


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


@dataclass
class Chunk:
    chunk_id: str
    doc_id: str
    text: str
    offset: int
    embedding: np.ndarray


DEFAULT_CHUNK_SIZE = 400
DEFAULT_CHUNK_OVERLAP = 80


def chunk_offsets(length: int, size: int, overlap: int) -> list[int]:
    """Fixed-size chunking: starts advance by size-overlap while inside the text."""
    if length == 0:
        return []
    step = size - overlap
    if step <= 0:
        raise ValueError("chunk overlap must be smaller than chunk size")
    return list(range(0, length, step))


class RetrievalIndex:
    """Exhaustive-scan cosine index over document chunks."""

    def __init__(self, embedder: Callable[[str], np.ndarray]):
        self.embedder = embedder
        self.entries: list[Chunk] = []
        self.doc_ids: set[str] = set()
        self.dimension: int | None = None

    def __len__(self) -> int:
        return len(self.entries)

    def index_add(
        self,
        doc: Document,
        chunking: tuple[int, int] = (DEFAULT_CHUNK_SIZE, DEFAULT_CHUNK_OVERLAP),
    ) -> int:
        if doc.doc_id in self.doc_ids:
            raise DuplicateDocError(f"doc {doc.doc_id!r} already indexed")
        size, overlap = chunking
        offsets = chunk_offsets(len(doc.text), size, overlap)
        for i, off in enumerate(offsets):
            text = doc.text[off : off + size]
            emb = self.embedder(text)
            if self.dimension is None:
                self.dimension = len(emb)
            elif len(emb) != self.dimension:
                raise BackendError("embedding dimension changed mid-index")
            self.entries.append(Chunk(f"{doc.doc_id}#{i:04d}", doc.doc_id, text, off, emb))
        self.doc_ids.add(doc.doc_id)
        return len(offsets)

    def top_k(self, query: str, k: int) -> list[tuple[Chunk, float]]:
        if k < 1:
            raise ValueError("k must be >= 1")
        if not self.entries:
            return []
        q = self.embedder(query)
        scored = [(chunk, cosine(q, chunk.embedding)) for chunk in self.entries]
        scored.sort(key=lambda cs: (-cs[1], cs[0].chunk_id))
        return scored[:k]
