"""Exception types shared across the engine."""

from __future__ import annotations


class SemflowError(Exception):
    """Base class for all engine errors."""


class PatternSyntaxError(SemflowError):
    """Pattern text could not be parsed; carries the byte offset of the failure."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class DurationError(SemflowError):
    """Zero or negative duration in a pattern."""


class CompileError(SemflowError):
    """Pattern compilation hit an invariant violation (unreachable after validation)."""


class CycleError(SemflowError):
    """Pipeline operator references form a cycle."""


class UnknownOperatorKind(SemflowError):
    """Pipeline references an operator kind that is not registered."""


class DanglingInput(SemflowError):
    """Operator input id is not defined anywhere in the pipeline."""


class OutOfOrderError(SemflowError):
    """Timestamp regression within an entity partition."""


class OperatorFailure(SemflowError):
    """An operator failed while processing a record; wraps the cause with the operator id."""

    def __init__(self, operator_id: str, cause: Exception):
        super().__init__(f"operator {operator_id!r} failed: {cause}")
        self.operator_id = operator_id
        self.cause = cause


class InstanceCapExceeded(SemflowError):
    """Active pattern-matcher instances for one entity exceeded the configured cap."""


class BackendError(SemflowError):
    """Model backend call failed after retries."""


class ExtractionParseError(SemflowError):
    """Model output could not be parsed into the event schema."""


class DuplicateDocError(SemflowError):
    """Document was added to a retrieval index twice."""


class PlanParseError(SemflowError):
    """Group refinement plan was malformed or referenced unknown groups."""


class SynthesisFailed(SemflowError):
    """Pipeline synthesis still invalid after the allowed repair rounds."""

    def __init__(self, message: str, critiques: list):
        super().__init__(message)
        self.critiques = critiques


class UnknownOperator(SemflowError):
    """Metric delta recorded against an operator id the run does not know."""


class RunNotFound(SemflowError):
    """Run id does not exist."""


class UniverseMismatch(SemflowError):
    """Clustering evaluation received partitions over different item sets."""


class ConfigError(SemflowError):
    """Invalid stream-generator configuration."""


class OracleLimitError(SemflowError):
    """Oracle input exceeds the documented brute-force limits."""
