"""semflow: a semantic streaming dataflow engine with temporal pattern
detection over unstructured document streams."""

from .documents import Document
from .events import SemanticEvent

__version__ = "0.1.0"

__all__ = ["Document", "SemanticEvent", "__version__"]
