from .oracle import oracle_match

__all__ = ["oracle_match"]
