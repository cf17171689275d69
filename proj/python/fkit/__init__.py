from ._fkit import (
    CapacityError,
    ParseError,
    ValidationError,
    duflo,
    graph_key,
    star,
    suite_names,
    validate,
    verify,
    weight,
)

__all__ = [
    "CapacityError",
    "ParseError",
    "ValidationError",
    "duflo",
    "graph_key",
    "star",
    "suite_names",
    "validate",
    "verify",
    "weight",
]
