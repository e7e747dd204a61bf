"""Constructive engine for maximum quadruple packings with chosen leaves."""

from .model import (
    Design,
    Kind,
    LabeledLeave,
    LeaveSpec,
    Permutation,
    parse_leave_spec,
)
from .verify import max_blocks, verify_packing

__all__ = [
    "Design",
    "Kind",
    "LabeledLeave",
    "LeaveSpec",
    "Permutation",
    "parse_leave_spec",
    "max_blocks",
    "verify_packing",
]
