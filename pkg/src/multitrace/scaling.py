"""Size-scaling exponents for trace observables and couplings.

All exponents are powers of the inverse matrix size attached to a
field described only by its trace count T and total slot count n.
They are returned as exact fractions (half-integers occur for odd n).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


class ScalingError(ValueError):
    pass


@dataclass(frozen=True)
class FieldDescriptor:
    """Shape of a multi-trace field: T traces holding n slots in total.

    The unit shape (no traces, no slots) is allowed; otherwise every
    trace holds at least one slot.
    """

    traces: int
    size: int

    def __post_init__(self) -> None:
        if self.traces < 0 or self.size < 0:
            raise ScalingError("trace and slot counts are naturals")
        if self.traces == 0 and self.size > 0:
            raise ScalingError("slots need traces to live in")
        if self.traces > 0 and self.size < self.traces:
            raise ScalingError("every trace holds at least one slot")


def free_normalization_exponent(fd: FieldDescriptor) -> Fraction:
    """Power making free multi-trace correlators finite at large size."""
    return Fraction(fd.size, 2)


def interacting_normalization_exponent(fd: FieldDescriptor) -> Fraction:
    """Power making interacting correlators finite: one extra unit per trace."""
    return fd.traces + Fraction(fd.size, 2)


def thooft_coupling_exponent(fd: FieldDescriptor) -> Fraction:
    """Power relating a bare vertex coupling to its fixed-coupling form.

    Two units below the interacting normalization; a single quartic
    trace gives exponent one.
    """
    return fd.traces + Fraction(fd.size, 2) - 2


def connected_degree_bound(trace_counts: Sequence[int]) -> int:
    """Least possible eps degree of a k-fold connected product.

    Equals 2k - 2 - sum of trace counts; k below two is meaningless
    because connectedness needs something to connect.
    """
    k = len(trace_counts)
    if k < 2:
        raise ScalingError("connected bounds need at least two factors")
    if any(t < 1 for t in trace_counts):
        raise ScalingError("trace counts must be positive")
    return 2 * k - 2 - sum(trace_counts)


def rg_strength_exponent(src: FieldDescriptor, dst: FieldDescriptor) -> Fraction:
    """Relative size power of a flow coefficient feeding dst from src."""
    return (interacting_normalization_exponent(src)
            - interacting_normalization_exponent(dst))
