"""Exception hierarchy for iet_lab.

Domain errors carry enough context (step indices, offending values) to
diagnose a failed run without re-executing it.
"""

from __future__ import annotations


class IetLabError(Exception):
    """Base class for all library errors."""


class DegenerateAlphabet(IetLabError):
    """Alphabet has fewer than two letters."""


class InvalidPermutation(IetLabError):
    """Input is not a bijection onto {1..d}."""


class ReduciblePair(IetLabError):
    """Operation requires an irreducible permutation pair."""


class DimensionError(IetLabError):
    """Matrix or vector dimensions do not agree."""


class DomainError(IetLabError):
    """Point lies outside the transformation's domain."""


class NearBreakpoint(IetLabError):
    """A point fell within compare-tolerance of an interval endpoint.

    The orbit cannot be continued reliably; callers either abort or skip
    the sample.  ``step_index`` is the orbit step at which it happened
    (None when not applicable).
    """

    def __init__(self, message: str, step_index: int | None = None):
        super().__init__(message)
        self.step_index = step_index


class KeaneViolation(IetLabError):
    """An induction step hit equal critical lengths (orbit collision).

    ``step_index`` reports the failing induction step when raised
    mid-iteration.
    """

    def __init__(self, message: str, step_index: int | None = None):
        super().__init__(message)
        self.step_index = step_index


class NotALoop(IetLabError):
    """A combinatorial path does not return to its starting pair."""


class NotPrimitive(IetLabError):
    """No power of the matrix is strictly positive."""


class NotPositive(IetLabError):
    """Matrix has a non-positive entry where positivity is required."""


class NotNormalized(IetLabError):
    """Periodic data does not satisfy the nesting normalization."""


class SpectralAmbiguity(IetLabError):
    """An eigenvalue enclosure could not be separated from |z| = 1.

    ``enclosure`` holds the offending (value, radius) pair.
    """

    def __init__(self, message: str, enclosure=None):
        super().__init__(message)
        self.enclosure = enclosure


class EmptyFixedSpace(IetLabError):
    """The transpose matrix has no nonzero fixed vectors."""


class NotZeroMean(IetLabError):
    """Cocycle must have zero mean for this operation."""


class RationalInput(IetLabError):
    """A rational number was supplied where an irrational is required."""


class Unsupported(IetLabError):
    """Cocycle class not supported by this operation."""
