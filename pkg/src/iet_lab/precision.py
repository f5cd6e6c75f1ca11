"""Arbitrary-precision context and tagged real vectors.

Every real computation in the library runs through an explicit
:class:`PrecisionContext`; there is no global precision state.  Each
context owns a private mpmath context, so two PrecisionContexts with
different mantissa sizes can coexist in one process.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from mpmath.ctx_mp import MPContext

from .errors import DomainError, NearBreakpoint

DEFAULT_BITS = 128


class PrecisionContext:
    """Mantissa size plus the comparison tolerance derived from it.

    ``eps_cmp`` defaults to 2**(-bits/2): orbit points closer than this
    to an interval endpoint (without being exactly equal) are treated as
    undecidable and raise :class:`NearBreakpoint`.
    """

    __slots__ = ("bits", "mp", "eps_cmp", "_half_digits")

    def __init__(self, bits: int = DEFAULT_BITS, eps_cmp=None):
        if bits < 64:
            raise ValueError("mantissa_bits must be at least 64")
        self.bits = int(bits)
        self.mp = MPContext()
        self.mp.prec = self.bits
        if eps_cmp is None:
            eps_cmp = self.mp.mpf(2) ** (-self.bits // 2)
        else:
            eps_cmp = self.mp.mpf(eps_cmp)
        if not eps_cmp > 0:
            raise ValueError("eps_cmp must be positive")
        self.eps_cmp = eps_cmp
        self._half_digits = max(17, int(self.bits * 0.3010) + 2)

    def real(self, x):
        """Convert ``x`` (int, str, float, Fraction, mpf) to this context's mpf."""
        if isinstance(x, Fraction):
            return self.mp.mpf(x.numerator) / x.denominator
        return self.mp.mpf(x)

    def vector(self, xs: Iterable) -> "RealVector":
        return RealVector(tuple(self.real(x) for x in xs), self)

    def dot_int(self, coeffs: Sequence[int], values: Sequence):
        """Exact-integer-weighted sum of mpf values (single rounding via fsum)."""
        return self.mp.fsum(c * v for c, v in zip(coeffs, values) if c)

    def str_of(self, x, digits: int | None = None) -> str:
        """Decimal-string rendering at full context precision by default."""
        return self.mp.nstr(self.real(x), digits or self._half_digits,
                            strip_zeros=False)

    def with_bits(self, bits: int) -> "PrecisionContext":
        return PrecisionContext(bits)

    def spawn(self, extra_bits: int = 64) -> "PrecisionContext":
        """Fresh context with a widened mantissa, for internal refinement."""
        return PrecisionContext(self.bits + extra_bits)

    def __repr__(self):
        return f"PrecisionContext(bits={self.bits})"

    def __eq__(self, other):
        return (isinstance(other, PrecisionContext)
                and self.bits == other.bits and self.eps_cmp == other.eps_cmp)

    def __hash__(self):
        return hash(("PrecisionContext", self.bits))


@dataclass(frozen=True)
class RealVector:
    """Finite tuple of arbitrary-precision reals tagged with its context."""

    values: tuple
    ctx: PrecisionContext = field(repr=False)

    def __post_init__(self):
        for v in self.values:
            if not self.ctx.mp.isfinite(v):
                raise DomainError(f"non-finite vector entry {v!r}")

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def norm_max(self):
        return max(abs(v) for v in self.values)

    def norm_l1(self):
        return self.ctx.mp.fsum(abs(v) for v in self.values)

    def total(self):
        return self.ctx.mp.fsum(self.values)

    def scaled(self, factor) -> "RealVector":
        f = self.ctx.real(factor)
        return RealVector(tuple(v * f for v in self.values), self.ctx)

    def minus(self, other: "RealVector") -> "RealVector":
        return RealVector(tuple(a - b for a, b in zip(self.values, other.values)),
                          self.ctx)

    def as_strings(self, digits: int | None = None) -> list:
        return [self.ctx.str_of(v, digits) for v in self.values]


def side_of_breakpoint(ctx: PrecisionContext, x, breakpoint, step_index=None):
    """-1 / +1 for x strictly left/right of breakpoint, 0 for exact equality.

    Raises NearBreakpoint when 0 < |x - breakpoint| < eps_cmp: that close
    to an endpoint the side cannot be trusted at working precision.
    """
    diff = x - breakpoint
    if diff == 0:
        return 0
    if abs(diff) < ctx.eps_cmp:
        raise NearBreakpoint(
            f"point within eps_cmp of breakpoint (|dx| = {ctx.mp.nstr(abs(diff), 8)})",
            step_index=step_index)
    return 1 if diff > 0 else -1


def kronecker_samples(ctx: PrecisionContext, count: int, total, seed: int = 0):
    """Deterministic low-discrepancy sample points in [0, total).

    Golden-ratio Kronecker sequence offset by the seed; reproducible and
    evenly spread, which keeps sweep statistics stable across runs.
    """
    mp = ctx.mp
    g = (mp.sqrt(5) - 1) / 2
    offset = mp.mpf(seed % 997) / 997 + mp.mpf("0.0112358")
    out = []
    for j in range(count):
        t = mp.frac(offset + j * g)
        out.append(t * total)
    return out
