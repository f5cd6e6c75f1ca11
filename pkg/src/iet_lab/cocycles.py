"""Cocycles over interval exchanges: evaluation, Birkhoff sums, towers,
partitions, and renormalization.

Two orbit engines back the heavy operations.  The exact engine carries
positions as integer combinations of the length vector (which is closed
under the dynamics), locates intervals through a float shadow, and falls
back to high-precision sign evaluation whenever the shadow comes within
a guard band of a breakpoint; visit counts from it are exact integers.
The float engine drops the integer bookkeeping for long statistical
sweeps and instead aborts or skips a sample on any guard-band hit, so
measure-zero collisions cannot silently poison the statistics.

Renormalization exploits self-similarity: for a periodic-type exchange
the induced map at every depth rescales to the same unit exchange, so
one period's tower geometry (computed once) renormalizes a step or
piecewise-linear cocycle through all depths in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from heapq import heappop, heappush

from . import intmat
from .errors import (DomainError, KeaneViolation, NearBreakpoint,
                     NotNormalized, Unsupported)
from .precision import kronecker_samples
from .rauzy import Iet, PeriodicIet

GUARD = 1e-9  # float-shadow band around breakpoints that forces exact checks


# ---------------------------------------------------------------------------
# cocycle classes


@dataclass(frozen=True)
class StepCocycle:
    """Piecewise constant cocycle with optional interior jump points.

    ``values[a]`` is the value vector on the leftmost piece of the a-th
    exchanged interval; each jump (gamma, vector) adds its vector to all
    points at or right of gamma inside the interval containing gamma.
    Entries may be exact ints or context reals; exactness is preserved
    where the inputs are exact.
    """

    dim: int
    values: tuple
    jumps: tuple = ()

    def __post_init__(self):
        if any(len(v) != self.dim for v in self.values):
            raise DomainError("value vectors must have the declared dimension")
        for _g, j in self.jumps:
            if len(j) != self.dim:
                raise DomainError("jump vectors must have the declared dimension")
        gammas = [g for g, _ in self.jumps]
        if sorted(gammas) != gammas:
            object.__setattr__(self, "jumps",
                               tuple(sorted(self.jumps, key=lambda t: t[0])))

    @classmethod
    def from_vector(cls, vec) -> "StepCocycle":
        return cls(1, tuple((v,) for v in vec))

    def coordinate_vectors(self) -> list:
        """Per-coordinate d-vectors of base values."""
        return [tuple(v[i] for v in self.values) for i in range(self.dim)]

    def variation(self):
        """Sum over interior discontinuities of the max-norm jump size."""
        if not self.jumps:
            return 0
        return sum(max(abs(x) for x in j) for _g, j in self.jumps)


@dataclass(frozen=True)
class PiecewiseLinearCocycle:
    """Piecewise linear cocycle, one slope and constant per interval.

    The constant-slope class (same slope on every interval) is the
    natural input; renormalization produces genuinely per-interval
    slopes, so that is the stored form.
    """

    dim: int
    slopes: tuple
    constants: tuple

    def __post_init__(self):
        if any(len(v) != self.dim for v in self.slopes + self.constants):
            raise DomainError("slope/constant vectors must match the dimension")

    @classmethod
    def constant_slope(cls, slope, constants) -> "PiecewiseLinearCocycle":
        slope = tuple(slope)
        return cls(len(slope), tuple(slope for _ in constants),
                   tuple(tuple(c) for c in constants))

    def slope_vector(self, iet: Iet) -> tuple:
        """Total slope s(phi) per coordinate: sum of slope * length."""
        mp = iet.ctx.mp
        return tuple(mp.fsum(self.slopes[a][i] * iet.lengths[a]
                             for a in range(len(self.slopes)))
                     for i in range(self.dim))

    def variation(self, iet: Iet):
        mp = iet.ctx.mp
        per_coord = [mp.fsum(abs(self.slopes[a][i]) * iet.lengths[a]
                             for a in range(len(self.slopes)))
                     for i in range(self.dim)]
        return max(per_coord)


Cocycle = StepCocycle | PiecewiseLinearCocycle


def validate_jumps(cocycle: StepCocycle, iet: Iet) -> None:
    """Interior jumps must be distinct and clear of interval endpoints."""
    prev = None
    for g, _j in cocycle.jumps:
        if not 0 < g < iet.total:
            raise DomainError("jump position outside the domain interior")
        if prev is not None and g - prev < iet.ctx.eps_cmp:
            raise DomainError("jump positions must be distinct")
        for a in range(iet.d):
            if abs(g - iet.left[a]) < iet.ctx.eps_cmp:
                raise DomainError(
                    "jump position collides with an exchanged-interval endpoint")
        prev = g


def evaluate(cocycle: Cocycle, iet: Iet, x, step_index=None) -> tuple:
    """Pointwise value of the cocycle at x (working-precision lane)."""
    a = iet.interval_index(x, step_index)
    if isinstance(cocycle, PiecewiseLinearCocycle):
        return tuple(cocycle.slopes[a][i] * x + cocycle.constants[a][i]
                     for i in range(cocycle.dim))
    out = list(cocycle.values[a])
    for g, j in cocycle.jumps:
        if iet.left[a] < g <= x:
            for i in range(cocycle.dim):
                out[i] = out[i] + j[i]
        elif g > x:
            break
    return tuple(out)


def mean(cocycle: Cocycle, iet: Iet) -> tuple:
    """Exact integral over the domain, per coordinate."""
    mp = iet.ctx.mp
    d = iet.d
    if isinstance(cocycle, PiecewiseLinearCocycle):
        return tuple(mp.fsum(
            cocycle.slopes[a][i] * (iet.left[a] + iet.right[a]) / 2 * iet.lengths[a]
            + cocycle.constants[a][i] * iet.lengths[a] for a in range(d))
            for i in range(cocycle.dim))
    base = [mp.fsum(cocycle.values[a][i] * iet.lengths[a] for a in range(d))
            for i in range(cocycle.dim)]
    for g, j in cocycle.jumps:
        a = iet.interval_index(g)
        w = iet.right[a] - g
        for i in range(cocycle.dim):
            base[i] = base[i] + j[i] * w
    return tuple(base)


def zero_mean_version(cocycle: Cocycle, iet: Iet) -> Cocycle:
    """Shift constants so every coordinate integrates to zero."""
    m = mean(cocycle, iet)
    shift = tuple(v / iet.total for v in m)
    if isinstance(cocycle, PiecewiseLinearCocycle):
        return replace(cocycle, constants=tuple(
            tuple(c[i] - shift[i] for i in range(cocycle.dim))
            for c in cocycle.constants))
    return replace(cocycle, values=tuple(
        tuple(v[i] - shift[i] for i in range(cocycle.dim))
        for v in cocycle.values))


def sup_norm(cocycle: Cocycle, iet: Iet):
    """Exact supremum of the max-norm over the domain."""
    if isinstance(cocycle, PiecewiseLinearCocycle):
        best = 0
        for a in range(iet.d):
            for i in range(cocycle.dim):
                for xx in (iet.left[a], iet.right[a]):
                    best = max(best, abs(cocycle.slopes[a][i] * xx
                                         + cocycle.constants[a][i]))
        return best
    best = 0
    for a in range(iet.d):
        acc = list(cocycle.values[a])
        best = max(best, max(abs(v) for v in acc))
        for g, j in cocycle.jumps:
            if iet.left[a] < g < iet.right[a]:
                for i in range(cocycle.dim):
                    acc[i] = acc[i] + j[i]
                best = max(best, max(abs(v) for v in acc))
    return best


# ---------------------------------------------------------------------------
# exact orbit engine


class ExactWalker:
    """Forward orbit with positions as integer combinations of the lengths.

    The position is (coeffs . lambda) / den with integer coeffs; every
    translation adds an integer vector, so the representation is closed
    and never drifts.  Locating intervals uses a float shadow that is
    resynchronized periodically and escalated to high-precision signs
    inside the guard band.
    """

    RESYNC = 4096

    def __init__(self, iet: Iet, coeffs, den: int = 1):
        self.iet = iet
        d = iet.d
        self.d = d
        self.den = int(den)
        self.coeffs = [int(c) for c in coeffs]
        if len(self.coeffs) != d:
            raise DomainError("coefficient vector must have length d")
        self.lam_mpf = iet.lengths.values
        # left endpoints as 0/1 integer combinations, in position order
        self.order = iet.order0
        self.left_coeffs = []
        for a in range(d):
            self.left_coeffs.append(tuple(
                1 if iet.pair.pi0[b] < iet.pair.pi0[a] else 0 for b in range(d)))
        img_left = []
        for a in range(d):
            img_left.append(tuple(
                1 if iet.pair.pi1[b] < iet.pair.pi1[a] else 0 for b in range(d)))
        self.w_coeffs = [tuple(i - l for i, l in zip(img_left[a], self.left_coeffs[a]))
                         for a in range(d)]
        self.lefts_f = [float(iet.left[a]) for a in self.order]
        self.w_f = [float(t) for t in iet.translations]
        self.total_f = float(iet.total)
        self.guard = GUARD
        self.counts = [0] * d
        self.steps = 0
        self._since_resync = 0
        self.x_f = self._exact_float()

    @classmethod
    def at_depth(cls, periodic: PeriodicIet, level: int, coeffs, den: int = 1
                 ) -> "ExactWalker":
        """Walker for the depth-``level`` induced exchange, still exact.

        The induced exchange has the same pair with lengths contracted
        by the period scale; all its lattice data stays integral because
        the period matrix is unimodular.  One step of this walker is one
        step of the induced map, not of the base map.
        """
        wk = cls(periodic.iet, coeffs, den)
        if level == 0:
            return wk
        d = periodic.d
        ctx = periodic.ctx
        a_inv = intmat.inverse_unimodular(
            intmat.matpow(periodic.step_matrix, level))
        lefts, widths = [], []
        for a in range(d):
            lc, wc = depth_interval_coeffs(periodic, level, a)
            lefts.append(lc)
            widths.append(wc)
        img_left = []
        pair = periodic.pair
        for a in range(d):
            vec = [0] * d
            for c in range(d):
                if pair.pi1[c] < pair.pi1[a]:
                    for j in range(d):
                        vec[j] += a_inv[c][j]
            img_left.append(tuple(vec))
        wk.left_coeffs = [tuple(l) for l in lefts]
        wk.w_coeffs = [tuple(i - l for i, l in zip(img_left[a], lefts[a]))
                       for a in range(d)]
        lam = periodic.lengths.values
        left_mpf = [ctx.dot_int(lefts[a], lam) for a in range(d)]
        w_mpf = [ctx.dot_int(wk.w_coeffs[a], lam) for a in range(d)]
        wk.lefts_f = [float(left_mpf[a]) for a in wk.order]
        wk.w_f = [float(w) for w in w_mpf]
        total = ctx.dot_int(depth_total_coeffs(periodic, level), lam)
        wk.total_f = float(total)
        wk.guard = max(wk.total_f * GUARD, 1e-300)
        wk.x_f = wk._exact_float()
        return wk

    def _exact_mpf(self):
        ctx = self.iet.ctx
        return ctx.dot_int(self.coeffs, self.lam_mpf) / self.den

    def _exact_float(self) -> float:
        return float(self._exact_mpf())

    def _exact_side(self, endpoint_coeffs) -> int:
        """Sign of (position - endpoint); 0 only for exact lattice equality."""
        diff = [c - self.den * e for c, e in zip(self.coeffs, endpoint_coeffs)]
        return certified_lattice_sign(self.iet, diff)

    def locate(self) -> int:
        xf = self.x_f
        order = self.order
        lefts = self.lefts_f
        lo = 0
        for k in range(1, self.d):
            if lefts[k] <= xf:
                lo = k
            else:
                break
        # guard band: decide exactly near either endpoint of the candidate
        near_left = abs(xf - lefts[lo]) < self.guard
        near_right = (lo + 1 < self.d and abs(lefts[lo + 1] - xf) < self.guard)
        if near_left or near_right:
            lo = self._locate_exact()
        return order[lo]

    def _locate_exact(self) -> int:
        pos = 0
        for k in range(1, self.d):
            side = self._exact_side(self.left_coeffs[self.order[k]])
            if side >= 0:
                pos = k
            else:
                break
        self.x_f = self._exact_float()
        return pos

    def position(self):
        """Current position as an exact context real."""
        return self._exact_mpf()

    def coeff_snapshot(self) -> tuple:
        return tuple(self.coeffs), self.den

    def step(self) -> int:
        """Advance one step; returns the interval index that was left."""
        a = self.locate()
        w = self.w_coeffs[a]
        den = self.den
        coeffs = self.coeffs
        for j in range(self.d):
            coeffs[j] += den * w[j]
        self.x_f += self.w_f[a]
        self.counts[a] += 1
        self.steps += 1
        self._since_resync += 1
        if self._since_resync >= self.RESYNC:
            self.x_f = self._exact_float()
            self._since_resync = 0
        return a

    def run(self, n_steps: int) -> tuple:
        for _ in range(n_steps):
            self.step()
        return tuple(self.counts)

    def run_until_below(self, threshold_coeffs, threshold_f: float) -> tuple:
        """Step until the position drops below an exact lattice threshold.

        Returns the visit counts accumulated before the first return.
        The threshold is (threshold_coeffs . lambda); comparisons inside
        the guard band are settled exactly.
        """
        while True:
            self.step()
            if self.x_f < threshold_f - self.guard:
                break
            if self.x_f < threshold_f + self.guard:
                diff = [self.den * t - c for c, t in
                        zip(self.coeffs, threshold_coeffs)]
                side = certified_lattice_sign(self.iet, diff)
                if side > 0:
                    break
                # exact hit means the point is on the boundary: keep going
        return tuple(self.counts)


def certified_lattice_sign(iet: Iet, coeffs) -> int:
    """Exact sign of an integer combination of the stored lengths.

    The stored lengths are dyadic rationals, so a wide-enough mantissa
    makes the weighted sum exact; the fast path only needs the working
    precision when the value clears a rounding margin.  Zero means the
    combination vanishes for the simulated lengths (a genuine boundary
    hit, handled by the left-closed convention).
    """
    if all(c == 0 for c in coeffs):
        return 0
    ctx = iet.ctx
    val = ctx.dot_int(coeffs, iet.lengths.values)
    scale = max(abs(c) for c in coeffs)
    margin = ctx.mp.mpf(2) ** (-(ctx.bits - 16)) * max(scale, 1)
    if abs(val) > margin:
        return 1 if val > 0 else -1
    # widen until the dyadic sum is exact: mantissas + coefficient bits
    extra = 64 + max(abs(c) for c in coeffs).bit_length()
    wide = ctx.spawn(ctx.bits + extra)
    lam_wide = [wide.real(v) for v in iet.lengths.values]
    val = wide.dot_int(coeffs, lam_wide)
    if val == 0:
        return 0
    return 1 if val > 0 else -1


def interval_coeff_vectors(iet: Iet) -> list:
    """Integer 0/1 coefficient vectors of the left endpoints."""
    d = iet.d
    return [tuple(1 if iet.pair.pi0[b] < iet.pair.pi0[a] else 0 for b in range(d))
            for a in range(d)]


def depth_interval_coeffs(periodic: PeriodicIet, n: int, letter: int) -> tuple:
    """Integer lattice data of the depth-n subinterval of a letter.

    Returns (left_coeffs, width_coeffs): integer combinations of the
    unit lengths giving the left endpoint and width of the letter's
    interval in the depth-n induced exchange (depth counted in
    normalized periods).  Exactness comes from the unimodularity of the
    period matrix.
    """
    a_inv_n = intmat.inverse_unimodular(intmat.matpow(periodic.step_matrix, n))
    d = periodic.d
    pair = periodic.pair
    left = [0] * d
    for c in range(d):
        if pair.pi0[c] < pair.pi0[letter]:
            for j in range(d):
                left[j] += a_inv_n[c][j]
    return tuple(left), tuple(a_inv_n[letter])


def depth_total_coeffs(periodic: PeriodicIet, n: int) -> tuple:
    """Integer coefficients of the depth-n total interval length."""
    a_inv_n = intmat.inverse_unimodular(intmat.matpow(periodic.step_matrix, n))
    d = periodic.d
    return tuple(sum(a_inv_n[c][j] for c in range(d)) for j in range(d))


# ---------------------------------------------------------------------------
# Birkhoff sums


def birkhoff_visit_counts(iet: Iet, x, n: int) -> tuple:
    """Exact per-interval visit counts of the length-n forward orbit.

    ``x`` may be a context real (snapped to the lattice via rational
    approximation is not attempted: exactness then degrades to the
    float-shadow guard) or a (coeffs, den) lattice point.
    """
    if isinstance(x, tuple) and len(x) == 2 and isinstance(x[1], int):
        walker = ExactWalker(iet, x[0], x[1])
        return walker.run(n)
    counts = [0] * iet.d
    cur = x
    for k in range(n):
        a = iet.interval_index(cur, step_index=k)
        counts[a] += 1
        cur = cur + iet.translations[a]
    return tuple(counts)


def birkhoff_sum(cocycle: Cocycle, iet: Iet, x, n: int) -> tuple:
    """Cocycle sum along the orbit: standard three-case definition."""
    if n == 0:
        return tuple(0 for _ in range(cocycle.dim))
    if n > 0:
        acc = [0] * cocycle.dim
        cur = x
        for k in range(n):
            val = evaluate(cocycle, iet, cur, step_index=k)
            for i in range(cocycle.dim):
                acc[i] = acc[i] + val[i]
            cur = iet.apply(cur, step_index=k)
        return tuple(acc)
    inv = iet.inverse()
    acc = [0] * cocycle.dim
    cur = x
    for k in range(-n):
        cur = inv.apply(cur, step_index=-k - 1)
        val = evaluate(cocycle, iet, cur, step_index=-k - 1)
        for i in range(cocycle.dim):
            acc[i] = acc[i] + val[i]
    return tuple(-v for v in acc)


# ---------------------------------------------------------------------------
# partitions


@dataclass(frozen=True)
class PartitionReport:
    n: int
    breakpoints: tuple
    min_gap: object
    max_gap: object
    translation_verified: bool


def partition_breakpoints(iet: Iet, n: int) -> list:
    """Sorted breakpoints {T^-k l_a : 0 <= k < n} of the n-th partition.

    The backward orbits may genuinely coincide (the preimage of 0 is a
    left endpoint, which Keane permits); coincidences within eps_cmp are
    merged into one breakpoint.
    """
    inv = iet.inverse()
    points = []
    for a in range(iet.d):
        cur = iet.left[a]
        points.append(cur)
        for _k in range(1, n):
            cur = inv.apply(cur)
            points.append(cur)
    points.sort()
    merged = [points[0]]
    for p in points[1:]:
        if p - merged[-1] > iet.ctx.eps_cmp:
            merged.append(p)
    return merged


def partition_pn(iet: Iet, n: int, verify_samples: int = 0) -> PartitionReport:
    """Partition into continuity intervals of the n-th iterate.

    Gap statistics cover all intervals of the partition; optionally the
    translation property of T^n is spot-checked on sample gaps.
    """
    if n < 1:
        raise DomainError("partition order must be >= 1")
    pts = partition_breakpoints(iet, n)
    mp = iet.ctx.mp
    gaps = [b - a for a, b in zip(pts, pts[1:])] + [iet.total - pts[-1]]
    min_gap, max_gap = min(gaps), max(gaps)
    if min_gap <= iet.ctx.eps_cmp:
        raise KeaneViolation(f"partition {n} has a collapsed gap")
    verified = True
    if verify_samples:
        stride = max(1, len(pts) // verify_samples)
        for idx in range(0, len(pts), stride):
            left = pts[idx]
            right = pts[idx + 1] if idx + 1 < len(pts) else iet.total
            w = right - left
            a1 = iet.orbit(left + w / 4, n)[-1] - (left + w / 4)
            a2 = iet.orbit(left + 3 * w / 4, n)[-1] - (left + 3 * w / 4)
            if abs(a1 - a2) > iet.ctx.eps_cmp * 16:
                verified = False
    return PartitionReport(n, tuple(pts), min_gap, max_gap, verified)


def gap_statistics(iet: Iet, n_max: int, dedupe_tol: float = 1e-11) -> list:
    """min/max partition gap for every n <= n_max, computed incrementally.

    Returns a list of (n, min_gap, max_gap) floats.  Backward orbits are
    generated at working precision and tracked as floats.  Orbit points
    landing on an existing breakpoint (the preimage chain of 0 always
    does) are merged; genuine near-collisions below the dedupe tolerance
    would merge too, so the reported minimum is a lower-bounded claim.
    """
    inv = iet.inverse()
    starts = [iet.left[a] for a in range(iet.d)]
    pts = [0.0, float(iet.total)]
    gap_count: dict = {float(iet.total): 1}
    heap = [-float(iet.total)]
    min_gap = float(iet.total)
    orbits = [s for s in starts]
    out = []
    for n in range(1, n_max + 1):
        if n == 1:
            batch = [float(s) for s in starts if s > 0]
        else:
            orbits = [inv.apply(x) for x in orbits]
            batch = [float(x) for x in orbits]
        for xf in batch:
            idx = _insort_index(pts, xf)
            lo, hi = pts[idx - 1], pts[idx + 1]
            g1, g2 = xf - lo, hi - xf
            if g1 < dedupe_tol or g2 < dedupe_tol:
                pts.pop(idx)  # duplicate of an existing breakpoint
                continue
            old = hi - lo
            gap_count[old] = gap_count.get(old, 0) - 1
            for g in (g1, g2):
                gap_count[g] = gap_count.get(g, 0) + 1
                heappush(heap, -g)
            min_gap = min(min_gap, g1, g2)
        while heap and gap_count.get(-heap[0], 0) <= 0:
            heappop(heap)
        out.append((n, min_gap, -heap[0]))
    return out


def _insort_index(pts: list, x: float) -> int:
    from bisect import bisect_left

    idx = bisect_left(pts, x)
    pts.insert(idx, x)
    return idx


# ---------------------------------------------------------------------------
# towers and return times


def return_time_matrix(periodic: PeriodicIet, k: int, l: int):
    """Return-time matrix between induction depths k <= l (base periods)."""
    if not 0 <= k <= l:
        raise DomainError("need 0 <= k <= l")
    return intmat.matpow(periodic.matrix, l - k)


@dataclass(frozen=True)
class TowerStructure:
    """Sub-towers over the depth-(n+1) intervals, constant height.

    ``heights[a]`` is the return time of the depth-n interval of letter
    a, ``climb_heights[a]`` the one of depth n+1 (the climb length in
    the value identity).  The sub-tower over the depth-(n+1) interval of
    letter a has ``sub_height`` levels (the depth-n height over the
    first letter).
    """

    level: int
    heights: tuple
    climb_heights: tuple
    sub_height: int
    base_left: tuple
    base_width: tuple
    measures: tuple
    levels: tuple | None = None

    def to_json(self, ctx) -> dict:
        return {"level": self.level,
                "heights": list(self.heights),
                "climb_heights": list(self.climb_heights),
                "sub_height": self.sub_height,
                "base_left": [ctx.str_of(v) for v in self.base_left],
                "base_width": [ctx.str_of(v) for v in self.base_width],
                "measures": [ctx.str_of(v) for v in self.measures]}


def towers(periodic: PeriodicIet, n: int, with_levels: bool = False,
           level_budget: int = 200_000) -> TowerStructure:
    """Tower structure at depth n (in normalized periods).

    Levels are enumerated explicitly only on request and within a step
    budget; heights and measures are exact regardless.
    """
    if n < 0:
        raise DomainError("tower depth must be >= 0")
    ctx = periodic.ctx
    a_n = intmat.matpow(periodic.step_matrix, n)
    a_n1 = intmat.matmul(a_n, periodic.step_matrix)
    heights_n = intmat.column_sums(a_n)
    heights_n1 = intmat.column_sums(a_n1)
    alpha1 = periodic.first_letter()
    # nesting invariant: depth-(n+1) interval sits inside the first letter
    scale = periodic.step_scale ** (-(n + 1))
    lam1 = periodic.lengths[alpha1]
    if not (periodic.step_scale ** (-1)) <= lam1:
        raise NotNormalized("depth-1 interval does not nest in the first letter")
    iet = periodic.iet
    sub_h = heights_n[alpha1]
    base_left = tuple(iet.left[a] * scale for a in range(periodic.d))
    base_width = tuple(periodic.lengths[a] * scale for a in range(periodic.d))
    measures = tuple(w * sub_h for w in base_width)
    levels = None
    if with_levels:
        total_steps = sub_h * periodic.d
        if total_steps > level_budget:
            raise DomainError(
                f"level enumeration needs {total_steps} steps, over the budget")
        levels = []
        for a in range(periodic.d):
            lc, _wc = depth_interval_coeffs(periodic, n + 1, a)
            walker = ExactWalker(iet, lc, 1)
            lvl = []
            for _i in range(sub_h):
                lvl.append(walker.position())
                walker.step()
            levels.append(tuple(lvl))
        levels = tuple(levels)
    return TowerStructure(n, heights_n, heights_n1, sub_h, base_left,
                          base_width, measures, levels)


# ---------------------------------------------------------------------------
# renormalization


@dataclass(frozen=True)
class RenormState:
    """A cocycle carried to induction depth ``level``, unit-rescaled.

    Positions in the cocycle are expressed on [0, 1): the physical
    cocycle on the depth-``level`` interval is obtained by shrinking all
    positions by the accumulated scale.  ``jump_steps[i]`` counts the
    original-map steps from the i-th pulled-back jump position to the
    physical point it came from (tower level bookkeeping for probes).
    """

    level: int
    cocycle: Cocycle
    jump_steps: tuple = ()


class Renormalizer:
    """One-period renormalization operator for a periodic-type exchange.

    The tower geometry of a single normalized period over the unit
    exchange is computed once and reused for every depth; only the step
    bookkeeping (return-time costs) depends on the depth.
    """

    def __init__(self, periodic: PeriodicIet):
        self.periodic = periodic
        self.iet = periodic.iet
        self.matrix = periodic.step_matrix
        self.rho = periodic.step_scale
        self.colsums = intmat.column_sums(self.matrix)
        self._stage = self._walk_stage()

    def _walk_stage(self) -> list:
        """Per letter: the tower levels (position, interval) of one period.

        Tower level endpoints genuinely coincide with interval
        breakpoints, so the walk runs on the exact lattice engine; the
        level positions are read back at working precision.
        """
        iet = self.iet
        width_mpf = [iet.lengths[b] / self.rho for b in range(iet.d)]
        right_coeffs = []
        lefts = interval_coeff_vectors(iet)
        for a in range(iet.d):
            rc = list(lefts[a])
            rc[a] += 1
            right_coeffs.append(tuple(rc))
        stage = []
        for b in range(iet.d):
            q = self.colsums[b]
            lc, wc = depth_interval_coeffs(self.periodic, 1, b)
            walker = ExactWalker(iet, lc, 1)
            positions = []
            alphas = []
            for _i in range(q):
                positions.append(walker.position())
                start, den = walker.coeff_snapshot()
                a = walker.step()
                alphas.append(a)
                # the whole level must nest in one exchanged interval:
                # level left + width <= right endpoint of that interval
                diff = [s + w - den * r for s, w, r in
                        zip(start, wc, right_coeffs[a])]
                if certified_lattice_sign(iet, diff) > 0:
                    raise NotNormalized(
                        "tower level crosses an exchanged-interval boundary")
            stage.append((tuple(positions), tuple(alphas), width_mpf[b]))
        # internal consistency: visit counts reproduce the period matrix
        for b in range(iet.d):
            _positions, alphas, _w = stage[b]
            for a in range(iet.d):
                if alphas.count(a) != self.matrix[a][b]:
                    raise NotNormalized(
                        "stage walk visit counts disagree with the matrix")
        return stage

    def start(self, cocycle: Cocycle) -> RenormState:
        jump_steps = ()
        if isinstance(cocycle, StepCocycle):
            validate_jumps(cocycle, self.iet)
            jump_steps = tuple(0 for _ in cocycle.jumps)
        return RenormState(0, cocycle, jump_steps)

    def advance(self, state: RenormState) -> RenormState:
        if isinstance(state.cocycle, StepCocycle):
            return self._advance_step(state)
        if isinstance(state.cocycle, PiecewiseLinearCocycle):
            return self._advance_pl(state)
        raise Unsupported(f"cannot renormalize {type(state.cocycle).__name__}")

    def to_depth(self, cocycle: Cocycle, depth: int) -> RenormState:
        state = self.start(cocycle)
        for _ in range(depth):
            state = self.advance(state)
        return state

    def _level_costs(self, level: int) -> tuple:
        """Return-time of each unit interval at the given depth, in base steps."""
        a_k = intmat.matpow(self.matrix, level)
        return intmat.column_sums(a_k)

    def _advance_step(self, state: RenormState) -> RenormState:
        iet = self.iet
        ctx = iet.ctx
        phi = state.cocycle
        dim = phi.dim
        costs = self._level_costs(state.level)
        new_values = []
        for b in range(iet.d):
            positions, alphas, _w = self._stage[b]
            acc = [0] * dim
            for p, a in zip(positions, alphas):
                val = _eval_step_at(phi, iet, a, p)
                for i in range(dim):
                    acc[i] = acc[i] + val[i]
            new_values.append(tuple(acc))
        new_jumps = []
        new_steps = []
        for (g, jvec), t_old in zip(phi.jumps, state.jump_steps):
            b, i, p, width = self._find_level(g, ctx)
            cum = 0
            _positions, alphas, _w = self._stage[b]
            for jj in range(i):
                cum += costs[alphas[jj]]
            u = iet.left[b] + self.rho * (g - p)
            if (u - iet.left[b] < ctx.eps_cmp
                    or iet.right[b] - u < ctx.eps_cmp):
                raise NearBreakpoint("pulled-back jump collides with an endpoint")
            new_jumps.append((u, jvec))
            new_steps.append(t_old + cum)
        order = sorted(range(len(new_jumps)), key=lambda t: new_jumps[t][0])
        cocycle = StepCocycle(dim, tuple(new_values),
                              tuple(new_jumps[i] for i in order))
        return RenormState(state.level + 1, cocycle,
                           tuple(new_steps[i] for i in order))

    def _advance_pl(self, state: RenormState) -> RenormState:
        iet = self.iet
        mp = iet.ctx.mp
        phi = state.cocycle
        dim = phi.dim
        new_slopes = []
        new_consts = []
        for b in range(iet.d):
            positions, alphas, _w = self._stage[b]
            slope_b = [mp.fsum(phi.slopes[a][i] for a in alphas) / self.rho
                       for i in range(dim)]
            const_b = [mp.fsum(phi.slopes[a][i] * p + phi.constants[a][i]
                               for p, a in zip(positions, alphas))
                       - slope_b[i] * iet.left[b]
                       for i in range(dim)]
            new_slopes.append(tuple(slope_b))
            new_consts.append(tuple(const_b))
        cocycle = PiecewiseLinearCocycle(dim, tuple(new_slopes), tuple(new_consts))
        return RenormState(state.level + 1, cocycle, ())

    def _find_level(self, g, ctx):
        for b in range(self.iet.d):
            positions, _alphas, width = self._stage[b]
            for i, p in enumerate(positions):
                if p <= g < p + width:
                    return b, i, p, width
        raise NearBreakpoint("jump position not inside any tower level")

    def interval_averages(self, state: RenormState) -> list:
        """Average of the state's cocycle over each unit interval."""
        iet = self.iet
        mp = iet.ctx.mp
        phi = state.cocycle
        if isinstance(phi, PiecewiseLinearCocycle):
            return [tuple(phi.slopes[a][i] * (iet.left[a] + iet.right[a]) / 2
                          + phi.constants[a][i] for i in range(phi.dim))
                    for a in range(iet.d)]
        out = []
        for a in range(iet.d):
            acc = list(phi.values[a])
            for g, j in phi.jumps:
                if iet.left[a] < g < iet.right[a]:
                    w = (iet.right[a] - g) / iet.lengths[a]
                    for i in range(phi.dim):
                        acc[i] = acc[i] + j[i] * w
            out.append(tuple(acc))
        return out

    def sup_norm(self, state: RenormState):
        return sup_norm(state.cocycle, self.iet)



def _eval_step_at(phi: StepCocycle, iet: Iet, a: int, x) -> tuple:
    out = list(phi.values[a])
    for g, j in phi.jumps:
        if iet.left[a] < g <= x:
            for i in range(phi.dim):
                out[i] = out[i] + j[i]
        elif g > x:
            break
    return tuple(out)


def renormalize(cocycle: Cocycle, periodic: PeriodicIet, k: int, l: int,
                renormalizer: Renormalizer | None = None) -> RenormState:
    """Carry a depth-k cocycle to depth l; positions stay unit-rescaled.

    The input is interpreted at depth k in unit coordinates; the result
    is the renormalized cocycle at depth l.  Step cocycles stay step
    cocycles (jumps pulled back), piecewise linear ones acquire
    per-interval slopes.
    """
    if not 0 <= k <= l:
        raise DomainError("need 0 <= k <= l")
    if not isinstance(cocycle, (StepCocycle, PiecewiseLinearCocycle)):
        raise Unsupported(f"unsupported cocycle class {type(cocycle).__name__}")
    rz = renormalizer or Renormalizer(periodic)
    state = RenormState(k, cocycle,
                        tuple(0 for _ in cocycle.jumps)
                        if isinstance(cocycle, StepCocycle) else ())
    for _ in range(l - k):
        state = rz.advance(state)
    return state


# ---------------------------------------------------------------------------
# orbit-growth index


@dataclass(frozen=True)
class MIndexReport:
    m: int
    n: int
    sandwich_low: int
    sandwich_high: int

    @property
    def sandwich_holds(self) -> bool:
        return self.sandwich_low <= self.n <= self.sandwich_high


def m_index(periodic: PeriodicIet, x, n: int) -> MIndexReport:
    """Deepest induction interval visited at least twice in n+1 steps.

    Satisfies the return-time sandwich: the smallest depth-m return time
    is at most n, and n is at most d times the largest depth-(m+1) one.
    """
    iet = periodic.iet
    pts = iet.orbit(x, n)
    vals = sorted(pts)
    second = vals[1]
    rho = periodic.pf_value
    mp = iet.ctx.mp
    if second <= 0:
        raise DomainError("degenerate orbit for the depth index")
    m = int(mp.floor(-mp.log(second) / mp.log(rho)))
    m = max(m, 0)
    while rho ** (-(m + 1)) > second:
        m += 1
    while m > 0 and rho ** (-m) <= second:
        m -= 1
    q_m = intmat.column_sums(intmat.matpow(periodic.matrix, m))
    q_m1 = intmat.column_sums(intmat.matpow(periodic.matrix, m + 1))
    return MIndexReport(m, n, min(q_m), periodic.d * max(q_m1))


def m_index_bruteforce(periodic: PeriodicIet, x, n: int) -> int:
    """Definitional scan: count visits to each induction interval."""
    iet = periodic.iet
    pts = iet.orbit(x, n)
    rho = periodic.pf_value
    m = 0
    while True:
        bound = rho ** (-(m + 1))
        if sum(1 for p in pts if p < bound) >= 2:
            m += 1
        else:
            return m


# ---------------------------------------------------------------------------
# deviation sweeps (float lane)


@dataclass(frozen=True)
class DeviationProfile:
    """Growth data for sup-norms of Birkhoff sums along sampled orbits."""

    checkpoints: tuple
    envelope: tuple           # per cocycle: tuple of running sup values
    pointwise: tuple          # per cocycle: tuple of per-checkpoint sups
    fitted_exponent: tuple    # per cocycle, raw log-log slope
    corrected_exponent: tuple  # per cocycle, log-factor-corrected slope
    aborted_samples: int
    sample_count: int
    log_power: int

    def to_rows(self, index: int = 0) -> list:
        return [(n, s) for n, s in zip(self.checkpoints, self.envelope[index])]


def _geometric_checkpoints(n_max: int, per_decade: int = 8) -> list:
    out = []
    n = 1
    ratio = 10 ** (1.0 / per_decade)
    while n <= n_max:
        out.append(n)
        n = max(n + 1, int(round(n * ratio)))
    if out[-1] != n_max:
        out.append(n_max)
    return out


def _float_mirror(iet: Iet):
    order = iet.order0
    lefts = [float(iet.left[a]) for a in order]
    rights = [float(iet.right[a]) for a in order]
    moves = [float(iet.translations[a]) for a in order]
    letters = list(order)
    return lefts, rights, moves, letters


def _sweep_one_sample(args):
    """Walk one float orbit and record checkpoint sups for every cocycle.

    Plain-data in, plain-data out, so worker processes can run it.
    Returns (ok, per-cocycle checkpoint sup lists).
    """
    x0f, d, lefts_arr, rights, moves, specs, checkpoints = args
    n_c = len(specs)
    xf = x0f
    counts = [0] * d
    possum = [0.0] * d
    cross = [[0] * len(spec[4] or []) for spec in specs]
    local_sup = [[0.0] * len(checkpoints) for _ in range(n_c)]
    ok = True
    ck_iter = iter(enumerate(checkpoints))
    ck_idx, ck_n = next(ck_iter)
    step_no = 0
    while True:
        if step_no == ck_n:
            for ci, spec in enumerate(specs):
                local_sup[ci][ck_idx] = _sweep_value(spec, counts, possum,
                                                     cross[ci])
            nxt = next(ck_iter, None)
            if nxt is None:
                break
            ck_idx, ck_n = nxt
        # locate
        lo = 0
        for k in range(1, d):
            if lefts_arr[k] <= xf:
                lo = k
            else:
                break
        if (xf - lefts_arr[lo] < GUARD
                or (lo + 1 < d and lefts_arr[lo + 1] - xf < GUARD)
                or rights[lo] - xf < GUARD):
            ok = False
            break
        for ci, spec in enumerate(specs):
            if spec[0] == "step" and spec[4]:
                for ji, (slot, gf, _j) in enumerate(spec[4]):
                    if slot == lo and xf >= gf:
                        if xf - gf < GUARD:
                            ok = False
                        cross[ci][ji] += 1
                if not ok:
                    break
        if not ok:
            break
        counts[lo] += 1
        possum[lo] += xf
        xf += moves[lo]
        step_no += 1
    return ok, local_sup


def deviation_sweep(iet: Iet, cocycles, n_max: int, samples: int = 8,
                    seed: int = 0, log_power: int = 2,
                    tail_from: int | None = None,
                    workers: int = 1) -> DeviationProfile:
    """Shared-orbit float sweep of several cocycles over one exchange.

    All cocycles are evaluated on the same sampled orbits through the
    per-interval visit-count and position-sum skeleton, so the per-step
    cost is independent of how many cocycles are profiled.  Samples that
    enter the guard band around a breakpoint are skipped and counted.
    With workers > 1 the samples run in worker processes; the merge is
    a pointwise maximum, so results match the serial run exactly.
    """
    ctx = iet.ctx
    d = iet.d
    lefts, rights, moves, letters = _float_mirror(iet)
    checkpoints = _geometric_checkpoints(n_max)
    starts = kronecker_samples(ctx, samples, iet.total, seed)
    specs = []
    for c in cocycles:
        if isinstance(c, PiecewiseLinearCocycle):
            slopes = [[float(c.slopes[a][i]) for a in letters] for i in range(c.dim)]
            consts = [[float(c.constants[a][i]) for a in letters] for i in range(c.dim)]
            specs.append(("pl", c.dim, slopes, consts, None))
        elif isinstance(c, StepCocycle):
            vals = [[float(c.values[a][i]) for a in letters] for i in range(c.dim)]
            jmp = []
            for g, j in c.jumps:
                gf = float(g)
                slot = next(k for k in range(d)
                            if lefts[k] <= gf < rights[k])
                jmp.append((slot, gf, [float(x) for x in j]))
            specs.append(("step", c.dim, vals, None, jmp))
        else:
            raise Unsupported("deviation sweep supports step and pl cocycles")
    n_c = len(cocycles)
    point_sup = [[0.0] * len(checkpoints) for _ in range(n_c)]
    aborted = 0
    used = 0
    jobs = [(float(x0), d, lefts, rights, moves, specs, checkpoints)
            for x0 in starts]
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_one_sample, jobs))
    else:
        results = [_sweep_one_sample(job) for job in jobs]
    for ok, local_sup in results:
        if ok:
            used += 1
            for ci in range(n_c):
                dst = point_sup[ci]
                src = local_sup[ci]
                for t in range(len(checkpoints)):
                    if src[t] > dst[t]:
                        dst[t] = src[t]
        else:
            aborted += 1
    envelope = []
    for ci in range(n_c):
        env = []
        best = 0.0
        for v in point_sup[ci]:
            best = max(best, v)
            env.append(best)
        envelope.append(tuple(env))
    tail_from = tail_from or max(64, int(n_max ** 0.4))
    raw = []
    corrected = []
    for ci in range(n_c):
        raw.append(_loglog_slope(checkpoints, envelope[ci], tail_from, 0))
        corrected.append(_loglog_slope(checkpoints, envelope[ci], tail_from,
                                       log_power))
    return DeviationProfile(tuple(checkpoints), tuple(envelope),
                            tuple(tuple(p) for p in point_sup),
                            tuple(raw), tuple(corrected), aborted, used,
                            log_power)


def _sweep_value(spec, counts, possum, cross) -> float:
    kind, dim, a1, a2, jumps = spec
    best = 0.0
    if kind == "pl":
        for i in range(dim):
            s = 0.0
            si = a1[i]
            ci = a2[i]
            for a in range(len(counts)):
                s += si[a] * possum[a] + ci[a] * counts[a]
            best = max(best, abs(s))
        return best
    for i in range(dim):
        s = 0.0
        vi = a1[i]
        for a in range(len(counts)):
            s += vi[a] * counts[a]
        for ji, (_slot, _gf, j) in enumerate(jumps or []):
            s += j[i] * cross[ji]
        best = max(best, abs(s))
    return best


def _loglog_slope(ns, values, tail_from: int, log_power: int) -> float:
    xs, ys = [], []
    for n, v in zip(ns, values):
        if n >= tail_from and v > 0:
            x = math.log(n)
            y = math.log(v) - log_power * math.log(math.log(max(n, 3)))
            xs.append(x)
            ys.append(y)
    if len(xs) < 3:
        return 0.0
    mx = sum(xs) / len(xs)
    my = sum(ys) / len(ys)
    num = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    den = sum((x - mx) ** 2 for x in xs)
    return num / den if den else 0.0


def cocycle_from_json(data: dict, ctx) -> Cocycle:
    """Load a step or piecewise-linear cocycle from its dict form."""
    kind = data.get("kind", "step")
    dim = int(data.get("dim", 1))
    if kind == "step":
        values = tuple(tuple(ctx.real(x) for x in row) for row in data["values"])
        jumps = tuple((ctx.real(e["gamma"]), tuple(ctx.real(x) for x in e["jump"]))
                      for e in data.get("extra_discontinuities", []))
        return StepCocycle(dim, values, jumps)
    if kind == "pl":
        if "slope" in data:
            slope = tuple(ctx.real(x) for x in data["slope"])
            consts = tuple(tuple(ctx.real(x) for x in row)
                           for row in data["constants"])
            return PiecewiseLinearCocycle.constant_slope(slope, consts)
        slopes = tuple(tuple(ctx.real(x) for x in row) for row in data["slopes"])
        consts = tuple(tuple(ctx.real(x) for x in row) for row in data["constants"])
        return PiecewiseLinearCocycle(dim, slopes, consts)
    raise Unsupported(f"unknown cocycle kind {kind!r}")


def cocycle_to_json(cocycle: Cocycle, ctx) -> dict:
    if isinstance(cocycle, StepCocycle):
        return {"kind": "step", "dim": cocycle.dim,
                "values": [[ctx.str_of(x) for x in row] for row in cocycle.values],
                "extra_discontinuities": [
                    {"gamma": ctx.str_of(g), "jump": [ctx.str_of(x) for x in j]}
                    for g, j in cocycle.jumps]}
    return {"kind": "pl", "dim": cocycle.dim,
            "slopes": [[ctx.str_of(x) for x in row] for row in cocycle.slopes],
            "constants": [[ctx.str_of(x) for x in row]
                          for row in cocycle.constants]}


def deviation_profile(cocycle: Cocycle, periodic: PeriodicIet, n_max: int,
                      samples: int = 8, seed: int = 0,
                      log_power: int | None = None,
                      workers: int = 1) -> DeviationProfile:
    """Growth profile of one zero-mean cocycle over a periodic exchange.

    The log-factor correction power defaults to M + 1 where M is the
    maximal Jordan block of the period matrix.
    """
    if log_power is None:
        from .spectral import lyapunov_spectrum

        spec = lyapunov_spectrum(periodic.matrix, periodic.ctx)
        log_power = spec.max_jordan_block + 1
    return deviation_sweep(periodic.iet, [cocycle], n_max, samples, seed,
                           log_power, workers=workers)
