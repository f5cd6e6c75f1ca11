"""Skew products, essential-value probes, and cocycle classification.

Nothing here claims ergodicity: orbits and towers produce *evidence*
(candidate essential values with tower measures attached, recurrence
statistics, coboundary certificates) that a skew product behaves as the
theory predicts.  Exact integer structure is used wherever it exists:
fixed spaces of the transpose matrix are computed over the integers,
and candidate values from integer step cocycles stay integers all the
way through renormalization.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import intmat
from .cocycles import (Cocycle, PiecewiseLinearCocycle, Renormalizer,
                       StepCocycle, evaluate)
from .errors import (DomainError, EmptyFixedSpace, NotZeroMean, Unsupported)
from .precision import PrecisionContext, kronecker_samples
from .rauzy import Iet, PeriodicIet
from .spectral import Splitting, singularity_data


# ---------------------------------------------------------------------------
# integer fixed space of the transpose


@dataclass(frozen=True)
class FixedSpaceBasis:
    """Integer basis of the fixed vectors of the transpose matrix.

    ``letter_vectors[a]`` collects the a-th coordinate of every basis
    vector; the fixed-space theorem needs these to generate the full
    integer lattice, certified by the Smith form of the basis matrix.
    """

    vectors: tuple
    letter_vectors: tuple
    generates_lattice: bool
    kappa: int
    exceeds_minimum: bool

    @property
    def k(self) -> int:
        return len(self.vectors)


def fixed_space_basis(periodic: PeriodicIet) -> FixedSpaceBasis:
    """Exact integer kernel basis of (A^t - I), reduced and verified."""
    a_t = intmat.mat_transpose(periodic.step_matrix)
    d = periodic.d
    shifted = tuple(tuple(a_t[i][j] - (1 if i == j else 0) for j in range(d))
                    for i in range(d))
    basis = intmat.integer_kernel(shifted)
    if not basis:
        raise EmptyFixedSpace("transpose matrix has no nonzero fixed vectors")
    ctx = periodic.ctx
    for v in basis:
        image = intmat.mat_vec(a_t, v)
        if tuple(image) != tuple(v):
            raise DomainError("kernel vector is not exactly fixed")
        ip = abs(ctx.mp.fsum(x * l for x, l in zip(v, periodic.lengths)))
        if ip > ctx.eps_cmp * 64:
            raise DomainError("fixed vector fails the zero-mean check")
    k = len(basis)
    letter_vectors = tuple(tuple(v[a] for v in basis) for a in range(d))
    snf_d, _u, _v = intmat.smith_normal_form([list(w) for w in letter_vectors])
    diag = [snf_d[i][i] for i in range(min(len(snf_d), len(snf_d[0])))]
    generates = all(x == 1 for x in diag[:k]) and len([x for x in diag if x]) >= k
    sdata = singularity_data(periodic.pair)
    return FixedSpaceBasis(tuple(tuple(v) for v in basis), letter_vectors,
                           generates, sdata.kappa, k > sdata.kappa - 1)


def build_fixed_cocycle(basis: FixedSpaceBasis) -> StepCocycle:
    """Integer-vector step cocycle whose coordinates are the basis rows."""
    if basis.k < 1:
        raise EmptyFixedSpace("need at least one fixed vector")
    return StepCocycle(basis.k, basis.letter_vectors)


def compose_linear(matrix_rows, cocycle: StepCocycle) -> StepCocycle:
    """Apply a linear map to the values of a step cocycle (R . phi)."""
    rows = [list(r) for r in matrix_rows]
    m = len(rows)
    if any(len(r) != cocycle.dim for r in rows):
        raise DomainError("matrix width must equal the cocycle dimension")
    new_values = tuple(
        tuple(sum(rows[i][t] * v[t] for t in range(cocycle.dim)) for i in range(m))
        for v in cocycle.values)
    new_jumps = tuple(
        (g, tuple(sum(rows[i][t] * j[t] for t in range(cocycle.dim))
                  for i in range(m)))
        for g, j in cocycle.jumps)
    return StepCocycle(m, new_values, new_jumps)


def dense_image_matrix(k: int, irrationals=None):
    """A (k-1) x k matrix whose integer-lattice image is dense.

    Rows are delta rows with an extra column of numbers rationally
    independent from 1; any nonzero rational combination of rows then
    leaves the integer lattice, which is the density criterion.
    """
    if k < 2:
        raise DomainError("need k >= 2 for a dense-image reduction")
    import math

    if irrationals is None:
        primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
        irrationals = [math.sqrt(p) for p in primes[:k - 1]]
    rows = []
    for i in range(k - 1):
        row = [1 if j == i else 0 for j in range(k - 1)]
        row.append(irrationals[i])
        rows.append(tuple(row))
    return tuple(rows)


# ---------------------------------------------------------------------------
# coboundary classification and lattice containment

COBOUNDARY = "Coboundary"
NOT_COBOUNDARY = "NotCoboundary"
CENTRAL_UNDETERMINED = "CentralUndetermined"


def coboundary_classify(vector, splitting: Splitting, periodic: PeriodicIet,
                        tolerance=None) -> str:
    """Growth-based trichotomy for a zero-mean step cocycle.

    Contracting vectors give bounded sums (hence coboundaries); any
    expanding component forces unbounded renormalizations (hence not);
    a purely central remainder is undecidable from growth alone.
    """
    ctx = periodic.ctx
    ip = abs(ctx.mp.fsum(v * l for v, l in zip(vector, periodic.lengths)))
    scale = max(max(abs(ctx.real(v)) for v in vector), ctx.mp.mpf(1))
    tol = tolerance if tolerance is not None else ctx.mp.mpf(2) ** (-(ctx.bits // 3))
    if ip > tol * scale:
        raise NotZeroMean("classification requires a zero-mean step vector")
    cs, cc, cu = splitting.components(vector)
    u_size = max((abs(c) for c in cu), default=ctx.mp.mpf(0))
    c_size = max((abs(c) for c in cc), default=ctx.mp.mpf(0))
    if u_size > tol * scale:
        return NOT_COBOUNDARY
    if c_size > tol * scale:
        return CENTRAL_UNDETERMINED
    return COBOUNDARY


@dataclass(frozen=True)
class LatticeReport:
    """Which scaled integer lattices contain all values and jumps."""

    scales: tuple
    contained: tuple
    residuals: tuple

    def containment(self) -> dict:
        return dict(zip(self.scales, self.contained))


def lattice_containment(cocycle: StepCocycle, scales, ctx: PrecisionContext,
                        tolerance=None) -> LatticeReport:
    """Check value and jump membership in each lattice c * Z^dim."""
    tol = tolerance if tolerance is not None else ctx.mp.mpf(10) ** (-20)
    entries = [x for v in cocycle.values for x in v]
    entries += [x for _g, j in cocycle.jumps for x in j]
    contained = []
    residuals = []
    for c in scales:
        cc = ctx.real(c)
        worst = ctx.mp.mpf(0)
        for x in entries:
            q = ctx.real(x) / cc
            worst = max(worst, abs(q - ctx.mp.nint(q)))
        contained.append(bool(worst <= tol))
        residuals.append(worst)
    return LatticeReport(tuple(scales), tuple(contained), tuple(residuals))


# ---------------------------------------------------------------------------
# essential-value probe through towers


@dataclass(frozen=True)
class TowerPiece:
    level: int
    letter: int
    piece_index: int
    value: tuple
    measure: object
    clean: bool


@dataclass(frozen=True)
class EssentialValueReport:
    """Constant climb values over sub-towers, tracked across depths.

    ``candidates`` holds the limits of convergent value tracks together
    with the smallest tower measure seen along the track: positive-mass
    towers with convergent climb values are exactly the evidence the
    tower criterion for essential values asks for.
    """

    pieces: tuple
    candidates: tuple
    contaminated_levels: tuple

    def candidate_values(self) -> list:
        return [c[0] for c in self.candidates]


def essential_value_probe(cocycle: Cocycle, periodic: PeriodicIet,
                          n_max: int, renormalizer: Renormalizer | None = None,
                          match_tol: float = 1e-9) -> EssentialValueReport:
    """Evaluate climb sums over the canonical sub-towers, depth by depth.

    For each depth n, the cocycle renormalized to depth n+1 is constant
    between its pulled-back jumps; pieces whose jumps all sit above the
    sub-tower height give constant climb values on positive-measure
    towers.  Tracks of values convergent in n become candidates.
    """
    if not isinstance(cocycle, (StepCocycle, PiecewiseLinearCocycle)):
        raise Unsupported("probe supports step and piecewise linear cocycles")
    if isinstance(cocycle, PiecewiseLinearCocycle):
        # linear parts shrink with the interval: probe the step skeleton
        raise Unsupported("probe the corrected step part of a linear cocycle")
    rz = renormalizer or Renormalizer(periodic)
    periodic_iet = periodic.iet
    ctx = periodic.ctx
    rho = periodic.step_scale
    pieces = []
    contaminated = []
    state = rz.start(cocycle)
    state = rz.advance(state)  # depth 1 = towers at level 0
    alpha1 = periodic.first_letter()
    for n in range(0, n_max + 1):
        # state is at depth n+1 here
        sub_height = intmat.column_sums(
            intmat.matpow(periodic.step_matrix, n))[alpha1]
        phi_n = state.cocycle
        scale = rho ** (-(n + 1))
        level_bad = False
        for a in range(periodic.d):
            cuts = [(g, j, t) for (g, j), t in zip(phi_n.jumps, state.jump_steps)
                    if periodic_iet.left[a] < g < periodic_iet.right[a]]
            bad = [c for c in cuts if c[2] < sub_height]
            if bad:
                level_bad = True
            bounds = [periodic_iet.left[a]] + [c[0] for c in cuts] \
                + [periodic_iet.right[a]]
            acc = list(phi_n.values[a])
            for idx in range(len(bounds) - 1):
                lo, hi = bounds[idx], bounds[idx + 1]
                if idx > 0:
                    jump = cuts[idx - 1][1]
                    for i in range(phi_n.dim):
                        acc[i] = acc[i] + jump[i]
                clean = not any(lo <= c[0] <= hi for c in bad)
                measure = (hi - lo) * scale * sub_height
                pieces.append(TowerPiece(n, a, idx, tuple(acc), measure, clean))
        if level_bad:
            contaminated.append(n)
        if n < n_max:
            state = rz.advance(state)
    candidates = _track_candidates(pieces, n_max, match_tol)
    return EssentialValueReport(tuple(pieces), tuple(candidates),
                                tuple(contaminated))


def _track_candidates(pieces, n_max: int, tol: float) -> list:
    """Cluster clean piece values across depths; convergent tracks win."""
    by_level: dict = {}
    for p in pieces:
        if p.clean:
            by_level.setdefault(p.level, []).append(p)
    tracks = []
    for n in sorted(by_level):
        for p in by_level[n]:
            val = tuple(float(x) for x in p.value)
            for track in tracks:
                if (track["last_level"] < n
                        and all(abs(a - b) <= tol * max(1.0, abs(a))
                                for a, b in zip(val, track["val"]))):
                    track["val"] = val
                    track["exact"] = p.value
                    track["last_level"] = n
                    track["count"] += 1
                    track["min_measure"] = min(track["min_measure"],
                                               float(p.measure))
                    break
            else:
                tracks.append({"val": val, "exact": p.value, "last_level": n,
                               "count": 1, "min_measure": float(p.measure)})
    out = []
    for track in tracks:
        if track["count"] >= max(2, (n_max + 1) // 2) \
                and track["last_level"] >= n_max - 1:
            out.append((track["exact"], track["count"], track["min_measure"]))
    return out


# ---------------------------------------------------------------------------
# skew-product recurrence statistics


@dataclass(frozen=True)
class RecurrenceStats:
    """Return statistics of sampled skew-product orbits.

    ``hits[eps]`` counts orbit times with displacement max-norm below
    eps, summed over samples; histogram bins are decades of the norm.
    """

    n_steps: int
    sample_count: int
    skipped_samples: int
    min_norms: tuple
    hits: dict
    histogram: tuple
    zero_returns: int
    candidates: tuple = ()
    seed: int = 0

    def to_json(self, ctx=None) -> dict:
        return {"n_steps": self.n_steps,
                "samples": self.sample_count,
                "skipped": self.skipped_samples,
                "min_norms": [float(v) for v in self.min_norms],
                "hits": {str(k): v for k, v in self.hits.items()},
                "histogram": list(self.histogram),
                "zero_returns": self.zero_returns,
                "seed": self.seed}


def skew_simulate(iet: Iet, cocycle: Cocycle, x0_list, n_steps: int,
                  eps_list=(0.5, 0.1, 0.02), seed: int = 0) -> RecurrenceStats:
    """Track displacement returns of the skew product along float orbits.

    Orbit points entering the guard band abort that sample (skipped and
    counted), never silently mis-stepped.
    """
    if x0_list is None:
        x0_list = kronecker_samples(iet.ctx, 16, iet.total, seed)
    lefts, rights, moves, letters = _float_lane(iet)
    d = iet.d
    dim = cocycle.dim
    if isinstance(cocycle, StepCocycle):
        vals = [[float(cocycle.values[a][i]) for a in letters] for i in range(dim)]
        jumps = []
        for g, j in cocycle.jumps:
            gf = float(g)
            slot = next(k for k in range(d) if lefts[k] <= gf < rights[k])
            jumps.append((slot, gf, [float(x) for x in j]))
        pl = None
    else:
        pl = ([[float(cocycle.slopes[a][i]) for a in letters] for i in range(dim)],
              [[float(cocycle.constants[a][i]) for a in letters] for i in range(dim)])
        vals, jumps = None, []
    eps_sorted = sorted(eps_list, reverse=True)
    hits = {e: 0 for e in eps_sorted}
    histogram = [0] * 10  # decades from 1e-6 up
    min_norms = []
    skipped = 0
    zero_returns = 0
    guard = 1e-9
    for x0 in x0_list:
        xf = float(x0)
        disp = [0.0] * dim
        best = None
        ok = True
        for _step in range(n_steps):
            lo = 0
            for k in range(1, d):
                if lefts[k] <= xf:
                    lo = k
                else:
                    break
            if (xf - lefts[lo] < guard and _step > 0) \
                    or (lo + 1 < d and lefts[lo + 1] - xf < guard) \
                    or rights[lo] - xf < guard:
                ok = False
                break
            if pl is not None:
                for i in range(dim):
                    disp[i] += pl[0][i][lo] * xf + pl[1][i][lo]
            else:
                for i in range(dim):
                    disp[i] += vals[i][lo]
                for slot, gf, j in jumps:
                    if slot == lo and xf >= gf:
                        for i in range(dim):
                            disp[i] += j[i]
            norm = max(abs(v) for v in disp)
            if best is None or norm < best:
                best = norm
            for e in eps_sorted:
                if norm < e:
                    hits[e] += 1
                else:
                    break
            if norm == 0.0:
                zero_returns += 1
            bin_idx = 0 if norm <= 1e-6 else min(9, int(6 + _log10(norm)) + 1)
            histogram[bin_idx] += 1
            xf += moves[lo]
        if ok:
            min_norms.append(best if best is not None else float("inf"))
        else:
            skipped += 1
    return RecurrenceStats(n_steps, len(min_norms), skipped,
                           tuple(min_norms), hits, tuple(histogram),
                           zero_returns, (), seed)


def _log10(x: float) -> int:
    import math

    return int(math.floor(math.log10(x)))


def _float_lane(iet: Iet):
    order = iet.order0
    lefts = [float(iet.left[a]) for a in order]
    rights = [float(iet.right[a]) for a in order]
    moves = [float(iet.translations[a]) for a in order]
    return lefts, rights, moves, list(order)


# ---------------------------------------------------------------------------
# special flows


def special_flow_step(iet: Iet, roof: PiecewiseLinearCocycle, state, t):
    """Advance a point of the region under the roof by time t.

    The state is (x, s) with 0 <= s < roof(x); the flow moves straight
    up and re-enters at (Tx, 0) upon hitting the roof.
    """
    if roof.dim != 1:
        raise DomainError("roof must be scalar")
    x, s = state
    ctx = iet.ctx
    roof_min = min(min(roof.slopes[a][0] * iet.left[a] + roof.constants[a][0],
                       roof.slopes[a][0] * iet.right[a] + roof.constants[a][0])
                   for a in range(iet.d))
    if not roof_min > 0:
        raise DomainError("roof must be strictly positive")
    fx = evaluate(roof, iet, x)[0]
    if not (0 <= s < fx):
        raise DomainError("state is not under the roof")
    target = s + t
    if target >= 0:
        n = 0
        acc = ctx.mp.mpf(0)
        cur = x
        while True:
            f_cur = evaluate(roof, iet, cur)[0]
            if acc + f_cur > target:
                break
            acc += f_cur
            cur = iet.apply(cur)
            n += 1
            if n > int((abs(t) + fx) / roof_min) + 2:
                raise DomainError("flow step search did not terminate")
        return (cur, target - acc)
    inv = iet.inverse()
    acc = ctx.mp.mpf(0)
    cur = x
    n = 0
    while target < acc:
        cur = inv.apply(cur)
        f_cur = evaluate(roof, iet, cur)[0]
        acc -= f_cur
        n += 1
        if n > int(abs(t) / roof_min) + 2:
            raise DomainError("flow step search did not terminate")
    return (cur, target - acc)
