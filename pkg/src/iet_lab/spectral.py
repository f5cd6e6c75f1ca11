"""Spectral analysis of loop-product matrices.

The route to eigenvalues is deliberately exact-first: the integer
characteristic polynomial is computed exactly, factored over the
rationals, and each irreducible factor is classified against the unit
circle before any floating root extraction happens.  A factor can only
carry unit-modulus roots when it equals its own reciprocal, in which
case the substitution y = x + 1/x reduces the classification to real
roots of an exact integer polynomial compared against +-2.  Everything
else is certifiably off the circle and safe for numeric enclosures.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import intmat
from .errors import NotPositive, ReduciblePair, SpectralAmbiguity
from .intmat import IntMatrix
from .perms import PermutationPair
from .precision import PrecisionContext, RealVector

# ---------------------------------------------------------------------------
# integer polynomial helpers


def poly_eval_int(coeffs, x: int) -> int:
    acc = 0
    for c in coeffs:
        acc = acc * x + c
    return acc


def poly_is_reciprocal(coeffs) -> bool:
    return list(coeffs) == list(reversed(coeffs))


def _poly_add(a, b):
    n = max(len(a), len(b))
    a = [0] * (n - len(a)) + list(a)
    b = [0] * (n - len(b)) + list(b)
    return [x + y for x, y in zip(a, b)]


def _poly_scale(a, c):
    return [c * x for x in a]


def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def reciprocal_reduction(coeffs) -> list:
    """For palindromic p of even degree 2m, the exact q with p = x^m q(x + 1/x).

    Uses the recursion t_k for x^k + x^-k: t_0 = 2, t_1 = y,
    t_{k+1} = y t_k - t_{k-1}.
    """
    coeffs = list(coeffs)
    n = len(coeffs) - 1
    if n % 2 != 0 or not poly_is_reciprocal(coeffs):
        raise ValueError("need a palindromic polynomial of even degree")
    m = n // 2
    t_prev, t_cur = [2], [1, 0]  # t_0, t_1
    ts = {0: t_prev, 1: t_cur}
    for k in range(2, m + 1):
        t_next = _poly_add(_poly_mul([1, 0], t_cur), _poly_scale(t_prev, -1))
        ts[k] = t_next
        t_prev, t_cur = t_cur, t_next
    q = [coeffs[m]]
    for k in range(m):
        q = _poly_add(q, _poly_scale(ts[m - k], coeffs[k]))
    return q


# ---------------------------------------------------------------------------
# root classification

INSIDE, ON_CIRCLE, OUTSIDE = -1, 0, 1


@dataclass(frozen=True)
class RootGroup:
    """One eigenvalue (or conjugate pair) with certified placement.

    ``values`` holds one representative per root of the group: a single
    real for a real eigenvalue, or z with Im z > 0 for a conjugate pair
    (the conjugate is implied).  ``count`` is the total number of roots
    represented including conjugates, and ``multiplicity`` the algebraic
    multiplicity of each.
    """

    values: tuple
    is_real: bool
    place: int
    multiplicity: int
    radius: object
    factor: tuple


def _quadratic_roots(b, c, ctx: PrecisionContext):
    """Roots of x^2 + b x + c for integer/rational b, c, in ctx precision."""
    work = ctx.spawn(64)
    mp = work.mp
    bb, cc = mp.mpf(b), mp.mpf(c)
    disc = bb * bb - 4 * cc
    if disc >= 0:
        s = mp.sqrt(disc)
        r1 = (-bb + s) / 2
        r2 = (-bb - s) / 2
        return [ctx.real(r1), ctx.real(r2)], True
    s = mp.sqrt(-disc)
    z = mp.mpc(-bb / 2, s / 2)
    return [ctx.mp.mpc(ctx.real(z.real), ctx.real(z.imag))], False


def _real_root_values(coeffs, ctx: PrecisionContext):
    """High-precision values of all roots of an integer polynomial.

    Degree <= 2 is solved in closed form; higher degrees go through
    exact isolation (sympy CRootOf) refined to the context precision.
    """
    deg = len(coeffs) - 1
    if deg == 1:
        return [ctx.real(Fraction(-coeffs[1], coeffs[0]))], True
    if deg == 2 and coeffs[0] == 1:
        return _quadratic_roots(coeffs[1], coeffs[2], ctx)
    import sympy

    x = sympy.Symbol("x")
    poly = sympy.Poly([int(c) for c in coeffs], x)
    dps = max(30, int(ctx.bits * 0.3010) + 12)
    reals, complexes = [], []
    for r in poly.all_roots():
        if r.is_real:
            reals.append(ctx.real(str(sympy.N(r, dps))))
        else:
            val = complex(sympy.N(r, dps))
            if val.imag > 0:
                zv = sympy.N(r, dps)
                complexes.append(ctx.mp.mpc(ctx.real(str(sympy.re(zv))),
                                            ctx.real(str(sympy.im(zv)))))
    return reals, complexes


def _classify_factor(coeffs, multiplicity: int, ctx: PrecisionContext) -> list:
    """Root groups of one irreducible monic integer factor."""
    deg = len(coeffs) - 1
    radius = ctx.mp.mpf(2) ** (-(ctx.bits - 8))
    groups = []
    if deg == 1:
        r = Fraction(-coeffs[1], coeffs[0])
        place = INSIDE if abs(r) < 1 else (ON_CIRCLE if abs(r) == 1 else OUTSIDE)
        groups.append(RootGroup((ctx.real(r),), True, place, multiplicity,
                                ctx.mp.mpf(0), tuple(coeffs)))
        return groups
    if poly_is_reciprocal(coeffs) and deg % 2 == 0:
        # unit-circle membership decided exactly through y = x + 1/x
        work = ctx.spawn(64)
        mp = work.mp
        q = reciprocal_reduction(coeffs)
        y_groups = _reciprocal_y_roots(q, work)
        for y_val, y_is_real in y_groups:
            if y_is_real:
                y = mp.mpf(y_val) if not hasattr(y_val, "_mpf_") else y_val
                if abs(y) < 2:
                    # conjugate pair on the circle
                    im = mp.sqrt(4 - y * y) / 2
                    z = ctx.mp.mpc(ctx.real(y / 2), ctx.real(im))
                    groups.append(RootGroup((z,), False, ON_CIRCLE,
                                            multiplicity, radius, tuple(coeffs)))
                else:
                    s = mp.sqrt(y * y - 4)
                    r_out = (y + s) / 2 if y > 0 else (y - s) / 2
                    r_in = 1 / r_out
                    groups.append(RootGroup((ctx.real(r_out),), True, OUTSIDE,
                                            multiplicity, radius, tuple(coeffs)))
                    groups.append(RootGroup((ctx.real(r_in),), True, INSIDE,
                                            multiplicity, radius, tuple(coeffs)))
            else:
                # complex y: quadruple {z, conj z, 1/z, 1/conj z} off the circle
                y = y_val
                s = mp.sqrt(y * y - 4)
                z1 = (y + s) / 2
                if abs(z1) < 1:
                    z1 = (y - s) / 2
                z2 = 1 / z1
                for z in (z1, z2):
                    zz = ctx.mp.mpc(ctx.real(z.real), ctx.real(abs(z.imag)))
                    place = OUTSIDE if abs(z) > 1 else INSIDE
                    groups.append(RootGroup((zz,), False, place,
                                            multiplicity, radius, tuple(coeffs)))
        return groups
    # non-reciprocal irreducible factor: no unit-circle roots possible
    reals, complexes = _real_root_values(coeffs, ctx)
    guard = ctx.mp.mpf(2) ** (-(ctx.bits // 2))
    for r in reals:
        margin = abs(abs(r) - 1)
        if margin < guard:
            raise SpectralAmbiguity(
                "real root enclosure too close to |z| = 1", (r, guard))
        place = OUTSIDE if abs(r) > 1 else INSIDE
        groups.append(RootGroup((r,), True, place, multiplicity, radius,
                                tuple(coeffs)))
    for z in complexes:
        margin = abs(abs(z) - 1)
        if margin < guard:
            raise SpectralAmbiguity(
                "complex root enclosure too close to |z| = 1", (z, guard))
        place = OUTSIDE if abs(z) > 1 else INSIDE
        groups.append(RootGroup((z,), False, place, multiplicity, radius,
                                tuple(coeffs)))
    return groups


def _reciprocal_y_roots(q, work: PrecisionContext) -> list:
    """Roots of the reduced polynomial with exact (-2, 2) placement.

    Returns (value, is_real) pairs; real values are mpf at the supplied
    working precision.  Degree >= 3 goes through exact isolation.
    """
    deg = len(q) - 1
    mp = work.mp
    if deg == 1:
        return [(mp.mpf(Fraction(-q[1], q[0]).numerator)
                 / Fraction(-q[1], q[0]).denominator, True)]
    if deg == 2:
        b = Fraction(q[1], q[0])
        c = Fraction(q[2], q[0])
        disc = b * b - 4 * c
        if disc >= 0:
            s = mp.sqrt(mp.mpf(disc.numerator) / disc.denominator)
            bb = mp.mpf(b.numerator) / b.denominator
            return [((-bb + s) / 2, True), ((-bb - s) / 2, True)]
        s = mp.sqrt(-(mp.mpf(disc.numerator) / disc.denominator))
        bb = mp.mpf(b.numerator) / b.denominator
        return [(mp.mpc(-bb / 2, s / 2), False)]
    import sympy

    x = sympy.Symbol("x")
    poly = sympy.Poly([int(c) for c in q], x)
    dps = max(30, int(work.bits * 0.3010) + 12)
    out = []
    for r in poly.all_roots():
        if r.is_real:
            out.append((mp.mpf(str(sympy.N(r, dps))), True))
        else:
            zv = sympy.N(r, dps)
            if complex(zv).imag > 0:
                out.append((mp.mpc(mp.mpf(str(sympy.re(zv))),
                                   mp.mpf(str(sympy.im(zv)))), False))
    return out


def _factor_charpoly(coeffs) -> list:
    """Irreducible monic integer factors of a monic integer polynomial."""
    import sympy

    x = sympy.Symbol("x")
    poly = sympy.Poly([int(c) for c in coeffs], x)
    _lead, factors = poly.factor_list()
    out = []
    for fac, mult in factors:
        fc = [int(c) for c in fac.all_coeffs()]
        if fc[0] < 0:
            fc = [-c for c in fc]
        if fc[0] != 1:
            raise SpectralAmbiguity("non-monic factor of a monic polynomial")
        out.append((tuple(fc), int(mult)))
    return out


def analyze_matrix(matrix: IntMatrix, ctx: PrecisionContext) -> list:
    """Certified root groups of the characteristic polynomial."""
    coeffs = intmat.charpoly(matrix)
    groups = []
    for fac, mult in _factor_charpoly(coeffs):
        groups.extend(_classify_factor(list(fac), mult, ctx))
    return groups


# ---------------------------------------------------------------------------
# Lyapunov spectrum


@dataclass(frozen=True)
class LyapunovSpectrum:
    """All d values log|eigenvalue|, sorted descending, with enclosures."""

    exponents: tuple
    radii: tuple
    zero_multiplicity: int
    max_jordan_block: int
    ctx: PrecisionContext = field(repr=False)

    @property
    def d(self) -> int:
        return len(self.exponents)

    @property
    def theta1(self):
        return self.exponents[0]

    @property
    def theta2(self):
        return self.exponents[1]

    @property
    def ratio21(self):
        return self.theta2 / self.theta1

    def to_json(self) -> dict:
        return {"exponents": [self.ctx.str_of(t) for t in self.exponents],
                "enclosure_radii": [self.ctx.str_of(r, 8) for r in self.radii],
                "zero_multiplicity": self.zero_multiplicity,
                "max_jordan_block": self.max_jordan_block}


def _max_jordan_block(matrix: IntMatrix, groups, ctx: PrecisionContext) -> int:
    d = len(matrix)
    m_max = 1
    for g in groups:
        if g.multiplicity <= 1:
            continue
        if g.is_real and len(g.factor) == 2:
            # rational eigenvalue: exact rank chain over Q
            r = Fraction(-g.factor[1], g.factor[0])
            shifted = [[Fraction(matrix[i][j]) - (r if i == j else 0)
                        for j in range(d)] for i in range(d)]
            power = shifted
            prev_rank = intmat.rank_rational(power)
            block = 1
            while d - prev_rank < g.multiplicity:
                power = [[sum(power[i][k] * shifted[k][j] for k in range(d))
                          for j in range(d)] for i in range(d)]
                rank = intmat.rank_rational(power)
                if rank == prev_rank:
                    break
                prev_rank = rank
                block += 1
            m_max = max(m_max, block)
        else:
            # repeated irrational eigenvalue: numeric rank chain
            block = _numeric_jordan_block(matrix, g, ctx)
            m_max = max(m_max, block)
    return m_max


def _numeric_jordan_block(matrix, group, ctx) -> int:
    work = ctx.spawn(96)
    d = len(matrix)
    z = _refine_root(group.factor, group.values[0], work)
    mp = work.mp
    shifted = [[mp.mpc(matrix[i][j]) - (z if i == j else 0) for j in range(d)]
               for i in range(d)]
    power = [row[:] for row in shifted]
    count = 2 if not group.is_real else 1
    target_nullity = group.multiplicity * count if not group.is_real else group.multiplicity
    block = 1
    while _numeric_nullity(power, work) < group.multiplicity:
        power = [[mp.fsum(power[i][k] * shifted[k][j] for k in range(d))
                  for j in range(d)] for i in range(d)]
        block += 1
        if block > d:
            raise SpectralAmbiguity("Jordan chain did not stabilize",
                                    (z, target_nullity))
    return block


def _numeric_nullity(rows, work) -> int:
    mp = work.mp
    m = [list(r) for r in rows]
    n = len(m)
    scale = max((abs(x) for row in m for x in row), default=mp.mpf(1))
    if scale == 0:
        return n
    threshold = scale * mp.mpf(2) ** (-(work.bits // 2))
    rank = 0
    cols = list(range(n))
    for _ in range(n):
        piv_val, piv_r, piv_c = None, None, None
        for i in range(rank, n):
            for jj, j in enumerate(cols[rank:], start=rank):
                v = abs(m[i][j])
                if piv_val is None or v > piv_val:
                    piv_val, piv_r, piv_c = v, i, jj
        if piv_val is None or piv_val < threshold:
            break
        m[rank], m[piv_r] = m[piv_r], m[rank]
        cols[rank], cols[piv_c] = cols[piv_c], cols[rank]
        pcol = cols[rank]
        for i in range(rank + 1, n):
            f = m[i][pcol] / m[rank][pcol]
            if f != 0:
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return n - rank


def lyapunov_spectrum(matrix: IntMatrix, ctx: PrecisionContext | None = None
                      ) -> LyapunovSpectrum:
    """Certified log-moduli of all eigenvalues of a primitive matrix."""
    ctx = ctx or PrecisionContext()
    matrix = intmat.freeze(matrix)
    intmat.positive_power(matrix)  # raises NotPrimitive when appropriate
    groups = analyze_matrix(matrix, ctx)
    entries = []
    zero_mult = 0
    for g in groups:
        radius = g.radius
        count = 1 if g.is_real else 2
        for _ in range(g.multiplicity):
            if g.place == ON_CIRCLE:
                zero_mult += count
                for _ in range(count):
                    entries.append((ctx.mp.mpf(0), ctx.mp.mpf(0)))
            else:
                mod = abs(g.values[0])
                expo = ctx.mp.log(mod)
                for _ in range(count):
                    entries.append((ctx.real(expo), radius))
    entries.sort(key=lambda t: t[0], reverse=True)
    m_jordan = _max_jordan_block(matrix, groups, ctx)
    return LyapunovSpectrum(tuple(e for e, _ in entries),
                            tuple(r for _, r in entries),
                            zero_mult, m_jordan, ctx)


# ---------------------------------------------------------------------------
# invariant splitting of the transpose


@dataclass(frozen=True)
class Splitting:
    """Generalized eigenspace bases of the transpose, split at |z| = 1.

    Vectors are real; complex conjugate pairs contribute their real and
    imaginary parts.  ``theta_plus`` is the smallest expansion rate on
    the unstable part, the decay rate of its inverse.
    """

    basis_s: tuple
    basis_c: tuple
    basis_u: tuple
    theta_plus: object
    non_degenerate: bool | None
    ctx: PrecisionContext = field(repr=False)

    def __post_init__(self):
        cols = [list(v) for v in (*self.basis_s, *self.basis_c, *self.basis_u)]
        d = len(cols[0]) if cols else 0
        if len(cols) != d:
            raise SpectralAmbiguity(
                f"splitting dimensions {len(cols)} do not fill ambient {d}")
        object.__setattr__(self, "_basis_cols", cols)
        object.__setattr__(self, "_lu", None)

    @property
    def dims(self) -> tuple:
        return (len(self.basis_s), len(self.basis_c), len(self.basis_u))

    def _solve(self, vec):
        mp = self.ctx.mp
        d = len(self._basis_cols)
        aug = [[self._basis_cols[j][i] for j in range(d)] + [self.ctx.real(vec[i])]
               for i in range(d)]
        for col in range(d):
            piv = max(range(col, d), key=lambda r: abs(aug[r][col]))
            if abs(aug[piv][col]) == 0:
                raise SpectralAmbiguity("splitting basis is singular")
            aug[col], aug[piv] = aug[piv], aug[col]
            pv = aug[col][col]
            aug[col] = [x / pv for x in aug[col]]
            for r in range(d):
                if r != col and aug[r][col] != 0:
                    f = aug[r][col]
                    aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
        return [aug[i][d] for i in range(d)]

    def components(self, vec) -> tuple:
        """Coefficients of vec in the (s | c | u) basis, as three lists."""
        x = self._solve(vec)
        ns, nc = len(self.basis_s), len(self.basis_c)
        return x[:ns], x[ns:ns + nc], x[ns + nc:]

    def project(self, vec, part: str) -> RealVector:
        """Component of vec inside one of the three invariant subspaces."""
        cs, cc, cu = self.components(vec)
        coeffs = {"s": cs, "c": cc, "u": cu}[part]
        basis = {"s": self.basis_s, "c": self.basis_c, "u": self.basis_u}[part]
        d = len(self._basis_cols)
        mp = self.ctx.mp
        out = [mp.fsum(c * b[i] for c, b in zip(coeffs, basis))
               for i in range(d)]
        return RealVector(tuple(out), self.ctx)

    def unstable_map(self, matrix_t) -> list:
        """Matrix of the transpose action on the unstable basis (k x k)."""
        mp = self.ctx.mp
        k = len(self.basis_u)
        cols = []
        for b in self.basis_u:
            image = [mp.fsum(matrix_t[i][j] * b[j] for j in range(len(b)))
                     for i in range(len(b))]
            _cs, _cc, cu = self.components(image)
            cols.append(cu)
        return [[cols[j][i] for j in range(k)] for i in range(k)]


def splitting(matrix: IntMatrix, lengths, ctx: PrecisionContext | None = None,
              kappa: int | None = None) -> Splitting:
    """Stable / central / unstable splitting for the transpose matrix.

    ``lengths`` (the leading right eigenvector) is used for the
    annihilator sanity check on the stable and central parts.
    """
    ctx = ctx or (lengths.ctx if isinstance(lengths, RealVector) else PrecisionContext())
    matrix = intmat.freeze(matrix)
    intmat.positive_power(matrix)
    groups = analyze_matrix(matrix, ctx)
    at = intmat.mat_transpose(matrix)
    work = ctx.spawn(96)
    buckets = {INSIDE: [], ON_CIRCLE: [], OUTSIDE: []}
    theta_plus = None
    for g in groups:
        vecs = _generalized_real_basis(at, g, work, ctx)
        buckets[g.place].extend(vecs)
        if g.place == OUTSIDE:
            rate = ctx.mp.log(abs(g.values[0]))
            theta_plus = rate if theta_plus is None else min(theta_plus, rate)
    non_deg = None
    if kappa is not None:
        non_deg = (len(buckets[ON_CIRCLE]) == kappa - 1)
    split = Splitting(tuple(buckets[INSIDE]), tuple(buckets[ON_CIRCLE]),
                      tuple(buckets[OUTSIDE]), theta_plus, non_deg, ctx)
    if lengths is not None:
        tol = ctx.mp.mpf(2) ** (-(ctx.bits // 3))
        for v in (*split.basis_s, *split.basis_c):
            ip = abs(ctx.mp.fsum(a * b for a, b in zip(v, lengths)))
            if ip > tol * max(1, v.norm_max()):
                raise SpectralAmbiguity(
                    "stable/central vector fails the annihilator check", (ip, tol))
    return split


def _refine_root(factor, z, work):
    """Polish a simple root of an exact integer polynomial by Newton.

    The input approximation carries the base precision; a few Newton
    steps lift it to the working precision (quadratic convergence,
    simple roots only, which irreducible factors guarantee).
    """
    mp = work.mp
    coeffs = [mp.mpf(c) for c in factor]
    deriv = [c * (len(coeffs) - 1 - i) for i, c in enumerate(coeffs[:-1])]

    def horner(cs, t):
        acc = cs[0]
        for c in cs[1:]:
            acc = acc * t + c
        return acc

    zz = mp.mpc(z) if mp.im(z) != 0 else mp.mpf(mp.re(z))
    for _ in range(1 + work.bits.bit_length()):
        num = horner(coeffs, zz)
        den = horner(deriv, zz)
        if den == 0:
            break
        step = num / den
        zz = zz - step
        if abs(step) < mp.mpf(2) ** (-(work.bits - 8)) * max(1, abs(zz)):
            break
    return zz


def _generalized_real_basis(at, group: RootGroup, work, ctx) -> list:
    """Real basis of the generalized eigenspace for one root group."""
    mp = work.mp
    d = len(at)
    z = _refine_root(group.factor, group.values[0], work)
    m = group.multiplicity
    if group.is_real:
        shifted = [[mp.mpf(at[i][j]) - (z if i == j else 0) for j in range(d)]
                   for i in range(d)]
    else:
        shifted = [[mp.mpc(at[i][j]) - (z if i == j else 0) for j in range(d)]
                   for i in range(d)]
    power = shifted
    for _ in range(m - 1):
        power = [[mp.fsum(power[i][k] * shifted[k][j] for k in range(d))
                  for j in range(d)] for i in range(d)]
    null = _null_space(power, work, expected=m)
    out = []
    for v in null:
        if group.is_real:
            out.append(_normalized_real(v, ctx))
        else:
            out.append(_normalized_real([x.real for x in v], ctx))
            out.append(_normalized_real([x.imag for x in v], ctx))
    return out


def _normalized_real(vals, ctx) -> RealVector:
    top = max(abs(v) for v in vals)
    if top == 0:
        raise SpectralAmbiguity("zero vector in eigenspace basis")
    lead = next(v for v in vals if abs(v) == top)
    return RealVector(tuple(ctx.real(v / lead) for v in vals), ctx)


def _null_space(rows, work, expected: int) -> list:
    """Null-space basis by full-pivot elimination with a precision margin."""
    mp = work.mp
    m = [list(r) for r in rows]
    n = len(m)
    scale = max((abs(x) for row in m for x in row), default=mp.mpf(1))
    threshold = scale * mp.mpf(2) ** (-(work.bits * 2 // 3))
    col_order = list(range(n))
    rank = 0
    for _ in range(n):
        piv_val, piv_r, piv_c = None, None, None
        for i in range(rank, n):
            for jj in range(rank, n):
                v = abs(m[i][col_order[jj]])
                if piv_val is None or v > piv_val:
                    piv_val, piv_r, piv_c = v, i, jj
        if piv_val is None or piv_val < threshold:
            break
        m[rank], m[piv_r] = m[piv_r], m[rank]
        col_order[rank], col_order[piv_c] = col_order[piv_c], col_order[rank]
        pc = col_order[rank]
        pv = m[rank][pc]
        m[rank] = [x / pv for x in m[rank]]
        for i in range(n):
            if i != rank and m[i][pc] != 0:
                f = m[i][pc]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    nullity = n - rank
    if nullity != expected:
        raise SpectralAmbiguity(
            f"nullity {nullity} differs from algebraic multiplicity {expected}")
    basis = []
    for free_idx in range(rank, n):
        fc = col_order[free_idx]
        vec = [mp.mpf(0)] * n
        vec[fc] = mp.mpf(1)
        for r in range(rank):
            vec[col_order[r]] = -m[r][fc]
        basis.append(vec)
    return basis


# ---------------------------------------------------------------------------
# singularity combinatorics


@dataclass(frozen=True)
class SingularityData:
    """Orbit structure of the endpoint-matching permutation.

    ``sigma`` acts on {0..d}; its orbits correspond to the singularities
    of the suspended surface.  Each orbit carries an integer marker
    vector; the markers over orbits avoiding 0 span the kernel of the
    intersection matrix.
    """

    sigma: tuple
    orbits: tuple
    orbits_without_zero: tuple
    b_vectors: dict
    kappa: int
    genus: int

    def to_json(self) -> dict:
        return {"sigma": list(self.sigma),
                "orbits": [sorted(o) for o in self.orbits],
                "kappa": self.kappa,
                "genus": self.genus}


def singularity_data(pair: PermutationPair) -> SingularityData:
    if not pair.irreducible:
        raise ReduciblePair("singularity data needs an irreducible pair")
    d = pair.d
    pm = pair.position_map()  # positions 1..d
    p = {0: 0, d + 1: d + 1}
    for j in range(1, d + 1):
        p[j] = pm[j - 1]
    p_inv = {v: k for k, v in p.items()}
    sigma = tuple(p_inv[p[j] + 1] - 1 for j in range(0, d + 1))
    seen = [False] * (d + 1)
    orbits = []
    for start in range(d + 1):
        if seen[start]:
            continue
        orbit = []
        j = start
        while not seen[j]:
            seen[j] = True
            orbit.append(j)
            j = sigma[j]
        orbits.append(frozenset(orbit))
    b_vectors = {}
    for orbit in orbits:
        vec = tuple((1 if pair.pi0[a] in orbit else 0)
                    - (1 if pair.pi0[a] - 1 in orbit else 0)
                    for a in range(d))
        b_vectors[orbit] = vec
    kappa = len(orbits)
    if (d - kappa + 1) % 2 != 0:
        raise ReduciblePair(f"inconsistent orbit count {kappa} for d = {d}")
    genus = (d - kappa + 1) // 2
    return SingularityData(sigma, tuple(orbits),
                           tuple(o for o in orbits if 0 not in o),
                           b_vectors, kappa, genus)


def nu_ratio(matrix: IntMatrix) -> Fraction:
    """Largest within-row entry ratio of a strictly positive matrix."""
    matrix = intmat.freeze(matrix)
    if any(x <= 0 for row in matrix for x in row):
        raise NotPositive("nu ratio requires strictly positive entries")
    return max(Fraction(max(row), min(row)) for row in matrix)
