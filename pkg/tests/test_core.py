"""Foundational types: permutation pairs, exact matrices, precision."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iet_lab import intmat
from iet_lab.errors import (DegenerateAlphabet, DimensionError,
                            InvalidPermutation)
from iet_lab.perms import make_pair, make_symmetric_pair
from iet_lab.precision import PrecisionContext, RealVector


class TestPermutationPair:
    def test_symmetric_two(self):
        pair = make_symmetric_pair(2)
        assert pair.position_map() == (2, 1)
        assert pair.irreducible

    def test_symmetric_four(self):
        assert make_symmetric_pair(4).position_map() == (4, 3, 2, 1)

    def test_degenerate(self):
        with pytest.raises(DegenerateAlphabet):
            make_symmetric_pair(1)

    def test_seven_letter_irreducible(self):
        pair = make_pair(range(1, 8), [6, 7, 4, 5, 3, 1, 2])
        assert pair.irreducible

    def test_identity_reducible(self):
        pair = make_pair([1, 2, 3], [1, 2, 3])
        assert not pair.irreducible

    def test_non_bijection(self):
        with pytest.raises(InvalidPermutation):
            make_pair([1, 1, 2], [1, 2, 3])

    def test_round_trip(self):
        pair = make_pair([2, 1, 3], [3, 1, 2])
        assert pair.pi0 == (2, 1, 3)
        assert pair.pi1 == (3, 1, 2)
        assert pair == make_pair(pair.pi0, pair.pi1)

    @given(st.integers(min_value=2, max_value=12))
    def test_symmetric_always_irreducible(self, d):
        assert make_symmetric_pair(d).irreducible

    @given(st.permutations(list(range(1, 6))), st.permutations(list(range(1, 6))))
    def test_json_round_trip(self, p0, p1):
        pair = make_pair(p0, p1)
        again = make_pair(pair.to_json()["pi0"], pair.to_json()["pi1"])
        assert again == pair


class TestIntMatrix:
    def test_matpow_zero_is_identity(self):
        a = intmat.freeze([[2, 1], [1, 1]])
        assert intmat.matpow(a, 0) == intmat.identity(2)

    def test_matpow_square(self):
        a = intmat.freeze([[2, 1], [1, 1]])
        assert intmat.matpow(a, 2) == ((5, 3), (3, 2))

    def test_dimension_mismatch(self):
        a = intmat.identity(4)
        b = intmat.identity(5)
        with pytest.raises(DimensionError):
            intmat.matmul(a, b)

    @settings(max_examples=40)
    @given(st.integers(2, 4), st.data())
    def test_associativity_exact(self, d, data):
        def rand_matrix():
            return intmat.freeze([[data.draw(st.integers(-50, 50))
                                   for _ in range(d)] for _ in range(d)])

        a, b, c = rand_matrix(), rand_matrix(), rand_matrix()
        assert intmat.matmul(intmat.matmul(a, b), c) \
            == intmat.matmul(a, intmat.matmul(b, c))

    def test_charpoly_known(self):
        assert intmat.charpoly(((2, 1), (1, 1))) == (1, -3, 1)
        assert intmat.charpoly(((10, 24, 18, 7), (4, 11, 8, 2),
                                (1, 2, 2, 0), (3, 7, 5, 3))) \
            == (1, -26, 56, -26, 1)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 4), st.data())
    def test_charpoly_matches_sympy(self, d, data):
        import sympy

        rows = [[data.draw(st.integers(-9, 9)) for _ in range(d)]
                for _ in range(d)]
        mine = intmat.charpoly(intmat.freeze(rows))
        theirs = sympy.Matrix(rows).charpoly().all_coeffs()
        assert list(mine) == [int(c) for c in theirs]

    def test_det_and_inverse(self):
        a = intmat.freeze([[2, 1], [1, 1]])
        assert intmat.det(a) == 1
        inv = intmat.inverse_unimodular(a)
        assert intmat.matmul(a, inv) == intmat.identity(2)

    def test_inverse_requires_unimodular(self):
        with pytest.raises(DimensionError):
            intmat.inverse_unimodular(((2, 0), (0, 2)))

    @settings(max_examples=30)
    @given(st.integers(2, 4), st.data())
    def test_smith_normal_form(self, d, data):
        rows = [[data.draw(st.integers(-6, 6)) for _ in range(d)]
                for _ in range(d)]
        a = intmat.freeze(rows)
        dd, u, v = intmat.smith_normal_form(a)
        assert intmat.matmul(intmat.matmul(u, a), v) == dd
        assert intmat.det(u) in (1, -1)
        assert intmat.det(v) in (1, -1)
        diag = [dd[i][i] for i in range(d)]
        for i in range(d - 1):
            if diag[i] and diag[i + 1]:
                assert diag[i + 1] % diag[i] == 0
        for i in range(d):
            for j in range(d):
                if i != j:
                    assert dd[i][j] == 0

    @settings(max_examples=25)
    @given(st.integers(2, 4), st.data())
    def test_integer_kernel(self, d, data):
        rows = [[data.draw(st.integers(-4, 4)) for _ in range(d)]
                for _ in range(d)]
        a = intmat.freeze(rows)
        for vec in intmat.integer_kernel(a):
            assert all(x == 0 for x in intmat.mat_vec(a, vec))
            assert any(x != 0 for x in vec)

    def test_positive_power(self):
        assert intmat.positive_power(((2, 1), (1, 1))) == 1
        with pytest.raises(Exception):
            intmat.positive_power(((0, 1), (1, 0)))

    def test_rank(self):
        assert intmat.rank_rational([[1, 2], [2, 4]]) == 1
        assert intmat.rank_rational([[1, 0], [0, 1]]) == 2

    def test_serialization(self):
        a = intmat.freeze([[10, -3], [7, 2]])
        assert intmat.matrix_from_strings(intmat.matrix_to_strings(a)) == a


class TestPrecisionContext:
    def test_defaults(self):
        ctx = PrecisionContext()
        assert ctx.bits == 128
        assert ctx.eps_cmp == ctx.mp.mpf(2) ** -64

    def test_minimum_bits(self):
        with pytest.raises(ValueError):
            PrecisionContext(32)

    def test_contexts_are_independent(self):
        a = PrecisionContext(64)
        b = PrecisionContext(256)
        sa = a.mp.sqrt(2)
        sb = b.mp.sqrt(2)
        assert a.mp.prec == 64 and b.mp.prec == 256
        assert abs(float(sa - sb)) < 1e-15

    def test_vector_finite(self):
        ctx = PrecisionContext(64)
        with pytest.raises(Exception):
            RealVector((ctx.mp.inf,), ctx)

    def test_real_accepts_fraction(self):
        ctx = PrecisionContext(64)
        assert ctx.real(Fraction(1, 4)) == ctx.mp.mpf("0.25")
