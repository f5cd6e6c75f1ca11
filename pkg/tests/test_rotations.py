"""Circle rotations on the exact dyadic grid."""

import math

import pytest

from iet_lab.errors import DomainError, RationalInput
from iet_lab.rotations import (GRID, CircleStep, continued_fraction,
                               denjoy_koksma_check, dyadic_rotation,
                               exact_dyadic_cf, half_indicator,
                               product_rotation_simulate, three_distance_gaps)

GOLDEN = (math.sqrt(5) - 1) / 2
SQRT2M1 = math.sqrt(2) - 1


class TestContinuedFraction:
    def test_golden_all_ones(self, ctx):
        cf = continued_fraction((ctx.mp.sqrt(5) - 1) / 2, 25, ctx)
        assert all(a == 1 for a in cf.quotients)
        fib = [1, 2]
        while len(fib) < 25:
            fib.append(fib[-1] + fib[-2])
        assert list(cf.denominators) == fib[:25]
        assert cf.is_bpq

    def test_sqrt2_all_twos(self, ctx):
        cf = continued_fraction(ctx.mp.sqrt(2) - 1, 20, ctx)
        assert all(a == 2 for a in cf.quotients)
        # q_{n+1} = 2 q_n + q_{n-1}
        q = cf.denominators
        for i in range(2, len(q)):
            assert q[i] == 2 * q[i - 1] + q[i - 2]

    def test_rational_rejected(self, ctx):
        with pytest.raises(RationalInput):
            continued_fraction(ctx.real(1) / 3, 10, ctx)

    def test_dyadic_agrees_with_real(self, ctx):
        step = dyadic_rotation(GOLDEN)
        dcf = exact_dyadic_cf(step, GRID)
        cf = continued_fraction((ctx.mp.sqrt(5) - 1) / 2, 30, ctx)
        assert tuple(dcf[:30]) == cf.quotients[:30]


class TestVariationBound:
    def test_golden_small_depth(self):
        rep = denjoy_koksma_check(half_indicator(), GOLDEN, depth=20,
                                  samples=40, n_max=10**4)
        assert rep.ok
        assert rep.variation == 2
        assert all(v <= 2 for v in rep.max_abs.values())

    def test_constant_zero(self):
        phi = CircleStep((0, GRID // 2), (0, 0), scale=1)
        rep = denjoy_koksma_check(phi, SQRT2M1, depth=12, samples=10,
                                  n_max=10**4)
        assert rep.ok
        assert all(v == 0 for v in rep.max_abs.values())

    def test_log_growth_finite_slope(self):
        rep = denjoy_koksma_check(half_indicator(), SQRT2M1, depth=15,
                                  samples=30, n_max=10**5)
        assert rep.ok
        assert 0.0 <= rep.log_slope < 5.0

    def test_mean_must_vanish(self):
        phi = CircleStep((0, GRID // 2), (1, 0), scale=1)
        with pytest.raises(DomainError):
            denjoy_koksma_check(phi, GOLDEN, depth=5, samples=5)


class TestProductRotation:
    def test_joint_returns_positive(self):
        rep = product_rotation_simulate(GOLDEN, SQRT2M1, half_indicator(),
                                        half_indicator(), 200_000, seed=0)
        assert rep.zero_returns > 0
        assert rep.first_return is not None
        assert rep.return_frequency > 0

    def test_spacing_bounded(self):
        rep = product_rotation_simulate(GOLDEN, SQRT2M1, half_indicator(),
                                        half_indicator(), 10_000,
                                        spacing_ns=(100, 1000, 10000))
        lo, hi = rep.spacing_constants
        assert lo > 0.01
        assert hi < 3.0
        assert rep.spacing_ratio < 100

    def test_zero_second_component_reduces(self):
        # a zero second function makes joint returns equal the 1-d returns
        zero = CircleStep((0, GRID // 2), (0, 0), scale=1)
        rep = product_rotation_simulate(GOLDEN, SQRT2M1, half_indicator(),
                                        zero, 50_000, seed=1)
        import numpy as np

        from iet_lab.rotations import _MASK, _grid_positions

        start = rep  # joint zeros observed
        s1 = dyadic_rotation(GOLDEN)
        g = (math.sqrt(5) - 1) / 2
        x0 = int((((1 % 997) / 997 + 0.2371) % 1.0) * GRID) & (GRID - 1)
        pos = (_grid_positions(0, s1, 50_000) + np.uint64(x0)) & _MASK
        vals = half_indicator().sample(pos)
        ones = int((np.cumsum(vals) == 0).sum())
        assert rep.zero_returns == ones

    def test_exceptional_start_documented(self):
        # starting exactly on the discontinuity can suppress returns
        rep = product_rotation_simulate(GOLDEN, SQRT2M1, half_indicator(),
                                        half_indicator(), 50_000,
                                        start=(0.0, 0.0))
        assert rep.zero_returns == 0


class TestProductEvidence:
    def test_ten_million_step_walk(self):
        # the reference two-rotation lattice walk at full length
        rep = product_rotation_simulate(GOLDEN, SQRT2M1, half_indicator(),
                                        half_indicator(), 10 ** 7, seed=0)
        assert rep.zero_returns > 100
        assert rep.return_frequency > 1e-5
        assert all(a == 1 for a in rep.cf1[:20])
        assert all(a == 2 for a in rep.cf2[:20])


class TestThreeDistance:
    @pytest.mark.parametrize("n", [5, 13, 34, 100, 987, 4321])
    def test_at_most_three_gaps(self, n):
        assert len(three_distance_gaps(GOLDEN, n)) <= 3

    @pytest.mark.parametrize("n", [10, 99, 1000])
    def test_other_rotation(self, n):
        assert len(three_distance_gaps(SQRT2M1, n)) <= 3
