"""Shared fixtures: the bundled systems at 128-bit working precision."""

import pytest

from iet_lab.cocycles import Renormalizer
from iet_lab.perms import make_symmetric_pair
from iet_lab.precision import PrecisionContext
from iet_lab.rauzy import build_periodic_from_loop, build_periodic_from_matrix
from iet_lab.repro import (FIVE_MATRIX, GROUPED_MATRIX, SEVEN_LOOP,
                           seven_letter_pair)
from iet_lab.spectral import singularity_data, splitting


@pytest.fixture(scope="session")
def ctx():
    return PrecisionContext(128)


@pytest.fixture(scope="session")
def periodic7(ctx):
    return build_periodic_from_loop(seven_letter_pair(), SEVEN_LOOP, ctx)


@pytest.fixture(scope="session")
def periodic4(ctx):
    return build_periodic_from_matrix(make_symmetric_pair(4), GROUPED_MATRIX, ctx)


@pytest.fixture(scope="session")
def periodic5(ctx):
    return build_periodic_from_matrix(make_symmetric_pair(5), FIVE_MATRIX, ctx)


@pytest.fixture(scope="session")
def splitting4(ctx, periodic4):
    kappa = singularity_data(periodic4.pair).kappa
    return splitting(periodic4.matrix, periodic4.lengths, ctx, kappa=kappa)


@pytest.fixture(scope="session")
def splitting5(ctx, periodic5):
    kappa = singularity_data(periodic5.pair).kappa
    return splitting(periodic5.matrix, periodic5.lengths, ctx, kappa=kappa)


@pytest.fixture(scope="session")
def renorm4(periodic4):
    return Renormalizer(periodic4)


@pytest.fixture(scope="session")
def renorm5(periodic5):
    return Renormalizer(periodic5)


@pytest.fixture(scope="session")
def gammas(ctx, periodic7):
    """The three interior marks of the grouped system (seven-letter sums)."""
    lam = periodic7.lengths
    mp = ctx.mp
    return (lam[0],
            mp.fsum([lam[0], lam[1], lam[2]]),
            mp.fsum([lam[i] for i in range(6)]))
