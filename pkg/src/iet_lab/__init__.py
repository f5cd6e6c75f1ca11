"""iet_lab: interval exchange transformations of periodic type, their
Lyapunov data, and the growth and recurrence of cocycles over them."""

from .cocycles import (PiecewiseLinearCocycle, Renormalizer, StepCocycle,
                       birkhoff_sum, deviation_profile, evaluate, m_index,
                       partition_pn, renormalize, return_time_matrix, towers)
from .correction import (CorrectionResult, correct_bv, correct_step,
                         growth_check, renorm_sup_curve)
from .ergodicity import (build_fixed_cocycle, coboundary_classify,
                         essential_value_probe, fixed_space_basis,
                         lattice_containment, skew_simulate,
                         special_flow_step)
from .errors import IetLabError
from .perms import PermutationPair, make_pair, make_symmetric_pair
from .precision import PrecisionContext, RealVector
from .rauzy import (Iet, PeriodicIet, RauzyStep, build_periodic_from_loop,
                    build_periodic_from_matrix, iet_from_json,
                    iterate_induction, keane_check, omega_matrix, rauzy_step)
from .rotations import (ContinuedFraction, continued_fraction,
                        denjoy_koksma_check, product_rotation_simulate,
                        three_distance_gaps)
from .spectral import (LyapunovSpectrum, Splitting, lyapunov_spectrum,
                       nu_ratio, singularity_data, splitting)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
