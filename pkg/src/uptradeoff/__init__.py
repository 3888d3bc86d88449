"""Utility-privacy trade-offs with mutual information.

Given a finite joint pmf of private data X and useful data Y, build
release mechanisms U and bound the best utility I(Y;U) achievable under a
leakage budget I(X;U) <= epsilon, both when the curator observes (X, Y)
(``full``) and when it only observes Y (``public``).
"""

from ._accel import backend
from .config import Tolerances, tol, use_tolerances
from .envelope import (PiecewiseLinear, TradeoffCurve, TradeoffPoint, evaluate_envelope,
                       sanity_band, upper_concave_envelope)
from .errors import (CapExceeded, InvariantViolation, LpInfeasible, UptError,
                     ValidationError)
from .full import (AlgorithmOneTrace, SubsetRestriction, algorithm1, algorithm1_joint,
                   curve_full_exhaustive, curve_full_greedy, curve_full_nonalgorithmic,
                   curve_point_from_subset, g0_full_closed_3x2, g0_full_closed_binary,
                   g0_full_lower_bound, g0_full_upper_bound, restrict_to_z,
                   verify_k_independence)
from .oracle import (ExtremePointSet, LpProblem, LpSolution, OracleResult,
                     enumerate_extreme_full, enumerate_extreme_public, exact_g0_full,
                     exact_g0_public, simplex_solve)
from .prob import (Channel, EvaluatedMechanism, JointPmf, Mechanism, Pmf, binary_entropy,
                   compose_mechanisms, condition, entropy, evaluate_mechanism, joint_from,
                   kl_divergence, marginals, mutual_information, numerical_rank,
                   random_joint, support, validate_pmf)
from .public import (AlgorithmThreeTrace, OrderingPlan, algorithm3, curve_public_exhaustive,
                     curve_public_greedy, curve_public_stage, g0_public_formula_bound,
                     rank_bounds)

__version__ = "0.1.0"
