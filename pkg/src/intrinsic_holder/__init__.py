"""Intrinsic Hölder calculus on homogeneous Kolmogorov groups.

Group law and dilations, intrinsic Taylor polynomials, sampled Hölder norms,
group mollification and K-functional estimates.
"""
from .errors import *  # noqa: F401,F403
from .group import (BlockStructure, GroupPoint, HomogeneousGroup, IntrinsicIndex, Y, build_group,
                    langevin, random_structure)
from .poly import (PolyFunction, check_exchange_identities, enumerate_indices, poly_eval, poly_partial,
                   poly_Y, random_polynomial, taylor_eval, taylor_polynomial)
from .functions import ExprFunction, abs_power, bump, smooth_product, time_power
from .oracle import CombinationOracle, DerivativeOracle, FunctionOracle
from .holder import SamplingPlan, SeminormEstimate, holder_norm, holder_norms, seminorm
from .mollify import (BumpProfile, MollifiedFunction, MollifierSpec, QuadratureSpec, approximate,
                      approximate_derivative, build_mollifier, normalization_integral)
from .interp import (InterpolationQuery, KCurve, RateFit, interpolation_inequality_check,
                     k_functional_curve, k_functional_upper, rate_fit, theta_alpha_map)

__version__ = "0.1.0"
