"""Maximum-entropy distributions of order statistics with given marginals.

The package builds the density in two coupled layers: marginal vectors on
the real line (joint density, entropy, sampling) and multidiagonals on
[0, 1] (the exchangeable maximum-entropy copula).  A verification battery
cross-checks every closed form against quadrature and Monte Carlo.
"""

from .cdfs import (AverageCdf, BetaOneKCdf, ComposedDeltaCdf, ExponentialCdf,
                   MarginalCdf, OrderStatUniformCdf, PiecewiseLinearCdf,
                   UniformCdf, generalized_inverse, marginal_from_dict)
from .copula import (CopulaKernel, c_F_density, c_delta_density,
                     copula_entropy_closed, order_stat_copula_entropy,
                     sample_copula, symmetrize_density, unsymmetrize_density)
from .errors import (Degenerate, DimensionTooLarge, InvalidMarginal,
                     MaxentError, NotAbsolutelyContinuous, NotInF0, OutOfPsi,
                     RootBracketFailure)
from .intervals import IntervalSet
from .joint import (DegeneracyReport, MaxEntModel, build_model,
                    detect_degenerate, f_F_density, hazard,
                    joint_entropy_closed, sample)
from .marginals import (MarginalVector, average_cdf, check_stochastic_order,
                        in_support_LF, j_functional,
                        marginal_vector_from_dict, psi_intervals,
                        sigma_measure)
from .multidiag import (Multidiagonal, delta_inverse, delta_psi,
                        j_functional_delta, multidiagonal_from_marginals,
                        multidiagonal_of_iid_uniform, validate_multidiagonal)
from .verify import (CheckResult, VerificationReport, ks_distance,
                     run_full_verification)

__version__ = "0.1.0"

__all__ = [
    "AverageCdf", "BetaOneKCdf", "CheckResult", "ComposedDeltaCdf",
    "CopulaKernel", "Degenerate", "DegeneracyReport", "DimensionTooLarge",
    "ExponentialCdf", "IntervalSet", "InvalidMarginal", "MarginalCdf",
    "MarginalVector", "MaxEntModel", "MaxentError", "Multidiagonal",
    "NotAbsolutelyContinuous", "NotInF0", "OrderStatUniformCdf", "OutOfPsi",
    "PiecewiseLinearCdf", "RootBracketFailure", "UniformCdf",
    "VerificationReport", "average_cdf", "build_model", "c_F_density",
    "c_delta_density", "check_stochastic_order", "copula_entropy_closed",
    "delta_inverse", "delta_psi", "detect_degenerate", "f_F_density",
    "generalized_inverse", "hazard", "in_support_LF", "j_functional",
    "j_functional_delta", "joint_entropy_closed", "ks_distance",
    "marginal_from_dict", "marginal_vector_from_dict",
    "multidiagonal_from_marginals", "multidiagonal_of_iid_uniform",
    "order_stat_copula_entropy", "psi_intervals", "run_full_verification",
    "sample", "sample_copula", "sigma_measure", "symmetrize_density",
    "unsymmetrize_density", "validate_multidiagonal",
]
