"""Finite-dimensional statistics of inverse Lévy subordinators."""

from .errors import (
    DomainError,
    HorizonError,
    InvSubError,
    NumericError,
    RangeError,
    UnsupportedError,
    ValidationError,
)
from .exponent import (
    JumpDistribution,
    SubordinatorModel,
    composite,
    compound_poisson,
    deterministic_jumps,
    discrete_jumps,
    drift_only,
    exponential_jumps,
    gamma_process,
    inverse_gaussian,
    load_model,
    mean_of_D1,
    mixed_stable,
    model_from_dict,
    phi,
    phi_limit_at_infinity,
    stable,
)
from .jointlaw import JointPoint, boundary_check, htilde, pde_residual
from .laplace import InversionConfig, LaplaceFunction, invert, invert_grid
from .mc import (
    EstimatorResult,
    PathSkeleton,
    estimate_joint_moment,
    event_equality_check,
    first_passage,
    simulate_path,
)
from .moments import MomentSpec, MomentTable, covariance, fractional_moment, joint_moment, moment_table
from .renewal import (
    RenewalGrid,
    build_renewal_grid,
    convolve_with_dU,
    renewal_asymptote,
    renewal_function,
)

__version__ = "0.1.0"
