"""Numerical laboratory for a damped cubic Szego-type flow on the circle.

Spectral PDE solver on the positive-frequency modes, exact rank-one
(b, c, p) dynamics and its three-variable reductions, Hankel/shifted-Hankel
spectral analysis, closed-form asymptotic constants, and experiment drivers
for blow-up rates, scattering rates and stationary data.
"""

from .asymptotics import (
    AsymptoticCharge,
    AsymptoticConstants,
    constants,
    construct_sigma_point,
    matrix_A,
    scatter_tail_solve,
)
from .errors import (
    ConfigError,
    DegenerateParameters,
    EigensolverError,
    InequalityViolated,
    InsufficientSamples,
    NewtonDiverged,
    NoContraction,
    NonFiniteState,
    OrderingViolated,
    SearchFailed,
    SigmaCheckFailed,
    SzegoError,
    TruncationBreach,
)
from .evolve import Trajectory, evolve, lyapunov_residual
from .experiments import (
    ClassifyResult,
    FitResult,
    StationaryCandidate,
    classify,
    fit_exp_rate,
    fit_power_law,
    kappa_check,
    stationary_norms_sq,
    stationary_rho_solver,
    stationary_search,
    sweep,
)
from .hankel import (
    F_functional,
    SpectrumReport,
    hankel_sq_matrix,
    lax_generator,
    lax_residual,
    omega_membership,
    spectrum,
    toeplitz_abs2_matrix,
)
from .modes import (
    ModeVector,
    Params,
    beta_term,
    cubic_term,
    mass,
    mean,
    mode_vector_from_json,
    mode_vector_to_json,
    momentum,
    rhs_full,
    shift_down,
    shift_up,
    sobolev_sq,
    tail_fraction,
)
from .rank_one import (
    RankOneState,
    RankOneTrajectory,
    ReducedState,
    ReducedTrajectory,
    bcp_rhs,
    dist_to_CM,
    embed,
    evolve_bcp,
    evolve_reduced,
    rank_one_mass,
    rank_one_momentum,
    rank_one_sobolev_sq,
    reduced_rhs,
    to_reduced,
)

__version__ = "0.1.0"
