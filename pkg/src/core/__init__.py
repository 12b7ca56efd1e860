"""
DGBO Core Module
Numerical components of the DGBO toolkit: spectral operators, functionals,
ground states, time evolution and the threshold test.
"""

# Spectral core
from .spectral import (
    Grid,
    Field,
    ModelParams,
    make_grid,
    fractional_derivative,
    hilbert_transform,
    spatial_derivative,
    translate,
    dealiased_power,
    l2_norm,
    sobolev_seminorm,
    lp_norm_pow,
    linf_norm,
    random_smooth_field,
)

# Functionals
from .functionals import (
    ConservedPair,
    IdentityReport,
    mass,
    energy,
    conserved_quantities,
    weinstein_ratio,
    k_opt,
    verify_identities,
)

# Ground states
from .ground_state import (
    GroundState,
    PetviashviliConfig,
    petviashvili_solve,
    closed_form_oracle,
    line_soliton,
    equation_residual,
    truncation_tolerance,
)

# Evolution
from .evolution import (
    EvolutionConfig,
    PicardConfig,
    TrajectoryRecord,
    linear_group,
    rhs_nonlinear,
    step_if_rk4,
    duhamel_picard_solve,
    evolve,
)

# Threshold
from .threshold import (
    ThresholdConfig,
    ThresholdReport,
    compute_sk,
    check_conditions,
    barrier_function,
    verify_apriori_bound,
)

# Exceptions
from .exceptions import (
    DGBOError,
    ConfigError,
    InvalidGridError,
    InvalidExponentError,
    InvalidInputError,
    ResourceError,
    UndefinedRatioError,
    DivergenceError,
    DegenerateIterationError,
    InstabilityError,
    NoContractionError,
    InapplicableTheoremError,
    ConsistencyError,
)


__all__ = [
    # Spectral core
    'Grid',
    'Field',
    'ModelParams',
    'make_grid',
    'fractional_derivative',
    'hilbert_transform',
    'spatial_derivative',
    'translate',
    'dealiased_power',
    'l2_norm',
    'sobolev_seminorm',
    'lp_norm_pow',
    'linf_norm',
    'random_smooth_field',

    # Functionals
    'ConservedPair',
    'IdentityReport',
    'mass',
    'energy',
    'conserved_quantities',
    'weinstein_ratio',
    'k_opt',
    'verify_identities',

    # Ground states
    'GroundState',
    'PetviashviliConfig',
    'petviashvili_solve',
    'closed_form_oracle',
    'line_soliton',
    'equation_residual',
    'truncation_tolerance',

    # Evolution
    'EvolutionConfig',
    'PicardConfig',
    'TrajectoryRecord',
    'linear_group',
    'rhs_nonlinear',
    'step_if_rk4',
    'duhamel_picard_solve',
    'evolve',

    # Threshold
    'ThresholdConfig',
    'ThresholdReport',
    'compute_sk',
    'check_conditions',
    'barrier_function',
    'verify_apriori_bound',

    # Exceptions
    'DGBOError',
    'ConfigError',
    'InvalidGridError',
    'InvalidExponentError',
    'InvalidInputError',
    'ResourceError',
    'UndefinedRatioError',
    'DivergenceError',
    'DegenerateIterationError',
    'InstabilityError',
    'NoContractionError',
    'InapplicableTheoremError',
    'ConsistencyError',
]
