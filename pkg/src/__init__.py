"""
DGBO Toolkit
Ground states, dynamics and the sharp global-existence threshold for the
k-dispersion generalized Benjamin-Ono equation

    u_t - D^beta u_x + (u^(k+1))_x = 0

on a periodic box.

Quick Start:
    from src import ModelParams, make_grid, petviashvili_solve

    params = ModelParams(beta=1.0, k=5)
    state = petviashvili_solve(params, make_grid(8192, 200.0))
    print(state.residual, state.identity_report.residual_c3)
"""

from .core import (
    Grid,
    Field,
    ModelParams,
    make_grid,
    GroundState,
    PetviashviliConfig,
    petviashvili_solve,
    EvolutionConfig,
    TrajectoryRecord,
    evolve,
    ThresholdReport,
    check_conditions,
    verify_apriori_bound,
    DGBOError,
)


__version__ = '1.0.0'
__author__ = 'DGBO Team'

__all__ = [
    'Grid',
    'Field',
    'ModelParams',
    'make_grid',
    'GroundState',
    'PetviashviliConfig',
    'petviashvili_solve',
    'EvolutionConfig',
    'TrajectoryRecord',
    'evolve',
    'ThresholdReport',
    'check_conditions',
    'verify_apriori_bound',
    'DGBOError',
]
