"""
Initial data and ground-state acquisition for harness commands.
"""
import logging
from typing import Optional

import numpy as np

from src.core.artifacts import read_field, read_ground_state
from src.core.exceptions import ConfigError
from src.core.ground_state import GroundState, petviashvili_solve
from src.core.spectral import Field, Grid, ModelParams
from src.harness.run_config import InitialDataSection, RunConfig

logger = logging.getLogger(__name__)


def obtain_ground_state(config: RunConfig, params: Optional[ModelParams] = None) -> GroundState:
    """Load the configured ground-state artifact, or compute Q for the model."""
    params = params or config.model.params()
    if config.ground_state_file:
        state = read_ground_state(config.ground_state_file)
        if state.params != params:
            raise ConfigError(
                f"artifact holds beta={state.params.beta}, k={state.params.k}", "ground_state_file"
            )
        logger.info(f"Loaded ground state from {config.ground_state_file}")
        return state
    return petviashvili_solve(params, config.grid.grid(), config.ground_state)


def base_profile(section: InitialDataSection, grid: Grid, ground_state: Optional[GroundState] = None) -> Field:
    """Unscaled profile of the configured kind."""
    x = np.asarray(grid.x)
    if section.kind == "zero":
        return Field.zeros(grid)
    if section.kind == "gaussian":
        return Field(grid, np.exp(-(x / section.width) ** 2))
    if section.kind == "sech":
        return Field(grid, 1.0 / np.cosh(x / section.width) ** 2)
    if section.kind == "file":
        if not section.path:
            raise ConfigError("kind=file requires a path", "initial_data.path")
        field = read_field(section.path)
        if field.grid != grid:
            raise ConfigError(f"{section.path} is not on the configured grid", "initial_data.path")
        return field
    if ground_state is None:
        raise ConfigError("kind=soliton needs a ground state", "initial_data.kind")
    return ground_state.profile


def build_initial_data(section: InitialDataSection, grid: Grid, ground_state: Optional[GroundState] = None) -> Field:
    return section.amplitude * base_profile(section, grid, ground_state)
