"""
DGBO Run Configuration
Validated YAML run documents for the command-line harness.

Precedence (lowest first): model defaults, YAML file, DGBO_* environment
variables, command-line flags.
"""
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator
from pydantic import Field as ConfigField

from src.config import get_config
from src.core.artifacts import digest
from src.core.evolution import EvolutionConfig
from src.core.exceptions import ConfigError
from src.core.ground_state import PetviashviliConfig
from src.core.spectral import Grid, ModelParams, make_grid
from src.core.threshold import ThresholdConfig

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelSection(_Section):
    beta: float = ConfigField(1.0, ge=1.0, le=2.0, description="Dispersion exponent")
    k: int = ConfigField(5, ge=1, description="Nonlinearity power")

    def params(self) -> ModelParams:
        return ModelParams(self.beta, self.k)


class GridSection(_Section):
    n_points: int = ConfigField(4096, ge=8, description="Grid nodes (even)")
    length: float = ConfigField(200.0, gt=0, description="Box length")

    @field_validator("n_points")
    @classmethod
    def _even(cls, value: int) -> int:
        if value % 2:
            raise ValueError("n_points must be even")
        return value

    def grid(self) -> Grid:
        return make_grid(self.n_points, self.length)


class InitialDataSection(_Section):
    kind: Literal["zero", "gaussian", "sech", "soliton", "file"] = "soliton"
    amplitude: float = ConfigField(1.0, description="Multiplier of the base profile")
    width: float = ConfigField(1.0, gt=0, description="Width of gaussian and sech profiles")
    path: Optional[str] = ConfigField(None, description="Field dump for kind=file")


class ThresholdSection(ThresholdConfig):
    amplitudes: List[float] = ConfigField(default_factory=lambda: [0.5], min_length=1)
    run_evolution: bool = ConfigField(False, description="Evolve admissible data and check the a-priori bound")

    def certification(self) -> ThresholdConfig:
        return ThresholdConfig(margin=self.margin, cross_check_tolerance=self.cross_check_tolerance)


class SweepSection(_Section):
    betas: List[float] = ConfigField(default_factory=lambda: [1.0], min_length=1)
    ks: List[int] = ConfigField(default_factory=lambda: [5], min_length=1)
    amplitudes: List[float] = ConfigField(default_factory=lambda: [0.5], min_length=1)

    @field_validator("betas")
    @classmethod
    def _betas(cls, values: List[float]) -> List[float]:
        for beta in values:
            if not 1.0 <= beta <= 2.0:
                raise ValueError(f"beta={beta} outside [1, 2]")
        return values

    @field_validator("ks")
    @classmethod
    def _ks(cls, values: List[int]) -> List[int]:
        for k in values:
            if k < 1:
                raise ValueError(f"k={k} must be positive")
        return values


class OutputSection(_Section):
    directory: str = "runs"
    formats: List[Literal["json", "csv"]] = ConfigField(default_factory=lambda: ["json", "csv"])


class VerifySection(_Section):
    resolution: Literal["default", "reduced"] = "default"
    checks: Optional[List[str]] = None


class RunConfig(_Section):
    """Top-level run document."""

    schema_version: Literal[1] = SCHEMA_VERSION
    model: ModelSection = ConfigField(default_factory=ModelSection)
    grid: GridSection = ConfigField(default_factory=GridSection)
    ground_state: PetviashviliConfig = ConfigField(default_factory=PetviashviliConfig)
    ground_state_file: Optional[str] = ConfigField(None, description="Reuse a written ground state")
    evolution: EvolutionConfig = ConfigField(default_factory=EvolutionConfig)
    initial_data: InitialDataSection = ConfigField(default_factory=InitialDataSection)
    threshold: ThresholdSection = ConfigField(default_factory=ThresholdSection)
    sweep: SweepSection = ConfigField(default_factory=SweepSection)
    output: OutputSection = ConfigField(default_factory=OutputSection)
    verify: VerifySection = ConfigField(default_factory=VerifySection)
    seed: int = 0
    threads: int = ConfigField(1, ge=1)


def _validate(document: Dict[str, Any], source: str) -> RunConfig:
    try:
        return RunConfig.model_validate(document)
    except ValidationError as exc:
        first = exc.errors()[0]
        key = ".".join(str(part) for part in first["loc"])
        raise ConfigError(f"{first['msg']} ({exc.error_count()} error(s) in {source})", key) from exc


def load_run_config(path: Optional[str] = None) -> RunConfig:
    """
    Load a run document and apply environment overrides.

    Args:
        path: YAML file; defaults are used when omitted

    Returns:
        Validated RunConfig

    Raises:
        ConfigError: On a missing file, malformed YAML, unknown keys or bad values
    """
    document: Dict[str, Any] = {}
    source = "defaults"
    if path:
        file = Path(path)
        if not file.exists():
            raise ConfigError(f"file not found: {path}")
        try:
            loaded = yaml.safe_load(file.read_text())
        except yaml.YAMLError as exc:
            raise ConfigError(f"malformed YAML in {path}: {exc}") from exc
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"{path} must contain a mapping at top level")
        document, source = loaded, str(path)

    config = _validate(document, source)
    env = get_config()
    return apply_overrides(
        config,
        output_dir=str(env.output_dir) if env.output_dir else None,
        threads=env.threads,
        seed=env.seed,
    )


def apply_overrides(
    config: RunConfig,
    output_dir: Optional[str] = None,
    threads: Optional[int] = None,
    seed: Optional[int] = None,
) -> RunConfig:
    """Return a re-validated copy with the given top-level overrides."""
    document = config.model_dump(mode="json")
    if output_dir is not None:
        document["output"]["directory"] = output_dir
    if threads is not None:
        document["threads"] = threads
    if seed is not None:
        document["seed"] = seed
    return _validate(document, "overrides")


def config_hash(config: RunConfig) -> str:
    """SHA-256 of the canonical JSON dump, without settings that cannot change results."""
    return digest(config.model_dump(mode="json", exclude={"output", "threads"}))
