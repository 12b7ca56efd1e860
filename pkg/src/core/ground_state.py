"""
DGBO Ground States
Petviashvili iteration for D^beta Q + Q - Q^(k+1) = 0 and the closed-form
profiles that exist for (beta, k) = (1, 1) and (2, 1).
"""
import logging
from dataclasses import dataclass
from typing import List, Literal, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from pydantic import Field as ConfigField

from src.core.exceptions import (
    DegenerateIterationError,
    DivergenceError,
    InvalidInputError,
    UndefinedRatioError,
)
from src.core.functionals import (
    IdentityReport,
    energy,
    k_opt,
    mass,
    verify_identities,
    weinstein_ratio,
)
from src.core.spectral import (
    Field,
    Grid,
    ModelParams,
    dealiased_power,
    dealiased_power_spectrum,
    fractional_derivative,
    fractional_symbol,
    inverse_transform,
)

logger = logging.getLogger(__name__)

MIN_RESOLVED_LENGTH = 50.0
CERTIFICATE_FLOOR = 1e-6
CERTIFIED_RESIDUAL = 1e-8
MIN_RESOLVED_POINTS = 256
SHAPE_TOLERANCE = 1e-10
COLLAPSE_LEVEL = 1e-300


class PetviashviliConfig(BaseModel):
    """Settings of the Petviashvili iteration."""

    model_config = ConfigDict(extra="forbid")

    tolerance: float = ConfigField(1e-12, gt=0, description="Successive-iterate L-infinity tolerance")
    residual_tolerance: float = ConfigField(1e-10, gt=0, description="Relative equation residual tolerance")
    max_iterations: int = ConfigField(500, ge=1, description="Iteration cap")
    stabilization_exponent: Optional[float] = ConfigField(
        None, gt=1.0, description="Exponent of the stabilizing factor; default (k+1)/k"
    )
    initial_guess: Literal["gaussian_bump", "closed_form_seed", "user_field"] = ConfigField(
        "gaussian_bump", description="Seed profile"
    )
    seed_width: Optional[float] = ConfigField(
        None, gt=0, description="Gaussian seed width; default min(100 dx, L/8)"
    )


@dataclass(frozen=True)
class GroundState:
    """A converged ground state together with its certificates."""

    profile: Field
    params: ModelParams
    residual: float
    iterations: int
    identity_report: IdentityReport
    mass: float
    energy: float
    sharpness_ratio: float
    residual_history: Tuple[float, ...] = ()
    certificate_failures: Tuple[str, ...] = ()

    @property
    def grid(self) -> Grid:
        return self.profile.grid

    @property
    def certified(self) -> bool:
        return not self.certificate_failures


class ShapeDefects(NamedTuple):
    asymmetry: float
    monotonicity: float
    minimum: float


def truncation_tolerance(params: ModelParams, length: float) -> float:
    """
    Error model for periodic-box effects on the norm identities.

    The ground-state tail decays like |x|^-(1+beta) for beta < 2, so the
    identity defects scale like (2 pi / L)^(1+beta). For beta = 2 the decay
    is exponential and only the floor remains.
    """
    floor = 1e-9
    if params.beta >= 2.0:
        return floor
    return 20.0 * (2.0 * np.pi / length) ** (1.0 + params.beta) + floor


def certificate_tolerance(params: ModelParams, length: float) -> float:
    """Allowed sharpness and identity defects of a certified ground state."""
    return max(CERTIFICATE_FLOOR, truncation_tolerance(params, length))


def closed_form_oracle(params: ModelParams, grid: Grid) -> Optional[Field]:
    """
    Exact periodic ground state when one is known.

    For (1, 1) this is the periodic Benjamin-Ono wave
    kappa*sinh(g)/(cosh(g) - cos(kappa x)) with kappa = 2 pi / L and
    tanh(g) = kappa, which tends to 2/(1+x^2) as L grows. It exists only
    for L > 2 pi. For (2, 1) the profile is (3/2) sech^2(x/2), exact up
    to exponentially small box effects.

    Returns:
        Field, or None when no closed form applies
    """
    x = np.asarray(grid.x)
    if params.beta == 1.0 and params.k == 1:
        kappa = 2.0 * np.pi / grid.length
        if kappa >= 1.0:
            logger.debug(f"No periodic Benjamin-Ono wave for L={grid.length}")
            return None
        g = np.arctanh(kappa)
        return Field(grid, kappa * np.sinh(g) / (np.cosh(g) - np.cos(kappa * x)))
    if params.beta == 2.0 and params.k == 1:
        return Field(grid, 1.5 / np.cosh(0.5 * x) ** 2)
    return None


def line_soliton(params: ModelParams, grid: Grid) -> Optional[Field]:
    """Whole-line profile sampled on the grid: 2/(1+x^2) or (3/2) sech^2(x/2)."""
    x = np.asarray(grid.x)
    if params.beta == 1.0 and params.k == 1:
        return Field(grid, 2.0 / (1.0 + x ** 2))
    if params.beta == 2.0 and params.k == 1:
        return Field(grid, 1.5 / np.cosh(0.5 * x) ** 2)
    return None


def equation_residual(Q: Field, params: ModelParams) -> float:
    """
    Relative residual ||D^beta Q + Q - Q^(k+1)|| / ||Q||.

    Raises:
        UndefinedRatioError: If Q is identically zero
    """
    norm = np.sqrt(mass(Q))
    if norm == 0.0:
        raise UndefinedRatioError("profile is identically zero", "equation residual")
    residual = fractional_derivative(Q, params.beta) + Q - dealiased_power(Q, params.k + 1)
    return float(np.sqrt(mass(residual)) / norm)


def profile_shape_defects(Q: Field) -> ShapeDefects:
    """
    Deviation from an even, positive profile decreasing away from x = 0.

    Returns:
        asymmetry: max |Q(x) - Q(-x)|
        monotonicity: largest increase of Q along x >= 0 (0 when decreasing)
        minimum: min Q
    """
    samples = Q.samples
    asymmetry = float(np.max(np.abs(samples - samples[Q.grid.mirror_index])))
    half = np.concatenate([samples[Q.grid.center_index:], samples[:1]])
    monotonicity = float(max(0.0, np.max(np.diff(half))))
    return ShapeDefects(asymmetry, monotonicity, float(np.min(samples)))


def resolution_warning(grid: Grid) -> None:
    if grid.length < MIN_RESOLVED_LENGTH or grid.n_points < MIN_RESOLVED_POINTS:
        logger.warning(
            f"Grid n={grid.n_points}, L={grid.length} is likely under-resolved "
            f"(recommended L >= {MIN_RESOLVED_LENGTH:g}, n >= {MIN_RESOLVED_POINTS})"
        )


def _initial_guess(
    params: ModelParams,
    grid: Grid,
    config: PetviashviliConfig,
    initial_field: Optional[Field],
) -> np.ndarray:
    if initial_field is not None:
        if initial_field.grid != grid:
            raise InvalidInputError("initial field lives on a different grid")
        return np.array(initial_field.samples)
    if config.initial_guess == "user_field":
        raise InvalidInputError("initial_guess='user_field' requires an initial field")
    if config.initial_guess == "closed_form_seed":
        oracle = closed_form_oracle(params, grid)
        if oracle is not None:
            return np.array(oracle.samples)
        logger.info(f"No closed form for beta={params.beta}, k={params.k}; seeding with a sech^2 bump")
        return 1.0 / np.cosh(np.asarray(grid.x)) ** 2
    width = config.seed_width or min(100.0 * grid.dx, grid.length / 8.0)
    return np.exp(-(np.asarray(grid.x) / width) ** 2)


def _symmetrize(samples: np.ndarray, grid: Grid) -> np.ndarray:
    peak = int(np.argmax(samples))
    if peak != grid.center_index:
        samples = np.roll(samples, grid.center_index - peak)
    return 0.5 * (samples + samples[grid.mirror_index])


def certify_ground_state(
    profile: Field,
    params: ModelParams,
    iterations: int = 0,
    history: Sequence[float] = (),
) -> GroundState:
    """
    Attach residual, identity report and sharpness ratio to a profile.

    The state is certified when the equation residual is below 1e-8, the
    sharpness ratio and the identity residuals are within
    ``certificate_tolerance`` of their exact values, and the profile is
    even, non-negative and decreasing away from x = 0. The weighted
    Pohozaev residual only counts when the identity report is trusted.
    Failed certificates are listed in ``certificate_failures``.

    Raises:
        UndefinedRatioError: If the profile is identically zero
    """
    residual = equation_residual(profile, params)
    report = verify_identities(profile, params)
    q_mass = mass(profile)
    sharpness = weinstein_ratio(profile, params) / k_opt(params, q_mass)
    tolerance = certificate_tolerance(params, profile.grid.length)

    failures: List[str] = []
    if not residual <= CERTIFIED_RESIDUAL:
        failures.append(f"equation residual {residual:.3e} > {CERTIFIED_RESIDUAL:.1e}")
    if not abs(sharpness - 1.0) <= tolerance:
        failures.append(f"sharpness ratio {sharpness:.12g} off by more than {tolerance:.3e}")
    identity_residuals = {
        "c1": report.residual_c1,
        "c2": report.residual_c2,
        "c3": report.residual_c3,
        "c4": report.residual_c4,
        "EQ": report.residual_EQ,
    }
    if report.trusted:
        identity_residuals["pohozaev"] = report.residual_pohozaev
    failures.extend(
        f"identity {name} residual {value:.3e} > {tolerance:.3e}"
        for name, value in identity_residuals.items()
        if not value <= tolerance
    )
    defects = profile_shape_defects(profile)
    if defects.asymmetry > SHAPE_TOLERANCE or defects.monotonicity > SHAPE_TOLERANCE or defects.minimum < -SHAPE_TOLERANCE:
        failures.append(f"profile shape defects {tuple(defects)}")
    if failures:
        logger.warning(
            f"Ground state beta={params.beta}, k={params.k} on n={profile.grid.n_points}, "
            f"L={profile.grid.length} is not certified: {'; '.join(failures)}"
        )

    return GroundState(
        profile=profile,
        params=params,
        residual=residual,
        iterations=iterations,
        identity_report=report,
        mass=q_mass,
        energy=energy(profile, params),
        sharpness_ratio=sharpness,
        residual_history=tuple(history),
        certificate_failures=tuple(failures),
    )


def petviashvili_solve(
    params: ModelParams,
    grid: Grid,
    config: Optional[PetviashviliConfig] = None,
    initial_field: Optional[Field] = None,
) -> GroundState:
    """
    Compute the ground state by stabilized fixed-point iteration.

    Each step maps Q to S^gamma * (1 + |xi|^beta)^-1 [Q^(k+1)], with
    S = <(1+D^beta)Q, Q> / <Q^(k+1), Q>. The iterate is re-centered and
    symmetrized under x -> -x after every step.

    Args:
        params: Model parameters
        grid: Periodic grid
        config: Iteration settings
        initial_field: Seed profile, used instead of the configured guess

    Returns:
        GroundState

    Raises:
        DivergenceError: If the stopping rule is not met within max_iterations
        DegenerateIterationError: If the iterate collapses or S overflows
        InvalidInputError: If the stabilization exponent is out of range
    """
    config = config or PetviashviliConfig()
    k = params.k
    gamma = config.stabilization_exponent or (k + 1.0) / k
    if not 1.0 < gamma < (k + 2.0) / k:
        raise InvalidInputError(f"stabilization exponent {gamma} outside (1, {(k + 2.0) / k:.6g})")
    resolution_warning(grid)

    symbol = 1.0 + fractional_symbol(grid, params.beta)
    scale = grid.dx / grid.n_points
    samples = _symmetrize(_initial_guess(params, grid, config, initial_field), grid)
    spectrum = np.fft.fft(samples)
    nonlinear = dealiased_power_spectrum(spectrum, k + 1)
    history: List[float] = []

    logger.info(f"Petviashvili: beta={params.beta}, k={k}, n={grid.n_points}, L={grid.length}, gamma={gamma:.6g}")
    for iteration in range(1, config.max_iterations + 1):
        linear_pair = scale * np.sum(symbol * np.abs(spectrum) ** 2)
        nonlinear_pair = scale * np.real(np.sum(nonlinear * np.conj(spectrum)))
        if not np.isfinite(nonlinear_pair) or nonlinear_pair <= 0.0:
            raise DegenerateIterationError(f"<Q^(k+1), Q> = {nonlinear_pair:.3e}", iteration)
        with np.errstate(over="ignore"):
            factor = (linear_pair / nonlinear_pair) ** gamma
        if not np.isfinite(factor) or factor <= 0.0:
            raise DegenerateIterationError(f"stabilizing factor {factor!r}", iteration)

        updated = _symmetrize(inverse_transform(factor * nonlinear / symbol), grid)
        if not np.all(np.isfinite(updated)) or np.max(np.abs(updated)) < COLLAPSE_LEVEL:
            raise DegenerateIterationError("iterate collapsed or became non-finite", iteration)

        change = float(np.max(np.abs(updated - samples)))
        samples = updated
        spectrum = np.fft.fft(samples)
        nonlinear = dealiased_power_spectrum(spectrum, k + 1)
        residual = float(
            np.sqrt(np.sum(np.abs(symbol * spectrum - nonlinear) ** 2) / np.sum(np.abs(spectrum) ** 2))
        )
        history.append(residual)
        logger.debug(f"iteration {iteration}: change={change:.3e}, residual={residual:.3e}, S={factor:.6g}")

        if change < config.tolerance and residual < config.residual_tolerance:
            logger.info(f"Petviashvili converged in {iteration} iterations, residual {residual:.3e}")
            return certify_ground_state(Field(grid, samples), params, iteration, history)

    raise DivergenceError(
        f"tolerance {config.tolerance:.1e} / residual {config.residual_tolerance:.1e} not reached",
        history,
    )
