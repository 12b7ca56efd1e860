"""
DGBO Functionals
Mass, energy, the Weinstein functional and the ground-state norm identities.

Sign convention: the nonlinear integral in the energy is the signed
integral of u**(k+2); the Weinstein functional uses |u|**(k+2).
"""
import logging
from dataclasses import asdict, dataclass
from typing import Dict

import numpy as np

from src.core.exceptions import InvalidInputError, UndefinedRatioError
from src.core.spectral import (
    Field,
    ModelParams,
    fractional_derivative,
    lp_norm_pow,
    sobolev_seminorm,
    spatial_derivative,
)

logger = logging.getLogger(__name__)

DECAY_TOLERANCE = 1e-6


@dataclass(frozen=True)
class ConservedPair:
    """Mass, energy and ||D^(beta/2) u|| of one snapshot."""

    mass: float
    energy: float
    h_half_beta: float


@dataclass(frozen=True)
class IdentityReport:
    """
    Relative residuals of the norm identities satisfied by a ground state.

    All residuals are normalized by ||Q||^2.

    Attributes:
        residual_c1: Q-equation paired with Q
        residual_c2: Q-equation paired with the dilation generator
        residual_c3: gradient-mass identity
        residual_c4: nonlinear-mass identity
        residual_pohozaev: Pohozaev-type weighted integral
        residual_EQ: energy-mass identity
        trusted: False when Q is off-center or has not decayed at the box edge
    """

    residual_c1: float
    residual_c2: float
    residual_c3: float
    residual_c4: float
    residual_pohozaev: float
    residual_EQ: float
    trusted: bool = True

    @property
    def max_residual(self) -> float:
        return max(
            self.residual_c1,
            self.residual_c2,
            self.residual_c3,
            self.residual_c4,
            self.residual_pohozaev,
            self.residual_EQ,
        )

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


def mass(u: Field) -> float:
    """||u||^2 by the rectangle rule (spectrally accurate on periodic data)."""
    return float(np.sum(u.samples ** 2) * u.grid.dx)


def energy(u: Field, params: ModelParams) -> float:
    """
    E(u) = 1/2 ||D^(beta/2) u||^2 - 1/(k+2) * integral of u^(k+2).

    Args:
        u: Field
        params: Model parameters

    Returns:
        Energy value
    """
    gradient = sobolev_seminorm(u, params.beta / 2.0) ** 2
    return 0.5 * gradient - lp_norm_pow(u, params.k + 2) / (params.k + 2)


def conserved_quantities(u: Field, params: ModelParams) -> ConservedPair:
    gradient = sobolev_seminorm(u, params.beta / 2.0)
    potential = lp_norm_pow(u, params.k + 2) / (params.k + 2)
    return ConservedPair(
        mass=mass(u),
        energy=0.5 * gradient ** 2 - potential,
        h_half_beta=gradient,
    )


def weinstein_ratio(f: Field, params: ModelParams) -> float:
    """
    Weinstein functional of f.

    W(f) = integral |f|^(k+2) / (||D^(beta/2) f||^(k/beta) * ||f||^(sigma/beta))

    Raises:
        UndefinedRatioError: If f is zero or has no non-constant modes
    """
    beta, k = params.beta, params.k
    gradient = sobolev_seminorm(f, beta / 2.0)
    norm = np.sqrt(mass(f))
    if gradient == 0.0 or norm == 0.0:
        raise UndefinedRatioError("gradient or L2 norm vanishes", "weinstein ratio")
    numerator = lp_norm_pow(f, k + 2, absolute=True)
    return float(numerator / (gradient ** (k / beta) * norm ** (params.sigma / beta)))


def k_opt(params: ModelParams, q_mass: float) -> float:
    """
    Sharp Gagliardo-Nirenberg constant K_opt^(k+2) from the ground-state mass.

    Args:
        params: Model parameters
        q_mass: ||Q||^2 of the ground state

    Returns:
        K_opt raised to the power k+2

    Raises:
        InvalidInputError: If q_mass is not positive
    """
    if not q_mass > 0:
        raise InvalidInputError(f"ground-state mass must be positive, got {q_mass}")
    beta, k, sigma = params.beta, params.k, params.sigma
    base = (sigma / k) ** (1.0 / beta) / q_mass
    return (k + 2) * beta / sigma * base ** (k / 2.0)


def gagliardo_nirenberg_holds(
    f: Field,
    params: ModelParams,
    q_mass: float,
    slack: float = 1e-6,
) -> bool:
    """True when W(f) <= K_opt^(k+2) * (1 + slack)."""
    return weinstein_ratio(f, params) <= k_opt(params, q_mass) * (1.0 + slack)


def gradient_from_mass_identity(params: ModelParams, q_mass: float) -> float:
    """||D^(beta/2) Q||^2 = k/sigma * ||Q||^2."""
    return params.k / params.sigma * q_mass


def energy_from_mass_identity(params: ModelParams, q_mass: float) -> float:
    """E(Q) = 1/2 (k - 2beta)/sigma * ||Q||^2."""
    return 0.5 * (params.k - 2.0 * params.beta) / params.sigma * q_mass


def verify_identities(
    Q: Field,
    params: ModelParams,
    decay_tolerance: float = DECAY_TOLERANCE,
) -> IdentityReport:
    """
    Evaluate the six ground-state identities on a candidate profile.

    Residuals are data: large values are returned, never raised.

    Args:
        Q: Candidate ground state, centered at x = 0
        params: Model parameters
        decay_tolerance: Edge-to-peak ratio above which the report is untrusted

    Returns:
        IdentityReport

    Raises:
        UndefinedRatioError: If Q is identically zero
    """
    beta, k, sigma = params.beta, params.k, params.sigma
    q_mass = mass(Q)
    if q_mass == 0.0:
        raise UndefinedRatioError("profile is identically zero", "identity residual")

    nonlinear = lp_norm_pow(Q, k + 2)
    gradient = sobolev_seminorm(Q, beta / 2.0) ** 2
    dispersion = fractional_derivative(Q, beta).samples
    slope = spatial_derivative(Q).samples
    weighted = float(np.sum(Q.grid.x * slope * dispersion) * Q.grid.dx)
    energy_q = 0.5 * gradient - nonlinear / (k + 2)

    c1 = abs(nonlinear - q_mass - gradient)
    c2 = abs(2.0 * nonlinear / (k + 2) - q_mass + (beta - 1.0) * gradient)
    c3 = abs(k * q_mass / sigma - gradient)
    c4 = abs(sigma * nonlinear / (k + 2) - beta * q_mass)
    pohozaev = abs(weighted - 0.5 * (beta - 1.0) * gradient)
    energy_defect = abs(energy_q - energy_from_mass_identity(params, q_mass))

    samples = np.abs(Q.samples)
    peak_index = int(np.argmax(samples))
    peak = samples[peak_index]
    centered = abs(peak_index - Q.grid.center_index) <= 1
    decayed = samples[0] <= decay_tolerance * peak
    trusted = bool(centered and decayed)
    if not trusted:
        logger.warning(
            f"Identity report untrusted: centered={centered}, "
            f"edge/peak={samples[0] / peak:.3e} (limit {decay_tolerance:.1e})"
        )

    return IdentityReport(
        residual_c1=c1 / q_mass,
        residual_c2=c2 / q_mass,
        residual_c3=c3 / q_mass,
        residual_c4=c4 / q_mass,
        residual_pohozaev=pohozaev / q_mass,
        residual_EQ=energy_defect / q_mass,
        trusted=trusted,
    )
