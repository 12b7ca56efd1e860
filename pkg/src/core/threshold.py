"""
DGBO Threshold
Classification of initial data against the sharp global-existence
threshold in the mass-supercritical regime k > 2*beta.

Notation:
    s_k = 1/2 - beta/k            critical Sobolev index
    sigma = 2 + (k+2)(beta-1)
    X = ||D^(beta/2) u||^2, M = ||u||^2, E = energy
    A = 2E(u0), B = 2/(k+2) * K_opt^(k+2) * ||u0||^(sigma/beta)
    f(x) = x - B x^(k/(2 beta)), maximized at x0 with f(x0) = (k-2beta)/k * x0

Ground-state quantities on the right-hand sides come from M(Q) through the
norm identities, which makes the energy-mass form and the barrier form of
each condition algebraically identical. Directly computed values are kept
as a cross-check.
"""
import logging
import math
from dataclasses import asdict, dataclass, replace
from typing import Callable, Dict, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from pydantic import Field as ConfigField

from src.core.evolution import TrajectoryRecord
from src.core.exceptions import (
    ConsistencyError,
    InapplicableTheoremError,
    InvalidInputError,
)
from src.core.functionals import (
    ConservedPair,
    energy,
    energy_from_mass_identity,
    gradient_from_mass_identity,
    k_opt,
    mass,
)
from src.core.ground_state import GroundState
from src.core.spectral import Field, Grid, ModelParams, sobolev_seminorm

logger = logging.getLogger(__name__)

CONSISTENCY_TOLERANCE = 1e-9


class ThresholdConfig(BaseModel):
    """Certification settings for the strict threshold inequalities."""

    model_config = ConfigDict(extra="forbid")

    margin: float = ConfigField(1e-9, ge=0, lt=1, description="Minimum relative gap below equality")
    cross_check_tolerance: float = ConfigField(
        1e-6, gt=0, description="Allowed relative defect between identity-derived and direct E(Q)"
    )


class Barrier(NamedTuple):
    x0: float
    f_x0: float
    f: Callable[[float], float]


@dataclass(frozen=True)
class ThresholdReport:
    """
    Outcome of the threshold test for one initial datum.

    ``cond_energy_mass`` and ``cond_gradient_mass`` are certified strict
    inequalities: the barrier-form ratio must sit below 1 - margin.
    ``admissible`` also requires ``certified``, the ground state's own
    certificate.
    """

    params: ModelParams
    s_k: float
    mass: float
    energy: float
    gradient_sq: float
    q_mass: float
    q_energy: float
    q_gradient_sq: float
    q_energy_direct: float
    q_gradient_direct: float
    q_defect: float
    k_opt: float
    lhs_energy_mass: float
    rhs_energy_mass: float
    lhs_gradient_mass: float
    rhs_gradient_mass: float
    log_lhs_energy_mass: float
    log_rhs_energy_mass: float
    log_lhs_gradient_mass: float
    log_rhs_gradient_mass: float
    A: float
    B: float
    x0: float
    f_x0: float
    energy_ratio: float
    gradient_ratio: float
    margin: float
    energy_nonneg: bool
    cond_energy_mass: bool
    cond_gradient_mass: bool
    certified: bool
    admissible: bool
    trajectory_ok: Optional[bool] = None

    def to_dict(self) -> Dict[str, object]:
        """Flat JSON-ready mapping; non-finite numbers become None."""
        payload: Dict[str, object] = {"beta": self.params.beta, "k": self.params.k, "regime": self.params.regime}
        for key, value in asdict(self).items():
            if key == "params":
                continue
            if isinstance(value, float) and not math.isfinite(value):
                value = None
            payload[key] = value
        return payload


def compute_sk(params: ModelParams) -> float:
    """s_k = 1/2 - beta/k."""
    return 0.5 - params.beta / params.k


def _require_theorem(params: ModelParams) -> None:
    if not params.theorem_applies:
        raise InapplicableTheoremError("threshold requires k > 2*beta", params.beta, params.k)


def _log(value: float) -> float:
    if value > 0:
        return math.log(value)
    if value == 0:
        return -math.inf
    return math.nan


def _exp(value: float) -> float:
    if math.isnan(value):
        return math.nan
    try:
        return math.exp(value)
    except OverflowError:
        return math.inf


def barrier_function(params: ModelParams, B: float) -> Barrier:
    """
    Barrier f(x) = x - B x^(k/(2 beta)) and its maximizer.

    Args:
        params: Model parameters with k > 2*beta
        B: Positive coefficient

    Returns:
        Barrier(x0, f(x0), f)

    Raises:
        InvalidInputError: If B <= 0 or k <= 2*beta
    """
    beta, k = params.beta, params.k
    if not params.theorem_applies:
        raise InvalidInputError(f"barrier needs k > 2*beta, got beta={beta}, k={k}")
    if not (B > 0 and math.isfinite(B)):
        raise InvalidInputError(f"barrier coefficient must be positive, got {B}")
    power = k / (2.0 * beta)
    x0 = _exp(2.0 * beta / (k - 2.0 * beta) * (math.log(2.0 * beta / k) - math.log(B)))
    f_x0 = (k - 2.0 * beta) / k * x0

    def f(x: float) -> float:
        return x - B * x ** power

    return Barrier(x0, f_x0, f)


def dilate(u: Field, lam: float, params: ModelParams) -> Field:
    """
    Scaling symmetry u -> lam^(beta/k) u(lam x).

    The rescaled field has the same samples on a box of length L/lam, so the
    transformation is exact on the grid.
    """
    if not lam > 0:
        raise InvalidInputError(f"dilation factor must be positive, got {lam}")
    grid = Grid(u.grid.n_points, u.grid.length / lam)
    return Field(grid, lam ** (params.beta / params.k) * u.samples)


def evaluate_threshold(
    u_mass: float,
    u_energy: float,
    gradient_sq: float,
    Q: GroundState,
    params: ModelParams,
    config: Optional[ThresholdConfig] = None,
) -> ThresholdReport:
    """
    Classify data given only its mass, energy and ||D^(beta/2) u||^2.

    Raises:
        InapplicableTheoremError: If k <= 2*beta
        InvalidInputError: If Q was computed for other parameters
    """
    _require_theorem(params)
    if Q.params != params:
        raise InvalidInputError(f"ground state computed for {Q.params}, data for {params}")
    config = config or ThresholdConfig()
    beta, k, sigma = params.beta, params.k, params.sigma
    s = compute_sk(params)
    tail = beta / 2.0 - s
    exponent = sigma / (k - 2.0 * beta)

    q_mass = Q.mass
    q_energy = energy_from_mass_identity(params, q_mass)
    q_gradient = gradient_from_mass_identity(params, q_mass)
    q_energy_direct = Q.energy
    q_gradient_direct = sobolev_seminorm(Q.profile, beta / 2.0) ** 2
    energy_defect = abs(q_energy_direct - q_energy) / abs(q_energy)
    gradient_defect = abs(q_gradient_direct - q_gradient) / q_gradient
    q_defect = max(energy_defect, gradient_defect)
    if energy_defect > config.cross_check_tolerance:
        logger.warning(
            f"E(Q) cross-check: identity {q_energy:.12g} vs direct {q_energy_direct:.12g} "
            f"(relative defect {energy_defect:.3e})"
        )
    margin = max(config.margin, 2.0 * q_defect)
    if margin > config.margin:
        logger.warning(f"Certification margin widened from {config.margin:.1e} to {margin:.3e} by the E(Q) defect")
    if not Q.certified:
        logger.warning(
            f"Ground state for beta={beta}, k={k} is not certified "
            f"({'; '.join(Q.certificate_failures)}); data is reported inadmissible"
        )
    constant = k_opt(params, q_mass)

    log_mass, log_q_mass = _log(u_mass), math.log(q_mass)
    log_lhs_em = s * _log(u_energy) + tail * log_mass if u_mass > 0 else _zero_or_nan(u_energy)
    log_rhs_em = s * math.log(q_energy) + tail * log_q_mass
    log_lhs_gm = 0.5 * (s * _log(gradient_sq) + tail * log_mass) if u_mass > 0 else -math.inf
    log_rhs_gm = 0.5 * (s * math.log(q_gradient) + tail * log_q_mass)

    A = 2.0 * u_energy
    if u_mass > 0:
        B = 2.0 / (k + 2) * constant * u_mass ** (sigma / (2.0 * beta))
        log_x0 = math.log(k / sigma) + k * beta / (k - 2.0 * beta) * log_q_mass - exponent * log_mass
        x0 = _exp(log_x0)
        f_x0 = (k - 2.0 * beta) / k * x0
        log_f_x0 = math.log((k - 2.0 * beta) / k) + log_x0
    else:
        B, x0, f_x0 = 0.0, math.inf, math.inf
        log_x0 = log_f_x0 = math.inf

    energy_nonneg = u_energy >= 0
    log_energy_ratio = _log(A) - log_f_x0 if math.isfinite(log_f_x0) else (-math.inf if energy_nonneg else math.nan)
    log_gradient_ratio = _log(gradient_sq) - log_x0 if math.isfinite(log_x0) else -math.inf
    energy_ratio = _exp(log_energy_ratio) if energy_nonneg else math.nan
    gradient_ratio = _exp(log_gradient_ratio)

    cond_em = bool(energy_nonneg and energy_ratio < 1.0 - margin)
    cond_gm = bool(gradient_ratio < 1.0 - margin)

    report = ThresholdReport(
        params=params,
        s_k=s,
        mass=u_mass,
        energy=u_energy,
        gradient_sq=gradient_sq,
        q_mass=q_mass,
        q_energy=q_energy,
        q_gradient_sq=q_gradient,
        q_energy_direct=q_energy_direct,
        q_gradient_direct=q_gradient_direct,
        q_defect=q_defect,
        k_opt=constant,
        lhs_energy_mass=_exp(log_lhs_em),
        rhs_energy_mass=_exp(log_rhs_em),
        lhs_gradient_mass=_exp(log_lhs_gm),
        rhs_gradient_mass=_exp(log_rhs_gm),
        log_lhs_energy_mass=log_lhs_em,
        log_rhs_energy_mass=log_rhs_em,
        log_lhs_gradient_mass=log_lhs_gm,
        log_rhs_gradient_mass=log_rhs_gm,
        A=A,
        B=B,
        x0=x0,
        f_x0=f_x0,
        energy_ratio=energy_ratio,
        gradient_ratio=gradient_ratio,
        margin=margin,
        energy_nonneg=bool(energy_nonneg),
        cond_energy_mass=cond_em,
        cond_gradient_mass=cond_gm,
        certified=Q.certified,
        admissible=bool(cond_em and energy_nonneg and cond_gm and Q.certified),
    )
    logger.debug(
        f"Threshold beta={beta}, k={k}: 2E/f(x0)={energy_ratio:.6g}, X/x0={gradient_ratio:.6g}, "
        f"admissible={report.admissible}"
    )
    return report


def _zero_or_nan(u_energy: float) -> float:
    return -math.inf if u_energy == 0 else math.nan


def check_conditions(
    u0: Field,
    Q: GroundState,
    params: ModelParams,
    config: Optional[ThresholdConfig] = None,
) -> ThresholdReport:
    """
    Evaluate the energy-mass and gradient-mass conditions for u0.

    Args:
        u0: Initial data
        Q: Ground state for the same (beta, k)
        params: Model parameters
        config: Certification settings

    Returns:
        ThresholdReport with trajectory_ok unset

    Raises:
        InapplicableTheoremError: If k <= 2*beta
        InvalidInputError: If Q was computed for other parameters
    """
    _require_theorem(params)
    return evaluate_threshold(
        mass(u0),
        energy(u0, params),
        sobolev_seminorm(u0, params.beta / 2.0) ** 2,
        Q,
        params,
        config,
    )


def equivalence_defects(report: ThresholdReport) -> Tuple[float, float]:
    """
    Relative gaps between the norm form and the barrier form of each condition.

    2E/f(x0) = (lhs/rhs)^(1/s_k) for the energy-mass condition and
    X/x0 = (lhs/rhs)^(2/s_k) for the gradient-mass condition. Undefined
    comparisons (negative energy, zero data) report 0.
    """
    s = report.s_k

    def gap(log_ratio: float, log_lhs: float, log_rhs: float, power: float) -> float:
        other = power * (log_lhs - log_rhs)
        if not (math.isfinite(log_ratio) and math.isfinite(other)):
            return 0.0
        return abs(math.expm1(log_ratio - other))

    energy_gap = 0.0
    if report.energy_nonneg and report.energy > 0:
        energy_gap = gap(
            _log(report.energy_ratio), report.log_lhs_energy_mass, report.log_rhs_energy_mass, 1.0 / s
        )
    gradient_gap = gap(
        _log(report.gradient_ratio), report.log_lhs_gradient_mass, report.log_rhs_gradient_mass, 2.0 / s
    )
    return energy_gap, gradient_gap


def gradient_bound_forms(report: ThresholdReport, pair: ConservedPair) -> Tuple[float, float]:
    """
    Log-ratios of the gradient-mass bound at one snapshot.

    Returns (2/s_k) log(lhs(t) / rhs) for the norm form, with
    lhs(t) = ||D^(beta/2) u||^s_k * ||u||^(beta/2 - s_k), and log(X(t) / x0)
    for the barrier form. The bound holds when both are negative.
    """
    s = report.s_k
    tail = report.params.beta / 2.0 - s
    log_x0 = _log(report.x0) if math.isfinite(report.x0) else math.inf
    log_h = _log(pair.h_half_beta)
    log_lhs = s * log_h + 0.5 * tail * _log(pair.mass) if pair.mass > 0 else -math.inf
    with np.errstate(invalid="ignore"):
        norm_form = 2.0 / s * (log_lhs - report.log_rhs_gradient_mass)
        barrier_form = 2.0 * log_h - log_x0
    return norm_form, barrier_form


def verify_apriori_bound(trajectory: TrajectoryRecord, report: ThresholdReport, Q: GroundState) -> bool:
    """
    Check the gradient-mass bound at every recorded time.

    Both forms are evaluated: the norm form against the ground state and
    X(t) < x0 with x0 fixed by the initial data. They differ only through
    mass drift.

    Returns:
        True when the bound held at every recorded time

    Raises:
        InapplicableTheoremError: If the report is not admissible
        InvalidInputError: If the trajectory, report and Q disagree on (beta, k)
        ConsistencyError: If the two forms disagree by more than 1e-9
    """
    params = report.params
    if trajectory.params != params or Q.params != params:
        raise InvalidInputError("trajectory, report and ground state must share (beta, k)")
    if not report.admissible:
        raise InapplicableTheoremError("a-priori bound needs admissible data", params.beta, params.k)

    held = True
    for t, pair in zip(trajectory.times, trajectory.conserved):
        norm_form, barrier_form = gradient_bound_forms(report, pair)
        norm_ok, barrier_ok = norm_form < 0, barrier_form < 0
        if norm_ok != barrier_ok:
            if abs(norm_form - barrier_form) > CONSISTENCY_TOLERANCE:
                raise ConsistencyError(
                    f"norm form {norm_form:.3e} and barrier form {barrier_form:.3e} disagree", t
                )
            held = False
        elif not norm_ok:
            logger.info(f"A-priori bound violated at t={t:.6g}")
            held = False
    return held


def with_trajectory(report: ThresholdReport, trajectory_ok: bool) -> ThresholdReport:
    return replace(report, trajectory_ok=trajectory_ok)
