"""
DGBO Verification Suite
Named end-to-end checks against closed forms, exact identities and
numerical convergence rates.

Checks register themselves with ``@check(name)`` and receive a
``VerifyContext``; each returns a ``CheckResult``. ``reduced`` resolution
halves n and L (same spacing) and relaxes truncation-dominated tolerances
through the truncation-error model.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core.evolution import EvolutionConfig, duhamel_picard_solve, evolve, linear_group, traveling_wave_check
from src.core.exceptions import ConfigError, DGBOError, NoContractionError
from src.core.functionals import k_opt, weinstein_ratio
from src.core.ground_state import (
    GroundState,
    closed_form_oracle,
    line_soliton,
    petviashvili_solve,
    truncation_tolerance,
)
from src.core.spectral import (
    Field,
    ModelParams,
    l2_norm,
    linf_norm,
    lp_norm_pow,
    make_grid,
    random_smooth_field,
    sobolev_seminorm,
)
from src.core.threshold import barrier_function, check_conditions, equivalence_defects, verify_apriori_bound

logger = logging.getLogger(__name__)

MATRIX_BETAS = (1.25, 1.5, 1.75)
MATRIX_KS = (3, 4, 5)


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: Dict[str, Any] = field(default_factory=dict)
    message: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "passed": self.passed, "details": self.details, "message": self.message}


@dataclass
class VerifyContext:
    resolution: str = "default"
    seed: int = 0
    _states: Dict[Tuple[float, int, int, float], GroundState] = field(default_factory=dict)

    @property
    def reduced(self) -> bool:
        return self.resolution == "reduced"

    def scaled(self, n_points: int, length: float) -> Tuple[int, float]:
        return (n_points // 2, length / 2.0) if self.reduced else (n_points, length)

    def rng(self, salt: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])

    def ground_state(self, params: ModelParams, n_points: int, length: float) -> GroundState:
        n_points, length = self.scaled(n_points, length)
        key = (params.beta, params.k, n_points, length)
        if key not in self._states:
            self._states[key] = petviashvili_solve(params, make_grid(n_points, length))
        return self._states[key]


CheckFunction = Callable[[VerifyContext], CheckResult]
CHECKS: Dict[str, CheckFunction] = {}


def check(name: str):
    """Decorator to register a verification check.

    Args:
        name: The name to register the check under

    Returns:
        Decorator function
    """
    def decorator(func: CheckFunction) -> CheckFunction:
        CHECKS[name] = func
        return func
    return decorator


def _result(name: str, measured: Dict[str, Tuple[float, float]], **extra: Any) -> CheckResult:
    """Build a result from {label: (value, limit)} pairs, passing when every value <= limit."""
    details: Dict[str, Any] = {label: {"value": value, "limit": limit} for label, (value, limit) in measured.items()}
    details.update(extra)
    failures = [label for label, (value, limit) in measured.items() if not value <= limit]
    return CheckResult(name, not failures, details, f"failed: {', '.join(failures)}" if failures else "ok")


# ===========================================
# Ground states against closed forms
# ===========================================

@check("bo_soliton")
def check_bo_soliton(ctx: VerifyContext) -> CheckResult:
    params = ModelParams(1.0, 1)
    state = ctx.ground_state(params, 4096, 200.0)
    grid = state.grid
    kappa = 2.0 * np.pi / grid.length
    oracle = closed_form_oracle(params, grid)
    line = line_soliton(params, grid)
    gradient = sobolev_seminorm(state.profile, 0.5) ** 2
    return _result("bo_soliton", {
        "residual": (state.residual, 1e-10),
        "periodic_oracle_linf": (linf_norm(state.profile - oracle), 1e-8),
        "line_profile_linf": (linf_norm(state.profile - line), kappa ** 2),
        "mass_rel_error": (abs(state.mass - 2.0 * np.pi) / (2.0 * np.pi), 1e-9),
        "gradient_error": (abs(gradient - np.pi * (1.0 - kappa ** 2)), 1e-8),
        "c3_vs_box_value": (abs(state.identity_report.residual_c3 - 0.5 * kappa ** 2), 1e-8),
    }, iterations=state.iterations, length=grid.length)


@check("kdv_soliton")
def check_kdv_soliton(ctx: VerifyContext) -> CheckResult:
    params = ModelParams(2.0, 1)
    state = ctx.ground_state(params, 2048, 100.0)
    oracle = closed_form_oracle(params, state.grid)
    slope = sobolev_seminorm(state.profile, 1.0) ** 2
    return _result("kdv_soliton", {
        "residual": (state.residual, 1e-10),
        "oracle_linf": (linf_norm(state.profile - oracle), 1e-8),
        "c1": (state.identity_report.residual_c1, 1e-8),
        "mass_error": (abs(state.mass - 6.0), 1e-8),
        "cubic_error": (abs(lp_norm_pow(state.profile, 3) - 7.2), 1e-8),
        "slope_error": (abs(slope - 1.2), 1e-8),
    }, iterations=state.iterations)


@check("sharp_constant")
def check_sharp_constant(ctx: VerifyContext) -> CheckResult:
    measured: Dict[str, Tuple[float, float]] = {}
    rng = ctx.rng(3)
    for beta in MATRIX_BETAS:
        for k in MATRIX_KS:
            params = ModelParams(beta, k)
            state = ctx.ground_state(params, 8192, 400.0)
            tolerance = truncation_tolerance(params, state.grid.length)
            measured[f"closure_{beta}_{k}"] = (abs(state.sharpness_ratio - 1.0), tolerance)
            worst = max(
                weinstein_ratio(random_smooth_field(state.grid, rng, max_mode=64), params)
                for _ in range(200)
            ) / k_opt(params, state.mass)
            measured[f"random_{beta}_{k}"] = (worst, 1.0 + 1e-6)
    return _result("sharp_constant", measured)


@check("identities")
def check_identities(ctx: VerifyContext) -> CheckResult:
    measured: Dict[str, Tuple[float, float]] = {}
    for beta in MATRIX_BETAS:
        for k in MATRIX_KS:
            params = ModelParams(beta, k)
            state = ctx.ground_state(params, 8192, 400.0)
            report = state.identity_report
            sigma = params.sigma
            tag = f"{beta}_{k}"
            measured[f"max_residual_{tag}"] = (report.max_residual, truncation_tolerance(params, state.grid.length))
            measured[f"c3_dependence_{tag}"] = (
                report.residual_c3 - ((k + 2) * report.residual_c2 + 2.0 * report.residual_c1) / sigma, 1e-12
            )
            measured[f"c4_dependence_{tag}"] = (
                report.residual_c4 - report.residual_c2 - abs(sigma - 2.0) / (k + 2) * report.residual_c1, 1e-12
            )

    state = ctx.ground_state(ModelParams(1.0, 1), 4096, 200.0)
    measured["pohozaev_box_value"] = (
        abs(state.identity_report.residual_pohozaev - periodic_pohozaev_residual(state.grid.length)), 1e-8
    )
    return _result("identities", measured)


def periodic_pohozaev_residual(length: float) -> float:
    """Normalized weighted-integral residual of the periodic Benjamin-Ono wave."""
    kappa = 2.0 * np.pi / length
    edge = kappa * np.tanh(0.5 * np.arctanh(kappa))
    weighted = length * (edge ** 3 / 3.0 - edge ** 2 / 2.0) + np.pi * kappa ** 2 / 3.0
    return abs(weighted) / (2.0 * np.pi)


# ===========================================
# Dynamics
# ===========================================

@check("linear_group")
def check_linear_group(ctx: VerifyContext) -> CheckResult:
    rng = ctx.rng(5)
    grid = make_grid(256, 50.0)
    unitarity = group_law = 0.0
    for _ in range(100):
        params = ModelParams(float(rng.uniform(1.0, 2.0)), 1)
        u = random_smooth_field(grid, rng)
        t, s = rng.uniform(-2.0, 2.0, size=2)
        norm = l2_norm(u)
        unitarity = max(unitarity, abs(l2_norm(linear_group(u, t, params.beta)) - norm) / norm)
        composed = linear_group(linear_group(u, s, params.beta), t, params.beta)
        group_law = max(group_law, l2_norm(composed - linear_group(u, t + s, params.beta)) / norm)
    return _result("linear_group", {"unitarity": (unitarity, 1e-13), "group_law": (group_law, 1e-12)})


def convergence_orders(params: ModelParams, u0: Field, t_end: float, steps: Sequence[float]) -> List[float]:
    """Observed orders log2(e(h) / e(h/2)), errors measured against a run at a quarter of the finest step."""
    def final(dt: float) -> Field:
        return evolve(u0, params, EvolutionConfig(dt=dt, t_end=t_end, output_stride=10 ** 6)).final

    reference = final(0.25 * min(steps))
    errors = [l2_norm(final(dt) - reference) for dt in steps]
    return [math.log2(a / b) for a, b in zip(errors, errors[1:])]


@check("conservation")
def check_conservation(ctx: VerifyContext) -> CheckResult:
    params = ModelParams(1.0, 5)
    state = ctx.ground_state(params, 16384, 200.0)
    record = evolve(0.5 * state.profile, params, EvolutionConfig(dt=5e-4, t_end=1.0, output_stride=100))

    order_params = ModelParams(1.5, 2)
    grid = make_grid(256, 60.0)
    u0 = Field.from_function(grid, lambda x: 1.5 * np.exp(-x ** 2 / 9.0))
    orders = convergence_orders(order_params, u0, 0.4, (0.01, 0.005, 0.0025))

    kdv = ModelParams(2.0, 1)
    phase = traveling_wave_check(closed_form_oracle(kdv, make_grid(1024, 100.0)), kdv, 1.0, 1e-3)
    measured = {
        "mass_drift": (record.mass_drift, 1e-10),
        "energy_drift": (record.energy_drift, 1e-8),
        "kdv_phase_error": (phase, 1e-6),
    }
    measured.update({f"order_deviation_{i}": (abs(order - 4.0), 0.2) for i, order in enumerate(orders)})
    result = _result("conservation", measured, status=record.status, orders=orders, certified=state.certified)
    if not record.completed:
        result.passed = False
        result.message = f"evolution ended with status {record.status}"
    return result


@check("duhamel_picard")
def check_duhamel_picard(ctx: VerifyContext) -> CheckResult:
    params = ModelParams(1.5, 4)
    grid = make_grid(256, 40.0)
    u0 = Field.from_function(grid, lambda x: 0.5 * np.exp(-x ** 2))
    config = EvolutionConfig(dt=1e-3, t_end=0.01, output_stride=10 ** 6)
    rk4 = evolve(u0, params, config).final
    picard = duhamel_picard_solve(u0, 0.01, params, config)

    large = Field.from_function(grid, lambda x: 2.0 * np.exp(-x ** 2))
    try:
        duhamel_picard_solve(large, 5.0, params, EvolutionConfig(dt=1.25, t_end=5.0))
        refused = False
    except NoContractionError:
        refused = True
    result = _result("duhamel_picard", {"cross_check_l2": (l2_norm(rk4 - picard), 1e-8)}, no_contraction_raised=refused)
    if not refused:
        result.passed = False
        result.message = "large-time Picard iteration did not report no-contraction"
    return result


# ===========================================
# Threshold
# ===========================================

@check("threshold")
def check_threshold(ctx: VerifyContext) -> CheckResult:
    measured: Dict[str, Tuple[float, float]] = {}
    bounds: Dict[str, bool] = {}
    for beta, k, n_points in ((1.0, 5, 16384), (1.5, 4, 4096)):
        params = ModelParams(beta, k)
        state = ctx.ground_state(params, n_points, 200.0)
        for amplitude in (0.25, 0.5, 0.75):
            u0 = amplitude * state.profile
            report = check_conditions(u0, state, params)
            tag = f"{beta}_{k}_{amplitude}"
            energy_gap, gradient_gap = equivalence_defects(report)
            measured[f"equivalence_energy_{tag}"] = (energy_gap, 1e-9)
            measured[f"equivalence_gradient_{tag}"] = (gradient_gap, 1e-9)
            if not report.admissible:
                bounds[tag] = False
                continue
            record = evolve(u0, params, EvolutionConfig(dt=5e-4, t_end=1.0, output_stride=20))
            bounds[tag] = verify_apriori_bound(record, report, state)
    result = _result("threshold", measured, apriori_bound=bounds)
    if not all(bounds.values()):
        result.passed = False
        result.message = "a-priori bound failed for " + ", ".join(tag for tag, ok in bounds.items() if not ok)
    return result


@check("barrier")
def check_barrier(ctx: VerifyContext) -> CheckResult:
    rng = ctx.rng(9)
    worst_slope, worst_value, concave = 0.0, 0.0, True
    for _ in range(50):
        k = int(rng.integers(5, 9))
        beta = float(rng.uniform(1.0, min(2.0, 0.5 * k - 0.25)))
        B = float(np.exp(rng.uniform(np.log(0.1), np.log(10.0))))
        params = ModelParams(beta, k)
        barrier = barrier_function(params, B)
        x0, f = barrier.x0, barrier.f
        h = 1e-3 * x0
        slope = (-f(x0 + 2 * h) + 8 * f(x0 + h) - 8 * f(x0 - h) + f(x0 - 2 * h)) / (12 * h)
        worst_slope = max(worst_slope, abs(slope))
        worst_value = max(worst_value, abs(f(x0) - barrier.f_x0) / barrier.f_x0)
        concave = concave and f(x0 + h) - 2 * f(x0) + f(x0 - h) < 0
    quadratic = barrier_function(ModelParams(1.0, 4), 1.0)
    measured = {
        "slope_at_maximizer": (worst_slope, 1e-10),
        "maximum_value": (worst_value, 1e-12),
        "quadratic_x0": (abs(quadratic.x0 - 0.5), 1e-15),
        "quadratic_f_x0": (abs(quadratic.f_x0 - 0.25), 1e-15),
    }
    result = _result("barrier", measured, concave=concave)
    if not concave:
        result.passed = False
        result.message = "barrier not concave at maximizer"
    return result


def run_checks(names: Optional[Sequence[str]], ctx: VerifyContext) -> List[CheckResult]:
    """
    Run the named checks in the given order (all registered checks when names is empty).

    Raises:
        ConfigError: On an unknown check name
    """
    selected = list(CHECKS) if not names else list(names)
    unknown = [name for name in selected if name not in CHECKS]
    if unknown:
        raise ConfigError(f"unknown check(s) {unknown}; available: {sorted(CHECKS)}", "verify.checks")
    results = []
    for name in selected:
        logger.info(f"Running check {name} ({ctx.resolution} resolution)")
        try:
            result = CHECKS[name](ctx)
        except DGBOError as exc:
            logger.error(f"Check {name} raised {type(exc).__name__}: {exc}")
            result = CheckResult(name, False, {"error": type(exc).__name__}, str(exc))
        logger.info(f"Check {name}: {'PASS' if result.passed else 'FAIL'} ({result.message})")
        results.append(result)
    return results
