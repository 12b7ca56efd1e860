"""
Test the Petviashvili solver and the closed-form ground states.
"""
import numpy as np
import pytest

from src.core.exceptions import DivergenceError, InvalidInputError, UndefinedRatioError
from src.core.functionals import mass
from src.core.ground_state import (
    PetviashviliConfig,
    certificate_tolerance,
    certify_ground_state,
    closed_form_oracle,
    equation_residual,
    line_soliton,
    petviashvili_solve,
    profile_shape_defects,
    truncation_tolerance,
)
from src.core.spectral import Field, ModelParams, linf_norm, make_grid, translate


def power_soliton(params, grid):
    """((k+2)/2 sech^2(k x / 2))^(1/k), the beta = 2 ground state."""
    k = params.k
    x = grid.x
    return Field(grid, (0.5 * (k + 2) / np.cosh(0.5 * k * x) ** 2) ** (1.0 / k))


class TestClosedForms:
    """Tests for the closed-form profiles."""

    def test_no_oracle_for_general_parameters(self):
        """Only (1, 1) and (2, 1) have closed forms."""
        grid = make_grid(256, 60.0)
        assert closed_form_oracle(ModelParams(1.5, 4), grid) is None
        assert line_soliton(ModelParams(1.5, 4), grid) is None

    def test_no_periodic_bo_wave_on_short_box(self):
        """The periodic Benjamin-Ono wave needs L > 2 pi."""
        assert closed_form_oracle(ModelParams(1.0, 1), make_grid(64, 6.0)) is None

    def test_periodic_bo_wave_solves_equation(self):
        """The periodic wave has a spectrally small equation residual."""
        params = ModelParams(1.0, 1)
        oracle = closed_form_oracle(params, make_grid(4096, 200.0))
        assert equation_residual(oracle, params) < 1e-10

    def test_periodic_wave_approaches_line_profile(self):
        """The gap to 2/(1+x^2) is below kappa^2."""
        params = ModelParams(1.0, 1)
        grid = make_grid(4096, 200.0)
        kappa = 2.0 * np.pi / grid.length
        gap = linf_norm(closed_form_oracle(params, grid) - line_soliton(params, grid))
        assert gap < kappa ** 2

    def test_kdv_oracle_mass(self, kdv_oracle):
        """(3/2) sech^2(x/2) has mass 6."""
        assert mass(kdv_oracle) == pytest.approx(6.0, rel=1e-12)

    def test_zero_profile_residual_undefined(self, small_grid, kdv_params):
        """The residual of the zero profile is undefined."""
        with pytest.raises(UndefinedRatioError):
            equation_residual(Field.zeros(small_grid), kdv_params)


class TestTruncationTolerance:
    """Tests for the box-truncation error model."""

    def test_exponential_decay_keeps_floor(self):
        """beta = 2 profiles decay exponentially; only the floor remains."""
        assert truncation_tolerance(ModelParams(2.0, 5), 100.0) == pytest.approx(1e-9)

    def test_shrinks_with_box(self):
        """Larger boxes give smaller tolerances."""
        params = ModelParams(1.25, 4)
        assert truncation_tolerance(params, 400.0) < truncation_tolerance(params, 200.0)


class TestPetviashvili:
    """Tests for the ground-state iteration."""

    def test_kdv_matches_closed_form(self, kdv_state, kdv_oracle):
        """KdV ground state agrees with (3/2) sech^2(x/2)."""
        assert kdv_state.residual < 1e-10
        assert linf_norm(kdv_state.profile - kdv_oracle) < 1e-8
        assert kdv_state.mass == pytest.approx(6.0, rel=1e-9)
        assert kdv_state.energy == pytest.approx(-1.8, rel=1e-8)

    def test_kdv_certificates(self, kdv_state):
        """Identities close and the sharpness ratio is one."""
        assert kdv_state.identity_report.trusted
        assert kdv_state.identity_report.max_residual < 1e-9
        assert kdv_state.sharpness_ratio == pytest.approx(1.0, abs=1e-9)
        assert kdv_state.iterations == len(kdv_state.residual_history)
        assert kdv_state.residual_history[-1] < 1e-10

    def test_bo_matches_periodic_wave(self, bo_state):
        """Benjamin-Ono ground state agrees with the periodic wave."""
        oracle = closed_form_oracle(bo_state.params, bo_state.grid)
        assert linf_norm(bo_state.profile - oracle) < 1e-8
        assert bo_state.mass == pytest.approx(2.0 * np.pi, rel=1e-9)

    def test_supercritical_matches_power_soliton(self, quintic_state, quintic_params):
        """beta = 2, k = 5 agrees with the explicit sech profile."""
        expected = power_soliton(quintic_params, quintic_state.grid)
        assert linf_norm(quintic_state.profile - expected) < 1e-8
        assert quintic_state.identity_report.max_residual < 1e-8

    def test_profile_shape(self, quintic_state):
        """Ground states are even, positive and decreasing away from x = 0."""
        defects = profile_shape_defects(quintic_state.profile)
        assert defects.asymmetry < 1e-12
        assert defects.monotonicity < 1e-12
        assert defects.minimum > -1e-12

    def test_closed_form_seed_converges_immediately(self, kdv_params):
        """Seeding with the exact profile converges in a few iterations."""
        config = PetviashviliConfig(initial_guess="closed_form_seed")
        state = petviashvili_solve(kdv_params, make_grid(1024, 80.0), config)
        assert state.iterations < 20

    def test_user_field_seed(self, kdv_params, kdv_oracle):
        """A supplied initial field is used as the seed."""
        seed = Field(kdv_oracle.grid, 0.8 * kdv_oracle.samples)
        state = petviashvili_solve(kdv_params, kdv_oracle.grid, initial_field=seed)
        assert linf_norm(state.profile - kdv_oracle) < 1e-8

    def test_off_center_seed_is_recentered(self, kdv_params, kdv_oracle):
        """A translated seed still yields the centered ground state."""
        seed = translate(kdv_oracle, 3.0)
        state = petviashvili_solve(kdv_params, kdv_oracle.grid, initial_field=seed)
        assert int(np.argmax(state.profile.samples)) == kdv_oracle.grid.center_index
        assert linf_norm(state.profile - kdv_oracle) < 1e-8

    def test_user_field_required(self, kdv_params):
        """initial_guess='user_field' without a field is rejected."""
        config = PetviashviliConfig(initial_guess="user_field")
        with pytest.raises(InvalidInputError):
            petviashvili_solve(kdv_params, make_grid(256, 60.0), config)

    def test_seed_on_other_grid_rejected(self, kdv_params, small_grid):
        """The seed must live on the solver grid."""
        with pytest.raises(InvalidInputError):
            petviashvili_solve(kdv_params, make_grid(256, 60.0), initial_field=Field.zeros(small_grid))

    def test_stabilization_exponent_lower_bound(self):
        """Exponents <= 1 are rejected by the config model."""
        with pytest.raises(ValueError):
            PetviashviliConfig(stabilization_exponent=1.0)

    def test_stabilization_exponent_upper_bound(self, kdv_params):
        """Exponents >= (k+2)/k are rejected by the solver."""
        config = PetviashviliConfig(stabilization_exponent=3.0)
        with pytest.raises(InvalidInputError):
            petviashvili_solve(kdv_params, make_grid(256, 60.0), config)

    def test_iteration_cap(self, kdv_params):
        """Hitting max_iterations raises DivergenceError with the residual history."""
        config = PetviashviliConfig(max_iterations=3)
        with pytest.raises(DivergenceError) as exc_info:
            petviashvili_solve(kdv_params, make_grid(512, 60.0), config)
        assert len(exc_info.value.history) == 3

    def test_config_rejects_unknown_keys(self):
        """Unknown settings are rejected."""
        with pytest.raises(ValueError):
            PetviashviliConfig(tolerence=1e-9)


class TestCertify:
    """Tests for certification of externally supplied profiles."""

    def test_certify_closed_form(self, kdv_oracle, kdv_params):
        """Certifying the exact soliton gives a clean report."""
        state = certify_ground_state(kdv_oracle, kdv_params)
        assert state.residual < 1e-10
        assert state.iterations == 0
        assert state.grid == kdv_oracle.grid

    def test_certify_zero_rejected(self, small_grid, kdv_params):
        """A zero profile cannot be certified."""
        with pytest.raises(UndefinedRatioError):
            certify_ground_state(Field.zeros(small_grid), kdv_params)

    def test_closed_form_is_certified(self, kdv_oracle, kdv_params):
        """The exact soliton passes every certificate."""
        state = certify_ground_state(kdv_oracle, kdv_params)
        assert state.certified
        assert state.certificate_failures == ()

    def test_computed_states_are_certified(self, kdv_state, bo_state, quintic_state):
        """Converged states on resolved grids carry a clean certificate."""
        assert kdv_state.certified
        assert bo_state.certified
        assert quintic_state.certified

    def test_scaled_profile_fails_residual(self, kdv_oracle, kdv_params):
        """A multiple of Q no longer solves the equation and is not certified."""
        state = certify_ground_state(1.01 * kdv_oracle, kdv_params)
        assert not state.certified
        assert any("equation residual" in failure for failure in state.certificate_failures)

    def test_shifted_profile_fails_shape(self, kdv_oracle, kdv_params):
        """An off-center profile fails the even-profile certificate."""
        state = certify_ground_state(translate(kdv_oracle, 0.3), kdv_params)
        assert not state.certified
        assert any("shape" in failure for failure in state.certificate_failures)

    def test_certificate_tolerance(self):
        """Exponential decay keeps 1e-6; algebraic tails use the truncation model."""
        assert certificate_tolerance(ModelParams(2.0, 5), 80.0) == pytest.approx(1e-6)
        params = ModelParams(1.0, 5)
        assert certificate_tolerance(params, 200.0) == pytest.approx(truncation_tolerance(params, 200.0))

    @pytest.mark.slow
    def test_under_resolved_quintic_bo_is_not_certified(self, bo_quintic_state):
        """beta = 1, k = 5 needs a fine grid: 4096 nodes on L = 200 miss the sharpness certificate."""
        params = ModelParams(1.0, 5)
        coarse = petviashvili_solve(params, make_grid(4096, 200.0))
        assert not coarse.certified
        assert any("sharpness" in failure for failure in coarse.certificate_failures)
        assert bo_quintic_state.certified
        assert bo_quintic_state.sharpness_ratio == pytest.approx(1.0, abs=certificate_tolerance(params, 200.0))
