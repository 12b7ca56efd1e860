"""
Test the linear group, the IF-RK4 integrator, the Duhamel-Picard solver and
the evolution monitor.
"""
import numpy as np
import pytest

from src.core.evolution import (
    EvolutionConfig,
    PicardConfig,
    _Monitor,
    compute_drift,
    default_time_step,
    duhamel_picard_solve,
    evolve,
    integration_matrix,
    is_exploratory,
    linear_group,
    lobatto_nodes,
    rhs_nonlinear,
    step_if_rk4,
    traveling_wave_check,
)
from src.core.exceptions import InstabilityError, InvalidInputError, NoContractionError
from src.core.functionals import ConservedPair
from src.core.ground_state import closed_form_oracle
from src.core.spectral import Field, ModelParams, l2_norm, linf_norm, make_grid, random_smooth_field, translate
from src.harness.verify import convergence_orders


@pytest.fixture(scope="module")
def kdv_wave():
    params = ModelParams(2.0, 1)
    return params, closed_form_oracle(params, make_grid(1024, 100.0))


@pytest.fixture
def gaussian():
    grid = make_grid(256, 40.0)
    return Field.from_function(grid, lambda x: 0.5 * np.exp(-x ** 2))


class TestLinearGroup:
    """Tests for the exact linear propagator."""

    def test_unitary(self, small_grid, rng):
        """U(t) preserves the L2 norm."""
        params = ModelParams(1.5, 3)
        u = random_smooth_field(small_grid, rng)
        assert l2_norm(linear_group(u, 2.7, params.beta)) == pytest.approx(l2_norm(u), rel=1e-12)

    def test_group_law(self, small_grid, rng):
        """U(t) U(s) = U(t + s)."""
        params = ModelParams(1.25, 3)
        u = random_smooth_field(small_grid, rng)
        composed = linear_group(linear_group(u, 0.4, params.beta), -1.1, params.beta)
        direct = linear_group(u, -0.7, params.beta)
        assert l2_norm(composed - direct) < 1e-12 * l2_norm(u)

    def test_identity_at_zero(self, small_grid, rng):
        """U(0) is the identity."""
        u = random_smooth_field(small_grid, rng)
        assert np.allclose(linear_group(u, 0.0, 1.0).samples, u.samples, atol=1e-14)

    def test_kdv_mode_phase(self, small_grid):
        """For beta = 2 a mode cos(xi x) moves as cos(xi (x + xi^2 t))."""
        xi = 3 * 2.0 * np.pi / small_grid.length
        u = Field.from_function(small_grid, lambda x: np.cos(xi * x))
        result = linear_group(u, 0.3, 2.0)
        assert np.allclose(result.samples, np.cos(xi * (small_grid.x + xi ** 2 * 0.3)), atol=1e-12)


class TestNonlinearTerm:
    """Tests for the dealiased nonlinear right-hand side."""

    def test_zero_field(self, small_grid):
        """N(0) = 0."""
        assert linf_norm(rhs_nonlinear(Field.zeros(small_grid), ModelParams(1.0, 3))) == 0.0

    def test_quadratic_mode(self, small_grid):
        """-(cos^2(m kappa x))_x = m kappa sin(2 m kappa x)."""
        kappa = 2.0 * np.pi / small_grid.length
        u = Field.from_function(small_grid, lambda x: np.cos(2 * kappa * x))
        result = rhs_nonlinear(u, ModelParams(1.0, 1))
        assert np.allclose(result.samples, 2 * kappa * np.sin(4 * kappa * small_grid.x), atol=1e-12)

    def test_coefficient_scales(self, small_grid, rng):
        """The nonlinear coefficient multiplies the term."""
        params = ModelParams(1.5, 2)
        u = random_smooth_field(small_grid, rng, amplitude=0.5)
        base = rhs_nonlinear(u, params)
        scaled = rhs_nonlinear(u, params, nonlinear_coefficient=-2.0)
        assert np.allclose(scaled.samples, -2.0 * base.samples, atol=1e-12)


class TestIFRK4:
    """Tests for single integrating-factor steps."""

    def test_linear_step_is_exact(self, small_grid, rng):
        """Without nonlinearity one step equals the linear group."""
        params = ModelParams(1.5, 3)
        u = random_smooth_field(small_grid, rng)
        stepped = step_if_rk4(u, 0.25, params, nonlinear_coefficient=0.0)
        assert np.allclose(stepped.samples, linear_group(u, 0.25, params.beta).samples, atol=1e-13)

    @pytest.mark.parametrize("dt", [0.0, -0.1])
    def test_nonpositive_step_rejected(self, small_grid, dt):
        """dt must be positive."""
        with pytest.raises(InvalidInputError):
            step_if_rk4(Field.zeros(small_grid), dt, ModelParams(1.0, 1))


class TestQuadrature:
    """Tests for the Gauss-Lobatto nodes and integration matrices."""

    def test_three_nodes(self):
        """Three Lobatto nodes are -1, 0, 1."""
        assert np.allclose(lobatto_nodes(3), [-1.0, 0.0, 1.0], atol=1e-15)

    def test_four_nodes(self):
        """Interior nodes for four points are +-1/sqrt(5)."""
        expected = [-1.0, -1.0 / np.sqrt(5.0), 1.0 / np.sqrt(5.0), 1.0]
        assert np.allclose(lobatto_nodes(4), expected, atol=1e-14)

    def test_simpson_row(self):
        """Last row of the three-node matrix holds Simpson weights."""
        matrix = integration_matrix(lobatto_nodes(3))
        assert np.allclose(matrix[0], 0.0)
        assert np.allclose(matrix[-1], [1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0], atol=1e-14)

    def test_exact_for_cubics(self):
        """Four nodes integrate t^3 exactly from -1 to each node."""
        nodes = lobatto_nodes(4)
        integrals = integration_matrix(nodes) @ nodes ** 3
        assert np.allclose(integrals, (nodes ** 4 - 1.0) / 4.0, atol=1e-14)


class TestEvolve:
    """Tests for full evolutions."""

    def test_zero_data(self, small_grid):
        """Zero data stays zero and completes."""
        config = EvolutionConfig(dt=0.01, t_end=0.1, output_stride=3)
        record = evolve(Field.zeros(small_grid), ModelParams(1.0, 5), config)
        assert record.completed
        assert record.mass_drift == 0.0
        assert record.energy_drift == 0.0
        assert record.times[0] == 0.0
        assert record.times[-1] == pytest.approx(0.1)
        assert len(record.times) == 5

    def test_snapshots(self, gaussian):
        """store_snapshots keeps one field per output time."""
        config = EvolutionConfig(dt=1e-3, t_end=0.01, output_stride=5, store_snapshots=True)
        record = evolve(gaussian, ModelParams(1.5, 2), config)
        assert record.snapshots is not None
        assert len(record.snapshots) == len(record.times) == 3
        assert record.snapshots[-1] is record.final

    def test_kdv_soliton_travels(self, kdv_wave):
        """The KdV soliton moves as Q(x - t) with small phase error."""
        params, wave = kdv_wave
        assert traveling_wave_check(wave, params, 0.5, 1e-3) < 1e-6

    def test_kdv_conservation(self, kdv_wave):
        """Mass and energy drift stay tiny along the soliton."""
        params, wave = kdv_wave
        record = evolve(wave, params, EvolutionConfig(dt=1e-3, t_end=0.5, output_stride=50))
        assert record.completed
        assert record.mass_drift < 1e-9
        assert record.energy_drift < 1e-7

    def test_adaptive_matches_exact(self, kdv_wave):
        """Step-doubling control reproduces the traveling wave."""
        params, wave = kdv_wave
        config = EvolutionConfig(dt=0.01, t_end=0.2, adaptive=True, output_stride=5)
        record = evolve(wave, params, config)
        assert record.completed
        assert record.times[-1] == pytest.approx(0.2)
        assert linf_norm(record.final - translate(wave, 0.2)) < 1e-6

    def test_picard_integrator(self, gaussian):
        """Duhamel-Picard evolution agrees with IF-RK4."""
        params = ModelParams(1.5, 4)
        rk4 = evolve(gaussian, params, EvolutionConfig(dt=1e-3, t_end=0.02, output_stride=10))
        picard = evolve(gaussian, params, EvolutionConfig(dt=1e-3, t_end=0.02, output_stride=10, integrator="duhamel_picard"))
        assert picard.completed
        assert len(picard.times) == 3
        assert l2_norm(rk4.final - picard.final) < 1e-8

    def test_exploratory_flag(self, small_grid):
        """beta = 1 with k = 3 or 4 is flagged exploratory."""
        assert is_exploratory(ModelParams(1.0, 3))
        assert is_exploratory(ModelParams(1.0, 4))
        assert not is_exploratory(ModelParams(1.0, 5))
        record = evolve(Field.zeros(small_grid), ModelParams(1.0, 3), EvolutionConfig(dt=0.05, t_end=0.1))
        assert record.exploratory

    def test_oversized_step_does_not_complete(self):
        """A single huge step on strong data either breaks the invariants or overflows."""
        grid = make_grid(256, 50.0)
        u0 = Field.from_function(grid, lambda x: 3.0 * np.exp(-x ** 2))
        try:
            record = evolve(u0, ModelParams(1.0, 5), EvolutionConfig(dt=0.5, t_end=0.5))
        except InstabilityError:
            return
        assert not record.completed

    def test_step_longer_than_run_rejected(self):
        """dt larger than t_end is a configuration error."""
        with pytest.raises(ValueError):
            EvolutionConfig(dt=2.0, t_end=1.0)

    def test_default_time_step(self):
        """Default dt is 1e-3 sqrt(L / n)."""
        assert default_time_step(make_grid(400, 100.0)) == pytest.approx(5e-4)


class TestDuhamelPicard:
    """Tests for the Picard iteration of the integral equation."""

    def test_matches_rk4(self, gaussian):
        """Short-time Picard and IF-RK4 solutions agree."""
        params = ModelParams(1.5, 4)
        config = EvolutionConfig(dt=1e-3, t_end=0.01, output_stride=100)
        rk4 = evolve(gaussian, params, config).final
        picard = duhamel_picard_solve(gaussian, 0.01, params, config)
        assert l2_norm(rk4 - picard) < 1e-8

    def test_linear_case_is_exact(self, gaussian):
        """With no nonlinearity the first sweep reproduces U(T) u0."""
        params = ModelParams(1.5, 4)
        result = duhamel_picard_solve(gaussian, 0.3, params, nonlinear_coefficient=0.0)
        assert l2_norm(result - linear_group(gaussian, 0.3, params.beta)) < 1e-12

    def test_large_data_does_not_contract(self):
        """Long windows on large data raise NoContractionError."""
        grid = make_grid(256, 40.0)
        large = Field.from_function(grid, lambda x: 2.0 * np.exp(-x ** 2))
        with pytest.raises(NoContractionError) as exc_info:
            duhamel_picard_solve(large, 5.0, ModelParams(1.5, 4), EvolutionConfig(dt=1.25, t_end=5.0))
        assert exc_info.value.history

    def test_sweep_cap(self, gaussian):
        """A single allowed sweep cannot meet the tolerance."""
        config = EvolutionConfig(dt=1e-3, t_end=0.01, picard=PicardConfig(max_sweeps=1))
        with pytest.raises(NoContractionError):
            duhamel_picard_solve(gaussian, 0.01, ModelParams(1.5, 4), config)

    def test_nonpositive_time_rejected(self, gaussian):
        """T must be positive."""
        with pytest.raises(InvalidInputError):
            duhamel_picard_solve(gaussian, 0.0, ModelParams(1.5, 4))


class TestMonitor:
    """Tests for drift bookkeeping and the stop conditions."""

    def test_compute_drift(self):
        """Relative drift uses the first value; absolute below the floor."""
        pairs = [ConservedPair(2.0, 0.0, 1.0), ConservedPair(2.002, 1e-5, 1.0)]
        drift = compute_drift(pairs)
        assert drift.mass == pytest.approx(1e-3)
        assert drift.energy == pytest.approx(1e-5)
        assert compute_drift([]) == (0.0, 0.0)

    def test_integrity_breach(self, gaussian):
        """Mass change beyond the limit stops the run."""
        params = ModelParams(1.5, 2)
        monitor = _Monitor(gaussian, params, EvolutionConfig(dt=0.1, t_end=1.0))
        assert not monitor.record(0.1, 1.01 * np.array(gaussian.spectrum))
        assert monitor.finish(False).status == "integrity_breach"

    def test_suspected_blowup(self):
        """Concentration at fixed mass is flagged as suspected blowup."""
        grid = make_grid(4096, 100.0)
        params = ModelParams(2.0, 5)
        wide = Field.from_function(grid, lambda x: np.exp(-(x / 10.0) ** 2))
        narrow = Field.from_function(grid, lambda x: np.exp(-(x / 0.2) ** 2))
        narrow = (l2_norm(wide) / l2_norm(narrow)) * narrow
        monitor = _Monitor(wide, params, EvolutionConfig(dt=0.1, t_end=1.0))
        assert not monitor.record(0.1, np.array(narrow.spectrum))
        record = monitor.finish(False)
        assert record.status == "suspected_blowup"
        assert not record.completed


class TestConservation:
    """Tests for the conservation and convergence properties of IF-RK4."""

    def test_nyquist_mode_is_dropped(self, small_grid, rng):
        """The nonlinear term and the evolved state carry no Nyquist coefficient."""
        params = ModelParams(1.5, 2)
        spectrum = np.array(random_smooth_field(small_grid, rng, amplitude=0.5).spectrum)
        spectrum[small_grid.nyquist_index] = 0.3 * small_grid.n_points
        u0 = Field.from_spectrum(small_grid, spectrum)
        nyquist = small_grid.nyquist_index
        assert abs(rhs_nonlinear(u0, params).spectrum[nyquist]) < 1e-10
        record = evolve(u0, params, EvolutionConfig(dt=1e-3, t_end=0.05, output_stride=10))
        assert abs(record.final.spectrum[nyquist]) < 1e-10
        assert record.completed
        assert record.mass_drift < 1e-8

    def test_fourth_order_convergence(self):
        """Halving dt divides the error by 16 in the asymptotic range."""
        grid = make_grid(256, 60.0)
        u0 = Field.from_function(grid, lambda x: 1.5 * np.exp(-x ** 2 / 9.0))
        orders = convergence_orders(ModelParams(1.5, 2), u0, 0.4, (0.01, 0.005, 0.0025))
        assert len(orders) == 2
        for order in orders:
            assert order == pytest.approx(4.0, abs=0.2)

    @pytest.mark.slow
    def test_quintic_benjamin_ono_conservation(self, bo_quintic_state):
        """Half the beta = 1, k = 5 ground state keeps mass to 1e-10 and energy to 1e-8 up to t = 1."""
        params = bo_quintic_state.params
        config = EvolutionConfig(dt=5e-4, t_end=1.0, output_stride=100)
        record = evolve(0.5 * bo_quintic_state.profile, params, config)
        assert record.completed
        assert record.times[-1] == pytest.approx(1.0)
        assert record.mass_drift < 1e-10
        assert record.energy_drift < 1e-8
