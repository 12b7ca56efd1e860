"""
Test the sweep driver and the verification registry.
"""
import pytest

from src.core.exceptions import ConfigError
from src.core.spectral import ModelParams
from src.harness.run_config import RunConfig
from src.harness.sweep import CSV_COLUMNS, SweepCell, boundary_is_monotone, evaluate_group, run_sweep
from src.harness.verify import CHECKS, VerifyContext, periodic_pohozaev_residual, run_checks


def cell(beta, k, amplitude, admissible, status="ok"):
    report = {"admissible": admissible} if status == "ok" else None
    return SweepCell(beta, k, amplitude, status, report=report)


@pytest.fixture(scope="module")
def small_sweep():
    config = RunConfig.model_validate({
        "grid": {"n_points": 1024, "length": 60.0},
        "sweep": {"betas": [2.0], "ks": [5, 1], "amplitudes": [1.5, 0.5]},
    })
    return run_sweep(config)


class TestSweep:
    """Tests for the (beta, k, amplitude) sweep."""

    def test_monotone_boundary(self):
        """Admissible cells must form a prefix in amplitude order."""
        cells = [
            cell(1.0, 5, 0.1, True),
            cell(1.0, 5, 0.5, False),
            cell(1.0, 5, 0.9, True),
            cell(1.5, 4, 0.1, True),
            cell(1.5, 4, 0.5, True),
            cell(1.5, 4, 0.9, False),
            cell(2.0, 3, 0.5, False, status="inapplicable"),
        ]
        result = boundary_is_monotone(cells)
        assert result == {(1.0, 5): False, (1.5, 4): True, (2.0, 3): True}

    def test_inapplicable_group_skips_solver(self):
        """k <= 2 beta tags every amplitude without computing a ground state."""
        cells = evaluate_group({"beta": 2.0, "k": 3, "amplitudes": [0.1, 0.2]})
        assert [c.status for c in cells] == ["inapplicable", "inapplicable"]
        assert all(c.report is None for c in cells)

    def test_row_layout(self):
        """Rows expose every CSV column."""
        row = cell(1.0, 5, 0.5, True).row()
        assert list(row) == CSV_COLUMNS
        assert row["admissible"] is True
        assert row["error"] is None

    def test_sorted_output(self, small_sweep):
        """Cells come back sorted by (beta, k, amplitude)."""
        keys = [c.key for c in small_sweep.cells]
        assert keys == sorted(keys)
        assert len(keys) == 4

    def test_classification(self, small_sweep):
        """Small multiples of Q are admissible, large ones are not."""
        by_key = {c.key: c for c in small_sweep.cells}
        assert by_key[(2.0, 1, 0.5)].status == "inapplicable"
        assert by_key[(2.0, 5, 0.5)].report["admissible"] is True
        assert by_key[(2.0, 5, 1.5)].report["admissible"] is False
        assert small_sweep.succeeded == 2
        assert small_sweep.monotone_boundary[(2.0, 5)]

    def test_payload(self, small_sweep):
        """to_dict lists cells and boundary flags."""
        payload = small_sweep.to_dict()
        assert len(payload["cells"]) == 4
        assert payload["monotone_boundary"][0]["k"] == 1


class TestVerifyRegistry:
    """Tests for the named verification checks."""

    def test_registered_checks(self):
        """Every check is registered by name."""
        assert set(CHECKS) == {
            "bo_soliton",
            "kdv_soliton",
            "sharp_constant",
            "identities",
            "linear_group",
            "conservation",
            "duhamel_picard",
            "threshold",
            "barrier",
        }

    def test_unknown_check(self):
        """Unknown names raise ConfigError before anything runs."""
        with pytest.raises(ConfigError):
            run_checks(["barrier", "nope"], VerifyContext())

    def test_fast_checks_pass(self):
        """Operator and barrier checks pass at default resolution."""
        results = run_checks(["linear_group", "barrier", "duhamel_picard"], VerifyContext(seed=3))
        assert [r.name for r in results] == ["linear_group", "barrier", "duhamel_picard"]
        for result in results:
            assert result.passed, result.message

    def test_reduced_resolution(self):
        """Reduced resolution halves n and L."""
        assert VerifyContext(resolution="reduced").scaled(4096, 200.0) == (2048, 100.0)
        assert VerifyContext().scaled(4096, 200.0) == (4096, 200.0)

    def test_ground_state_cache(self):
        """Ground states are computed once per context."""
        ctx = VerifyContext(resolution="reduced")
        params = ModelParams(2.0, 1)
        assert ctx.ground_state(params, 1024, 120.0) is ctx.ground_state(params, 1024, 120.0)

    def test_periodic_pohozaev_residual_vanishes_on_large_boxes(self):
        """The box value decreases with L."""
        assert periodic_pohozaev_residual(400.0) < periodic_pohozaev_residual(100.0)
        assert periodic_pohozaev_residual(400.0) < 1e-3

    @pytest.mark.slow
    def test_soliton_checks_reduced(self):
        """Closed-form checks pass at reduced resolution."""
        results = run_checks(["bo_soliton", "kdv_soliton"], VerifyContext(resolution="reduced"))
        for result in results:
            assert result.passed, result.message
