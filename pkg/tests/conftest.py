"""
Pytest configuration and fixtures for DGBO tests.
"""
import numpy as np
import pytest

from src.config import reset_config
from src.core.ground_state import closed_form_oracle, petviashvili_solve
from src.core.spectral import ModelParams, make_grid


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running numerical test")


@pytest.fixture(autouse=True)
def fresh_config(monkeypatch):
    """Isolate every test from DGBO_* variables in the calling shell."""
    for name in ("DGBO_OUTPUT_DIR", "DGBO_THREADS", "DGBO_SEED", "DGBO_LOG_LEVEL", "DGBO_MAX_PADDED_POINTS"):
        monkeypatch.delenv(name, raising=False)
    reset_config()
    yield
    reset_config()


@pytest.fixture
def rng():
    """Deterministic random generator."""
    return np.random.default_rng(2024)


@pytest.fixture
def small_grid():
    """Coarse grid for operator tests."""
    return make_grid(128, 2.0 * np.pi * 8)


@pytest.fixture(scope="session")
def kdv_params():
    return ModelParams(2.0, 1)


@pytest.fixture(scope="session")
def kdv_state(kdv_params):
    """Ground state of the KdV case (beta=2, k=1) on a box where the sech^2 profile is exact."""
    return petviashvili_solve(kdv_params, make_grid(2048, 100.0))


@pytest.fixture(scope="session")
def kdv_oracle(kdv_params):
    return closed_form_oracle(kdv_params, make_grid(2048, 100.0))


@pytest.fixture(scope="session")
def bo_state():
    """Ground state of the Benjamin-Ono case (beta=1, k=1)."""
    return petviashvili_solve(ModelParams(1.0, 1), make_grid(4096, 200.0))


@pytest.fixture(scope="session")
def quintic_params():
    """beta=2, k=5: supercritical with an exponentially decaying ground state."""
    return ModelParams(2.0, 5)


@pytest.fixture(scope="session")
def quintic_state(quintic_params):
    return petviashvili_solve(quintic_params, make_grid(2048, 80.0))


@pytest.fixture(scope="session")
def bo_quintic_state():
    """beta=1, k=5 ground state; the narrow core needs 16384 nodes on L = 200."""
    return petviashvili_solve(ModelParams(1.0, 5), make_grid(16384, 200.0))


@pytest.fixture(scope="session")
def fractional_quartic_state():
    """beta=1.5, k=4 ground state with algebraic tails."""
    return petviashvili_solve(ModelParams(1.5, 4), make_grid(4096, 200.0))
