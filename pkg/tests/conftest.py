# tests/conftest.py
import pytest
import sys
import os
from typing import Generator, Any

# Add the project root to the sys.path to allow importing squeeze modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../')))

from squeeze.cache import invalidate_propagator_cache
from squeeze.config import settings
from squeeze.schemas import SqueezeParam, ThermalField


# --- Propagator Cache Isolation ---

@pytest.fixture(autouse=True)
def clean_propagator_cache() -> Generator[None, Any, None]:
    """
    Fixture that empties the in-process propagator cache around every test,
    so cache hits in one test never depend on another test's order.
    """
    invalidate_propagator_cache()
    yield
    invalidate_propagator_cache()


@pytest.fixture(autouse=True)
def in_process_pool(monkeypatch) -> None:
    """
    Run validation work in-process; mocks and monkeypatches do not reach
    joblib worker processes.
    """
    monkeypatch.setattr(settings, "validate_workers", 1)


# --- Parameter Fixtures ---

@pytest.fixture
def vacuum_param() -> SqueezeParam:
    """r = 0: S is the identity."""
    return SqueezeParam(r=0.0)


@pytest.fixture
def figure_param() -> SqueezeParam:
    """Squeezing used by the single- and few-photon figures."""
    return SqueezeParam(r=1.5)


@pytest.fixture
def moderate_param() -> SqueezeParam:
    """A squeezing with nonzero phase, small enough for every ordering identity."""
    return SqueezeParam(r=0.8, phi=1.1)


@pytest.fixture
def warm_field() -> ThermalField:
    return ThermalField(nbar=1.0)


# --- Mock Validation Fixture ---

@pytest.fixture(scope="function")
def mock_run_validation(mocker):
    """
    Fixture to mock the validation runner used by the CLI.
    Returns a mock whose return_value the test sets to a list of CheckResults.
    """
    mock_run = mocker.patch('squeeze.main.tasks.run_validation')
    mock_run.return_value = []
    yield mock_run
