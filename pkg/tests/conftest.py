"""Shared pytest fixtures for trawlkit unit tests."""

from pathlib import Path
from typing import Callable

import pytest

from trawlkit.core.config import get_settings
from trawlkit.core.random import RandomStream
from trawlkit.models import ModelSpec
from trawlkit.services.moment_service import MomentService

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def model_factory() -> Callable[..., ModelSpec]:
    """Factory fixture building models from the CLI model strings."""

    def _factory(
        *,
        levy: str = "gaussian(0,1)",
        trawl: str = "exp(1)",
        p: str = "one",
        delta: float = 1.0,
        n: int = 1000,
    ) -> ModelSpec:
        return ModelSpec.from_strings(levy, trawl, p, delta, n)

    return _factory


@pytest.fixture
def gaussian_exp_model(model_factory) -> ModelSpec:
    return model_factory()


@pytest.fixture
def exp_sine_model(model_factory) -> ModelSpec:
    return model_factory(trawl="exp(0.5)", p="sine(3)", delta=0.5)


@pytest.fixture
def moment_service_factory() -> Callable[..., MomentService]:
    def _factory(model: ModelSpec, *, closed_form: bool = True) -> MomentService:
        return MomentService(model, closed_form=closed_form)

    return _factory


@pytest.fixture
def stream() -> RandomStream:
    """Deterministic stream for Monte Carlo checks."""

    return RandomStream(20240501)


@pytest.fixture
def sample_csv() -> Path:
    """30-row synthetic file with the SMARD schema (date,value)."""

    return FIXTURES / "smard_sample.csv"


@pytest.fixture
def smard_csv() -> Path:
    """The real SMARD download; tests using it are skipped when it is absent."""

    location = get_settings().smard_csv
    if not location or not Path(location).is_file():
        pytest.skip("TRAWLKIT_SMARD_CSV not set to an existing file")
    return Path(location)
