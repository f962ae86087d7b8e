import numpy as np
import pytest

from lemsim.core import MarketParams, validate_config


@pytest.fixture(scope="session")
def params() -> MarketParams:
    """Default tariff set used throughout the tests."""
    return MarketParams().validate()


@pytest.fixture(scope="session")
def default_config():
    return validate_config({})


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
