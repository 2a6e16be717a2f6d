"""Pytest fixtures and configuration for testing."""

import os
from collections.abc import Callable, Generator
from unittest.mock import patch

import pytest

from periodscope.config import Settings, get_settings
from periodscope.services.liesys import LienardSystem, build_system
from periodscope.services.repro import km_system, sect3_family

# =============================================================================
# Environment Setup
# =============================================================================


@pytest.fixture(scope="session", autouse=True)
def set_test_env() -> Generator[None, None, None]:
    """Set environment variables for testing."""
    original_env = os.environ.copy()

    os.environ["PERIODSCOPE_ENVIRONMENT"] = "test"
    os.environ["PERIODSCOPE_DEBUG"] = "false"
    get_settings.cache_clear()

    yield

    os.environ.clear()
    os.environ.update(original_env)
    get_settings.cache_clear()


# =============================================================================
# Settings Fixtures
# =============================================================================


@pytest.fixture
def test_settings() -> Settings:
    """Create test settings."""
    return Settings(environment="test", debug=False)


@pytest.fixture
def mock_settings(test_settings: Settings) -> Generator[Settings, None, None]:
    """Mock get_settings in the logging module to return test settings."""
    with patch("periodscope.core.logging.get_settings", return_value=test_settings):
        yield test_settings


# =============================================================================
# System Fixtures
# =============================================================================
# Systems are immutable apart from their synchronised caches, so they are
# shared across the session.


@pytest.fixture(scope="session")
def harmonic() -> LienardSystem:
    """ẍ + x = 0: μ ≡ 1, V = x²/2, T ≡ 2π."""
    return build_system("0", "x")


@pytest.fixture(scope="session")
def km() -> Callable[[float], LienardSystem]:
    """Factory for the rational-mass family, cached per a₃."""
    cache: dict[float, LienardSystem] = {}

    def make(a3: float) -> LienardSystem:
        if a3 not in cache:
            cache[a3] = km_system(a3)
        return cache[a3]

    return make


@pytest.fixture(scope="session")
def sect3() -> LienardSystem:
    """Even-f family with f = 1 + x²: μ = 1/f², V = arctan²(x)/2, T ≡ 2π."""
    return sect3_family("1+x^2")


@pytest.fixture(scope="session")
def duffing_hard() -> LienardSystem:
    """ẍ + x + x³ = 0 (conservative, decreasing period)."""
    return build_system("0", "x + x^3")


@pytest.fixture(scope="session")
def duffing_soft() -> LienardSystem:
    """ẍ + x − x³ = 0 on [−2, 2], energy ceiling 1/4."""
    return build_system("0", "x - x^3", (-2.0, 2.0))
