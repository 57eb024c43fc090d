"""
Pytest configuration for skewshadow tests.

Shared parameter sets, random instance factories and environment isolation.
"""

import logging
import math

import pytest

from skewshadow.model import normalize, validate
from skewshadow.utils.config import LOG_LEVEL_ENV, SEED_ENV, THREADS_ENV
from skewshadow.walk import derive_stream, sample_noise, sample_walk


def pytest_configure(config):
    """Register custom markers."""
    config.addinivalue_line("markers", "slow: desk-scale statistical runs")
    config.addinivalue_line("markers", "integration: end-to-end CLI runs")


@pytest.fixture(autouse=True)
def isolated_env(monkeypatch):
    """Keep the caller's SKEWSHADOW_* variables out of every test."""
    for name in (SEED_ENV, THREADS_ENV, LOG_LEVEL_ENV):
        # set first so teardown also removes values a .env file loads later
        monkeypatch.setenv(name, "")
        monkeypatch.delenv(name)


@pytest.fixture(autouse=True)
def reset_logging():
    """Drop handlers that setup_logging attached during a test."""
    yield
    logger = logging.getLogger("skewshadow")
    logger.handlers.clear()
    logger.propagate = True
    logger.setLevel(logging.NOTSET)


@pytest.fixture
def params():
    """(1/2, 3): the running example, c0 ~ 1.91."""
    return normalize(validate(0.5, 3.0))


@pytest.fixture
def golden_params():
    """(1/2, 4): 2**b is the golden ratio."""
    return normalize(validate(0.5, 4.0))


@pytest.fixture
def doubling_params():
    """Expanding symbol with a1 = ln 2."""
    return validate(0.6, 2.0)


@pytest.fixture
def golden_b():
    return math.log2((1 + math.sqrt(5)) / 2)


@pytest.fixture
def random_instance(params):
    """Factory: (walk, pseudo) of length n drawn from derive_stream(seed, index)."""

    def make(n, d=1.0, seed=20240611, index=0, model=None):
        stream = derive_stream(seed, index)
        walk = sample_walk(model or params, n, stream)
        return walk, sample_noise(walk, d, stream)

    return make
