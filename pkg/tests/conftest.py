"""
Test configuration for pytest.
"""

from pathlib import Path

import pytest

from obedience.acceptance import synthetic_samples
from obedience.backend import BUILTIN_SPECS, SyntheticBackend
from obedience.dataset import dump
from obedience.pipeline import Pipeline, RunConfig
from obedience.prob import CertaintySweep

FIXTURES = Path(__file__).parent / "fixtures"


def pytest_configure(config):
    """Configure pytest with custom markers."""
    config.addinivalue_line("markers", "slow: fuzzed property suites")
    config.addinivalue_line("markers", "integration: tests against the stub HTTP server")


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def sweep():
    """The default six-point certainty grid."""
    return CertaintySweep()


@pytest.fixture
def square_spec():
    return BUILTIN_SPECS["square"]


@pytest.fixture
def square_backend(square_spec):
    """Synthetic model with prior Paris 0.8 / Lyon 0.2 and g(c) = c**2."""
    return SyntheticBackend(square_spec, name="synthetic:square")


@pytest.fixture
def samples():
    """Ten samples whose context conveys Lyon."""
    return synthetic_samples(10)


@pytest.fixture
def pipeline(square_backend):
    return Pipeline(square_backend, RunConfig(unfiltered=True))


@pytest.fixture
def dataset_file(tmp_path, samples):
    path = tmp_path / "samples.jsonl"
    dump(samples, path)
    return path
