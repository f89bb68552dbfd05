import numpy as np
import pytest

from cvpool.dataset import SynthConfig, synthesize_dataset


@pytest.fixture(scope="session")
def paper_shape_dataset():
    """56 samples (31/25), 16 features, two informative ones."""
    return synthesize_dataset(
        SynthConfig(n_per_class=(31, 25), d=16, planted=((10, 1.2), (14, 1.0)), seed=7)
    )


@pytest.fixture(scope="session")
def small_dataset():
    """Cheap dataset for experiment-level tests: 22 samples, 6 features."""
    return synthesize_dataset(
        SynthConfig(n_per_class=(12, 10), d=6, planted=((2, 2.0),), seed=11)
    )


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
