import time

import numpy as np
import pytest

_SESSION_START = time.monotonic()


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.monotonic() - _SESSION_START
    print(f"\n[suite] wall time {elapsed:.1f}s (acceptance budget: 60s)")

from moperturb import (
    Connectivity,
    MotionSequence,
    SplitSequence,
    SynthConfig,
    generate,
    train_mlp,
)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def toy_connectivity():
    return Connectivity(((0, 1), (1, 2), (1, 3), (1, 4)))


def random_sequence(rng, t=6, j=5, fps=25.0):
    return MotionSequence(rng.normal(size=(t, j, 3)), fps)


def random_split(rng, t_h=6, t_f=4, j=5, fps=25.0):
    return SplitSequence(
        random_sequence(rng, t_h, j, fps), random_sequence(rng, t_f, j, fps)
    )


@pytest.fixture(scope="session")
def drift_train_dataset():
    return generate(SynthConfig(n_sequences=120, t_h=10, t_f=25, seed=100, family="drift"))


@pytest.fixture(scope="session")
def drift_test_dataset():
    return generate(SynthConfig(n_sequences=50, t_h=10, t_f=25, seed=200, family="drift"))


@pytest.fixture(scope="session")
def trained_predictor(drift_train_dataset):
    """The toy victim: an MLP fitted well enough to be input-sensitive."""
    result = train_mlp(
        drift_train_dataset.sequences, hidden=128, lr=0.1, epochs=1200, batch=16, seed=0
    )
    return result.predictor
