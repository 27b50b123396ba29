import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("default")

from graphsal.gnn import TrainConfig, init_params, train  # noqa: E402
from graphsal.molgraph import (  # noqa: E402
    AtomVocabulary,
    GeneratorConfig,
    generate_synthetic_dataset,
)


@pytest.fixture(scope="session")
def small_dataset():
    return generate_synthetic_dataset(GeneratorConfig(count=120, seed=3, min_atoms=6, max_atoms=14))


@pytest.fixture(scope="session")
def vocab(small_dataset):
    return AtomVocabulary.build([g for g, _ in small_dataset])


@pytest.fixture(scope="session")
def random_models(vocab):
    """Untrained small models of each kind, keyed by kind."""
    return {
        kind: init_params(kind, vocab, hidden=8, rounds=2, fingerprint=8, dropout=0.3,
                          task="binary", seed=5)
        for kind in ("nfp", "ggnn", "linear")
    }


@pytest.fixture(scope="session")
def trained_ggnn(small_dataset):
    params, log = train(small_dataset, TrainConfig(model="ggnn", epochs=3, hidden=8, rounds=2, seed=2))
    return params


def rng_for(*key):
    return np.random.default_rng(list(key))
