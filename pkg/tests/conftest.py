import numpy as np
import pytest

from rsdenoise import synthgen as sg
from rsdenoise.core import HyperMap


@pytest.fixture(scope="session")
def small_library():
    return sg.gen_phase_library(4, 5, seed=7, axis=sg.default_axis(128))


@pytest.fixture(scope="session")
def small_clean_map(small_library):
    clean, labels = sg.gen_phase_map(small_library, (4, 5), blob_count=5,
                                     seed=3)
    return clean, labels


@pytest.fixture(scope="session")
def small_noisy_set(small_clean_map):
    clean, _ = small_clean_map
    model = sg.NoiseModel(read_sigma=0.5, seed=11)
    return sg.synthesize_acquisitions(clean, model, repetitions=8,
                                      integration_time_ms=5.0)


@pytest.fixture(scope="session")
def small_reference(small_clean_map):
    clean, _ = small_clean_map
    return HyperMap(clean.grid_shape, clean.shift_axis, clean.data * 5.0)


def rng(*tags):
    return np.random.default_rng(np.random.SeedSequence(list(tags)))
