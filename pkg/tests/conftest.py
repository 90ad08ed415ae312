import numpy as np
import pytest

from src.custom.metrics import EnergyRecord
from src.spectral.core import GridSpec


@pytest.fixture
def grid16():
    return GridSpec.square(16)


@pytest.fixture
def grid32():
    return GridSpec.square(32)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_records(energies, modified=None):
    '''
    Minimal records carrying the given energies at steps 0, 1, 2, ...
    '''
    records = []
    for i, e in enumerate(energies):
        records.append(EnergyRecord(step=i, time=0.1 * i, energy=e,
                                    modified_energy=None if modified is None else modified[i],
                                    mass=0.0, l2_norm=1.0, h2_seminorm=1.0))
    return records
