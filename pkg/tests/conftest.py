import numpy as np
import pytest

from eigenring import Combine, EnsembleSpec, FactorKind, FactorSpec, SeedPolicy


@pytest.fixture
def policy():
    return SeedPolicy(20260808)


@pytest.fixture
def ginibre_spec():
    def make(dim):
        return EnsembleSpec(Combine.PRODUCT, (FactorSpec(FactorKind.GINIBRE),), dim)

    return make


def eigenvalue_radii(values):
    return np.abs(np.asarray(values))
