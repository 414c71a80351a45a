import numpy as np
import pytest

from lattice import Lattice, ShiftKind


@pytest.fixture
def z2():
    return Lattice(np.eye(2))


@pytest.fixture
def half_shifted_z2():
    return Lattice(np.eye(2), shift=(0.5, 0.5), shift_kind=ShiftKind.AFFINE)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
