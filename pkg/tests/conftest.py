import warnings

import numpy as np
import pytest

from macrolab import (
    CellResolution,
    HilbertSpace,
    LocalOperator,
    PAULI_X,
    PAULI_Z,
    build_intensive,
    decompose,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20240251)


@pytest.fixture
def chain4():
    return HilbertSpace(4)


@pytest.fixture
def mz_template():
    return LocalOperator((0,), PAULI_Z)


@pytest.fixture
def mx_template():
    return LocalOperator((0,), PAULI_X)


@pytest.fixture
def small_decomp():
    """Average magnetization on five sites: six single-value cells."""
    space = HilbertSpace(5)
    mz = build_intensive(LocalOperator((0,), PAULI_Z), space)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return decompose([mz], [CellResolution(0.35)])


def random_state(space: HilbertSpace, rng: np.random.Generator) -> np.ndarray:
    psi = rng.normal(size=space.dimension) + 1j * rng.normal(size=space.dimension)
    return psi / np.linalg.norm(psi)
