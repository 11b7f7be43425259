import numpy as np
import pytest

from kickedatom import build_basis, derive_params


@pytest.fixture(scope="session")
def basis_small():
    """n_i <= ~10 work at n_i = 5 scale: box of 400 a.u."""
    return build_basis(400.0, 700)


@pytest.fixture(scope="session")
def basis_tiny():
    """Cheapest basis that still meets the spectral contract (unit tests)."""
    return build_basis(120.0, 400)


@pytest.fixture(scope="session")
def params5():
    return derive_params(5, 1.45, 0.02)


@pytest.fixture(scope="session")
def rng():
    return np.random.Generator(np.random.Philox(key=20260825))
