import numpy as np
import pytest

from hmfem import assemble_operators, build_grid, preset


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def grid9():
    return build_grid(np.pi, np.pi, 9)


@pytest.fixture(scope="session")
def grid5():
    return build_grid(np.pi, np.pi, 5)


@pytest.fixture(scope="session")
def ops9():
    spec = preset(2)
    return assemble_operators(build_grid(spec.Lx, spec.Ly, 9), spec.grad_p)
