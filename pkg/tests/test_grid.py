import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hmfem import (
    InvalidDomainError,
    InvalidPartitionError,
    build_grid,
    dof_of_node,
)


def test_counts_2x2_cells():
    g = build_grid(1.0, 1.0, 3)
    assert g.N == 4
    assert len(g.elements) == 8
    assert g.h == 0.5


def test_counts_reference_scale():
    g = build_grid(1.0, 1.0, 17)
    assert g.N == 256
    assert len(g.elements) == 512


def test_spacing_and_six_element_support():
    g = build_grid(np.pi, np.pi, 33)
    assert g.h == pytest.approx(np.pi / 32)
    counts = np.zeros(g.N, dtype=int)
    for el in g.elements:
        for d in el.dofs:
            counts[d] += 1
    assert (counts == 6).all()


@pytest.mark.parametrize("n", [0, 1, 2])
def test_invalid_partition(n):
    with pytest.raises(InvalidPartitionError):
        build_grid(1.0, 1.0, n)


@pytest.mark.parametrize("Lx,Ly", [(0.0, 1.0), (1.0, -2.0)])
def test_invalid_domain(Lx, Ly):
    with pytest.raises(InvalidDomainError):
        build_grid(Lx, Ly, 5)


def test_dof_numbering():
    g3 = build_grid(1.0, 1.0, 3)
    assert dof_of_node(g3, 0, 0) == 0
    assert dof_of_node(g3, 2, 0) == 0  # wraps
    g17 = build_grid(1.0, 1.0, 17)
    assert dof_of_node(g17, 5, 3) == 3 * 16 + 5


def test_dof_out_of_range():
    g = build_grid(1.0, 1.0, 5)
    with pytest.raises(IndexError):
        dof_of_node(g, 5, 0)
    with pytest.raises(IndexError):
        dof_of_node(g, 0, -1)


@given(i=st.integers(0, 16), j=st.integers(0, 16))
def test_dof_periodic_identification(i, j):
    g = build_grid(1.0, 1.0, 17)
    assert dof_of_node(g, i, j) == dof_of_node(g, i % 16, j % 16)


def test_areas_and_vertex_bounds():
    g = build_grid(2.0, 2.0, 9)
    areas = np.array([el.area for el in g.elements])
    assert np.allclose(areas, g.h**2 / 2)
    assert areas.sum() == pytest.approx(g.Lx * g.Ly)
    for el in g.elements:
        assert (el.coords >= 0).all()
        assert (el.coords[:, 0] <= g.Lx).all()
        assert (el.coords[:, 1] <= g.Ly).all()


def test_basis_gradients_sum_to_zero():
    g = build_grid(np.pi, np.pi, 7)
    for el in g.elements:
        assert np.allclose(el.grads.sum(axis=0), 0.0, atol=1e-14)


def test_partition_of_unity():
    # phi_a(x) = 1 + grad_a . (x - v_a); the three local functions sum to 1
    # at the centroid and at every vertex.
    g = build_grid(1.5, 1.5, 5)
    for el in g.elements:
        pts = np.vstack([el.coords.mean(axis=0), el.coords])
        for p in pts:
            vals = [1.0 + el.grads[a] @ (p - el.coords[a]) for a in range(3)]
            assert sum(vals) == pytest.approx(1.0, abs=1e-12)
