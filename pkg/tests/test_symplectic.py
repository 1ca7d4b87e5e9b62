import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wignerfio.symplectic import SymplecticError, SymplecticMatrix, standard_J, symplectic_builder


def test_J_squares_to_minus_identity():
    J = symplectic_builder("J", n=1).matrix
    assert np.array_equal(J @ J, -np.eye(2))


def test_A_half_entries_and_layout():
    A = symplectic_builder("A_tau", tau=0.5, d=1).matrix
    expected = np.array([
        [0.5, 0.5, 0, 0],
        [0, 0, 0.5, -0.5],
        [0, 0, 1, 1],
        [-1, 1, 0, 0],
    ])
    assert np.array_equal(A, expected)
    assert set(np.unique(A)) <= {0.0, 1.0, -1.0, 0.5, -0.5}


def test_dilation_is_exactly_symplectic():
    D = symplectic_builder("D_L", L=2.0)
    J = standard_J(1)
    assert np.array_equal(D.matrix.T @ J @ D.matrix, J)


def test_singular_dilation_rejected():
    with pytest.raises(SymplecticError):
        symplectic_builder("D_L", L=[[1.0, 2.0], [2.0, 4.0]])


def test_asymmetric_chirp_rejected():
    with pytest.raises(SymplecticError):
        symplectic_builder("V_C", C=[[1.0, 2.0], [0.0, 1.0]])


def test_unknown_kind_rejected():
    with pytest.raises(SymplecticError):
        symplectic_builder("rotation")


def test_non_symplectic_matrix_fails_certification():
    with pytest.raises(SymplecticError):
        SymplecticMatrix(np.diag([2.0, 1.0]), "bad").certify()


def test_odd_size_rejected():
    with pytest.raises(SymplecticError):
        SymplecticMatrix(np.eye(3), "bad")


def test_product_kind_and_residual():
    P = symplectic_builder("V_C", C=0.5) @ symplectic_builder("D_L", L=3.0)
    assert P.kind == "product"
    P.certify()


sym2 = st.tuples(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3)).map(
    lambda t: np.array([[t[0], t[1]], [t[1], t[2]]]))


@given(sym2)
def test_chirp_symplectic(C):
    V = symplectic_builder("V_C", C=C)
    assert V.residual() <= 1e-12 and abs(V.det() - 1) <= 1e-10


@given(st.floats(-1.5, 2.5), st.integers(1, 3))
def test_tau_matrix_symplectic(tau, d):
    A = symplectic_builder("A_tau", tau=tau, d=d)
    assert A.matrix.shape == (4 * d, 4 * d)
    assert A.residual() <= 1e-12 and abs(A.det() - 1) <= 1e-10


@given(st.lists(st.floats(0.2, 4), min_size=2, max_size=2), st.floats(-2, 2))
def test_products_stay_symplectic(diag, c):
    L = np.array([[diag[0], c], [0.0, diag[1]]])
    A = symplectic_builder("D_L", L=L) @ symplectic_builder("J", n=2) @ symplectic_builder("V_C", C=np.eye(2) * c)
    assert A.residual() <= 1e-12
    assert abs(A.det() - 1) <= 1e-10
