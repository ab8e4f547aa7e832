import numpy as np
import pytest

from mirrorchain.chain import build_uniform_pst
from mirrorchain.exceptions import ResourceLimitError
from mirrorchain.oracle import (MAX_SITES, annihilation, creation, dense_hamiltonian,
                                dense_jw_operator, dense_unitary, number_operator, pauli)


def test_jw_operators_anticommute():
    N = 4
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            a, b = annihilation(N, i), creation(N, j)
            acomm = a @ b + b @ a
            np.testing.assert_allclose(acomm, np.eye(1 << N) * (i == j), atol=1e-14)


def test_jw_product_order():
    # a_1^dag a_2 acting on |site 2> gives |site 1>
    op = dense_jw_operator(3, [("+", 1), ("-", 2)]).entries
    v = np.zeros(8)
    v[0b010] = 1
    out = op @ v
    assert out[0b001] == 1 and np.count_nonzero(out) == 1


def test_hamiltonian_conserves_excitations():
    spec = build_uniform_pst(5)
    H = dense_hamiltonian(spec).entries
    Z = number_operator(5)
    np.testing.assert_allclose(H @ Z - Z @ H, 0, atol=1e-12)
    np.testing.assert_allclose(H, H.conj().T)


def test_pauli_placement():
    Z1 = pauli(2, "Z", 1)
    np.testing.assert_allclose(np.diag(Z1), [1, -1, 1, -1])


def test_dense_unitary_is_unitary():
    U = dense_unitary(dense_hamiltonian(build_uniform_pst(4)), 0.7).entries
    np.testing.assert_allclose(U.conj().T @ U, np.eye(16), atol=1e-12)


def test_size_guard():
    with pytest.raises(ResourceLimitError):
        creation(MAX_SITES + 1, 1)
