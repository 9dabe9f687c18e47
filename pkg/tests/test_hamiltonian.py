from functools import reduce

import numpy as np
import pytest

from hubbard.Basis import enumerate_sector
from hubbard.errors import ContractError
from hubbard.Hamiltonian import Hamiltonian, apply_hamiltonian, diagonal_energy
from hubbard.params import Boundary, ModelParams

ANNIHILATE = np.array([[0.0, 1.0], [0.0, 0.0]])
STRING = np.diag([1.0, -1.0])
EYE = np.eye(2)


def jordan_wigner(modes: int) -> list[np.ndarray]:
    """Annihilators on the full 2^modes Fock space, mode 0 leftmost in the product."""
    ops = []
    for k in range(modes):
        factors = [STRING] * k + [ANNIHILATE] + [EYE] * (modes - k - 1)
        ops.append(reduce(np.kron, factors))
    return ops


def fock_hamiltonian(p: ModelParams) -> np.ndarray:
    L = p.L
    c = jordan_wigner(2 * L)
    up, down = c[:L], c[L:]
    n_up = [a.T @ a for a in up]
    n_down = [a.T @ a for a in down]
    n = [n_up[j] + n_down[j] for j in range(L)]

    H = np.zeros_like(n[0])
    for i, j in p.bonds():
        for species in (up, down):
            hop = species[i].T @ species[j]
            H -= hop + hop.T
        H += p.V * n[i] @ n[j]
    for j in range(L):
        H += p.U * n_up[j] @ n_down[j] - p.mu * n[j]
    return H


def project(H: np.ndarray, basis, L: int) -> np.ndarray:
    modes = 2 * L
    rows = []
    for idx in range(basis.dim):
        up, down = basis.masks(idx)
        occupation = up | (down << L)
        rows.append(sum(((occupation >> k) & 1) << (modes - 1 - k) for k in range(modes)))
    return H[np.ix_(rows, rows)]


@pytest.mark.parametrize(
    "L, boundary, sector",
    [
        (3, Boundary.PERIODIC, (2, 1)),
        (4, Boundary.PERIODIC, (2, 2)),
        (4, Boundary.PERIODIC, (3, 1)),
        (4, Boundary.OPEN, (2, 2)),
        (4, Boundary.PERIODIC, (1, 0)),
    ],
)
def test_matches_jordan_wigner_operators(L, boundary, sector):
    p = ModelParams(U=2.5, V=-0.75, mu=0.3, L=L, boundary=boundary)
    basis = enumerate_sector(L, *sector)
    expected = project(fock_hamiltonian(p), basis, L)
    H = Hamiltonian(p, basis)
    np.testing.assert_allclose(H.to_dense(), expected, atol=1e-12)


def test_matvec_agrees_with_dense_assembly():
    p = ModelParams(U=3.0, V=1.2, mu=-0.4, L=6)
    basis = enumerate_sector(6, 3, 2)
    H = Hamiltonian(p, basis)
    dense = H.to_dense()
    v = np.random.default_rng(7).standard_normal(basis.dim)
    np.testing.assert_allclose(H(v), dense @ v, atol=1e-12)
    np.testing.assert_allclose(apply_hamiltonian(p, basis, v), dense @ v, atol=1e-12)


@pytest.mark.parametrize("boundary", list(Boundary))
def test_dense_form_is_symmetric(boundary):
    p = ModelParams(U=-1.5, V=0.5, L=5, boundary=boundary)
    dense = Hamiltonian(p, enumerate_sector(5, 2, 3)).to_dense()
    np.testing.assert_array_equal(dense, dense.T)


def test_open_dimer_ground_energy():
    U = 4.0
    p = ModelParams(U=U, L=2, boundary=Boundary.OPEN)
    dense = Hamiltonian(p, enumerate_sector(2, 1, 1)).to_dense()
    assert np.linalg.eigvalsh(dense)[0] == pytest.approx((U - np.sqrt(U**2 + 16.0)) / 2.0, abs=1e-12)


def test_diagonal_energy_by_hand():
    p = ModelParams(U=2.0, V=1.0, mu=0.5, L=4)
    # up on sites 0 and 1, down on site 0: one doublon, densities (2, 1, 0, 0)
    assert diagonal_energy(0b0011, 0b0001, p) == pytest.approx(2.0 + 2.0 - 1.5)


def test_wrong_shapes_are_rejected():
    p = ModelParams(U=1.0, L=4)
    H = Hamiltonian(p, enumerate_sector(4, 2, 2))
    with pytest.raises(ContractError):
        H(np.zeros(H.dim + 1))
    with pytest.raises(ContractError):
        Hamiltonian(ModelParams(U=1.0, L=5), enumerate_sector(4, 2, 2))


@pytest.mark.parametrize("boundary", list(Boundary))
def test_matvec_is_hermitian(boundary):
    p = ModelParams(U=2.0, V=-0.7, mu=0.2, L=6, boundary=boundary)
    H = Hamiltonian(p, enumerate_sector(6, 3, 3))
    rng = np.random.default_rng(17)
    for _ in range(20):
        x, y = rng.standard_normal((2, H.dim))
        assert x @ H(y) == pytest.approx(H(x) @ y, abs=1e-10)
