import logging

import numpy as np

from hubbard.Basis import SectorBasis, apply_hop, directed_pairs, hop_table
from hubbard.errors import ContractError
from hubbard.params import ModelParams

logger = logging.getLogger(__name__)


def diagonal_energy(up_mask: int, down_mask: int, params: ModelParams) -> float:
    doublons = (up_mask & down_mask).bit_count()
    bond_sum = 0
    for i, j in params.bonds():
        n_i = ((up_mask >> i) & 1) + ((down_mask >> i) & 1)
        n_j = ((up_mask >> j) & 1) + ((down_mask >> j) & 1)
        bond_sum += n_i * n_j
    particles = up_mask.bit_count() + down_mask.bit_count()
    return params.U * doublons + params.V * bond_sum - params.mu * particles


class Hamiltonian:
    """
    Matrix-free extended Hubbard Hamiltonian on one (N_up, N_down) sector.

    Vectors are viewed as (len(up_states), len(down_states)) arrays so the
    kinetic term acts as T_up (x) 1 + 1 (x) T_down with sparse single-species
    hop tables, and the interaction is a precomputed diagonal.
    """

    def __init__(self, params: ModelParams, basis: SectorBasis):
        if params.L != basis.L:
            raise ContractError(f"params.L={params.L} does not match basis L={basis.L}")
        self.params = params
        self.basis = basis
        self.t_up = hop_table(basis.L, basis.n_up, params.boundary)
        self.t_down = hop_table(basis.L, basis.n_down, params.boundary)
        self.diagonal = self._build_diagonal()

    @property
    def dim(self) -> int:
        return self.basis.dim

    def _build_diagonal(self) -> np.ndarray:
        p, b = self.params, self.basis
        up, down = b.up_occupations, b.down_occupations

        bonds = np.zeros((b.L, b.L))
        for i, j in p.bonds():
            bonds[i, j] += 1.0
        up_up = np.einsum("ai,ij,aj->a", up, bonds, up)
        down_down = np.einsum("ai,ij,aj->a", down, bonds, down)
        cross = up @ (bonds + bonds.T) @ down.T
        bond_sum = up_up[:, None] + down_down[None, :] + cross

        particles = b.n_up + b.n_down
        return p.U * b.doublons + p.V * bond_sum - p.mu * particles

    def apply(self, v: np.ndarray) -> np.ndarray:
        if v.shape != (self.dim,):
            raise ContractError(f"vector of shape {v.shape} on a sector of dim {self.dim}")
        psi = v.reshape(self.basis.shape)
        out = self.diagonal * psi
        out -= self.t_up @ psi
        out -= (self.t_down @ psi.T).T
        return out.reshape(-1)

    __call__ = apply

    def to_dense(self) -> np.ndarray:
        """Entry-by-entry assembly, independent of the factorised matvec."""
        b, p = self.basis, self.params
        H = np.zeros((b.dim, b.dim))
        pairs = directed_pairs(b.L, p.boundary)
        for idx in range(b.dim):
            up, down = b.masks(idx)
            H[idx, idx] = diagonal_energy(up, down, p)
            for from_site, to_site in pairs:
                moved = apply_hop(up, from_site, to_site, b.L, p.boundary)
                if moved is not None:
                    H[b.index(moved[0], down), idx] -= moved[1]
                moved = apply_hop(down, from_site, to_site, b.L, p.boundary)
                if moved is not None:
                    H[b.index(up, moved[0]), idx] -= moved[1]
        return H


def apply_hamiltonian(params: ModelParams, basis: SectorBasis, v: np.ndarray) -> np.ndarray:
    return Hamiltonian(params, basis).apply(v)
