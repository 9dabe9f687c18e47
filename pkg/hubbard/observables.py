import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from hubbard.Basis import SectorBasis, enumerate_sector
from hubbard.errors import ContractError, ConvergenceError, SectorError
from hubbard.Hamiltonian import Hamiltonian
from hubbard.lanczos import GroundStateResult, SolverOptions, lowest_eigenpairs
from hubbard.params import ModelParams

logger = logging.getLogger(__name__)

NORM_TOL = 1e-8
CLAMP = 1e-12
SECTOR_POLICY = "even N: N_up = N_down = N/2; odd N: N_up = (N+1)/2, N_down = (N-1)/2"


@dataclass(frozen=True)
class LocalRDM:
    """Diagonal of the single-site reduced density matrix: |0>, |up>, |down>, |up down>."""

    z: float
    u_plus: float
    u_minus: float
    w: float

    @property
    def populations(self) -> np.ndarray:
        return np.array([self.z, self.u_plus, self.u_minus, self.w])

    @classmethod
    def from_densities(cls, n_up: float, n_down: float, w: float) -> "LocalRDM":
        raw = {"z": 1.0 - n_up - n_down + w, "u_plus": n_up - w, "u_minus": n_down - w, "w": w}
        clamped = {}
        for name, value in raw.items():
            if value < -CLAMP or value > 1.0 + CLAMP:
                raise ContractError(f"population {name}={value:.3e} outside [0, 1]")
            clamped[name] = min(max(value, 0.0), 1.0)
        return cls(**clamped)


@dataclass(frozen=True)
class GapResult:
    delta_e: float
    e_minus: float
    e_zero: float
    e_plus: float
    n_particles: int


class EntanglementPoint(NamedTuple):
    ev: float
    rdm: LocalRDM
    ground: GroundStateResult


def sector_for(n_particles: int, L: int) -> tuple[int, int]:
    if not 0 <= n_particles <= 2 * L:
        raise SectorError(f"N={n_particles} outside [0, {2 * L}]")
    return (n_particles + 1) // 2, n_particles // 2


def local_rdm(state: np.ndarray, basis: SectorBasis) -> LocalRDM:
    """
    Site-averaged single-site populations of a state, or of a degenerate
    multiplet given as columns (each member weighted 1/m).
    """
    psi = np.asarray(state, dtype=np.float64)
    if psi.ndim == 1:
        psi = psi[:, None]
    if psi.shape[0] != basis.dim:
        raise ContractError(f"state of length {psi.shape[0]} on a sector of dim {basis.dim}")
    norms = np.linalg.norm(psi, axis=0)
    if np.any(np.abs(norms - 1.0) > NORM_TOL):
        raise ContractError(f"state is not normalised (norms {norms})")

    prob = np.mean(psi**2, axis=1).reshape(basis.shape)
    L = basis.L
    w = float(np.sum(prob * basis.doublons)) / L
    n_up = float(prob.sum(axis=1) @ basis.up_occupations.sum(axis=1)) / L
    n_down = float(prob.sum(axis=0) @ basis.down_occupations.sum(axis=1)) / L
    return LocalRDM.from_densities(n_up, n_down, w)


def _entropy_bits(p: np.ndarray) -> float:
    p = p[p > 0.0]
    value = float(-np.sum(p * np.log2(p)))
    return min(max(value, 0.0), 2.0)


def von_neumann_entropy(rdm: LocalRDM) -> float:
    return _entropy_bits(rdm.populations)


def entropy_from_double_occupancy(w: float) -> float:
    """Spin-singlet half filling: z = w and u+ = u- = 1/2 - w."""
    return _entropy_bits(np.array([w, w, 0.5 - w, 0.5 - w]))


'''
Ground states
'''


def ground_state(
    params: ModelParams, n_up: int, n_down: int, options: Optional[SolverOptions] = None
) -> tuple[SectorBasis, GroundStateResult]:
    options = options or SolverOptions()
    basis = enumerate_sector(params.L, n_up, n_down)
    H = Hamiltonian(params, basis)
    try:
        result = lowest_eigenpairs(
            basis.dim,
            H,
            k=min(options.k, basis.dim),
            tol=options.tol,
            max_iter=options.max_iter,
            seed=options.seed,
            method=options.method,
            krylov_dim=options.krylov_dim,
            dense_cutoff=options.dense_cutoff,
            extend_degenerate=options.extend_degenerate,
        )
    except ConvergenceError as exc:
        raise exc.at(f"U={params.U}, V={params.V}, mu={params.mu}, L={params.L}, sector=({n_up}, {n_down})")
    return basis, result


def ground_energy(params: ModelParams, n_particles: int, options: Optional[SolverOptions] = None) -> float:
    n_up, n_down = sector_for(n_particles, params.L)
    _, result = ground_state(params, n_up, n_down, options)
    return result.ground_energy


def entanglement_at(
    params: ModelParams, n_up: int, n_down: int, options: Optional[SolverOptions] = None
) -> EntanglementPoint:
    basis, result = ground_state(params, n_up, n_down, options)
    rdm = local_rdm(result.ground_vectors, basis)
    ev = von_neumann_entropy(rdm)
    if result.degenerate:
        logger.debug("averaged a %d-fold ground multiplet at U=%g V=%g", result.degeneracy, params.U, params.V)
    return EntanglementPoint(ev, rdm, result)


def charge_gap(params: ModelParams, n_particles: int, options: Optional[SolverOptions] = None) -> GapResult:
    """E0(N+1) + E0(N-1) - 2 E0(N), each from its own Sz-minimal sector."""
    if n_particles - 1 < 1 or n_particles + 1 > 2 * params.L:
        raise SectorError(f"charge gap needs 2 <= N <= {2 * params.L - 1}, got {n_particles}")
    e_minus = ground_energy(params, n_particles - 1, options)
    e_zero = ground_energy(params, n_particles, options)
    e_plus = ground_energy(params, n_particles + 1, options)
    return GapResult(
        delta_e=e_plus + e_minus - 2.0 * e_zero,
        e_minus=e_minus,
        e_zero=e_zero,
        e_plus=e_plus,
        n_particles=n_particles,
    )
