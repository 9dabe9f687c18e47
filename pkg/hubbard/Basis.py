import logging
import os
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations
from math import comb
from typing import Optional

import numpy as np
import scipy.sparse as sps

from hubbard.errors import ContractError, SectorError
from hubbard.params import Boundary

logger = logging.getLogger(__name__)

DEFAULT_MAX_SITES = 16


def max_sites() -> int:
    return int(os.getenv("HUBENT_MAX_SITES", DEFAULT_MAX_SITES))


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """
    Fixed (N_up, N_down) configuration space of an L-site chain.

    Bit j of a mask is set when site j holds a fermion of that species.
    Creation operators are ordered all spin-up before all spin-down, sites
    ascending within a species, so a basis state factorises into an up mask
    and a down mask and the composite index is iu * len(down_states) + id.
    """

    L: int
    n_up: int
    n_down: int
    up_states: np.ndarray
    down_states: np.ndarray
    up_rank: dict[int, int]
    down_rank: dict[int, int]

    @property
    def dim(self) -> int:
        return len(self.up_states) * len(self.down_states)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.up_states), len(self.down_states))

    def index(self, up_mask: int, down_mask: int) -> int:
        return self.up_rank[up_mask] * len(self.down_states) + self.down_rank[down_mask]

    def masks(self, idx: int) -> tuple[int, int]:
        iu, id_ = divmod(idx, len(self.down_states))
        return int(self.up_states[iu]), int(self.down_states[id_])

    @cached_property
    def up_occupations(self) -> np.ndarray:
        return _occupation_matrix(self.up_states, self.L)

    @cached_property
    def down_occupations(self) -> np.ndarray:
        return _occupation_matrix(self.down_states, self.L)

    @cached_property
    def doublons(self) -> np.ndarray:
        """Number of doubly occupied sites for every (iu, id) pair."""
        return self.up_occupations @ self.down_occupations.T


def _occupation_matrix(states: np.ndarray, L: int) -> np.ndarray:
    sites = np.arange(L, dtype=np.int64)
    return ((states[:, None] >> sites[None, :]) & 1).astype(np.float64)


@lru_cache(maxsize=64)
def _species_states(L: int, n: int) -> tuple[int, ...]:
    masks = [sum(1 << j for j in sites) for sites in combinations(range(L), n)]
    return tuple(sorted(masks))


def enumerate_sector(
    L: int, n_up: int, n_down: int, cap: Optional[int] = None
) -> SectorBasis:
    cap = max_sites() if cap is None else cap
    if L < 2:
        raise SectorError(f"L must be at least 2, got {L}")
    if L > cap:
        raise SectorError(f"L={L} exceeds the lattice cap of {cap} sites")
    for name, count in (("n_up", n_up), ("n_down", n_down)):
        if not 0 <= count <= L:
            raise SectorError(f"{name}={count} outside [0, {L}]")

    up = np.array(_species_states(L, n_up), dtype=np.int64)
    down = np.array(_species_states(L, n_down), dtype=np.int64)
    assert len(up) == comb(L, n_up) and len(down) == comb(L, n_down)

    basis = SectorBasis(
        L=L,
        n_up=n_up,
        n_down=n_down,
        up_states=up,
        down_states=down,
        up_rank={int(m): k for k, m in enumerate(up)},
        down_rank={int(m): k for k, m in enumerate(down)},
    )
    logger.debug("sector L=%d (%d, %d): dim %d", L, n_up, n_down, basis.dim)
    return basis


'''
Hopping
'''


def is_adjacent(i: int, j: int, L: int, boundary: Boundary) -> bool:
    if abs(i - j) == 1:
        return True
    return boundary == Boundary.PERIODIC and L >= 3 and {i, j} == {0, L - 1}


def directed_pairs(L: int, boundary: Boundary) -> list[tuple[int, int]]:
    if boundary == Boundary.PERIODIC and L < 3:
        raise SectorError("periodic boundary needs L >= 3")
    pairs = []
    for j in range(L - 1):
        pairs += [(j, j + 1), (j + 1, j)]
    if boundary == Boundary.PERIODIC:
        pairs += [(L - 1, 0), (0, L - 1)]
    return pairs


def apply_hop(
    mask: int, from_site: int, to_site: int, L: int, boundary: Boundary
) -> Optional[tuple[int, int]]:
    """
    Apply c†_to c_from to a single-species occupation mask.

    Returns (new_mask, sign), or None when the move is Pauli blocked
    (from empty or to occupied).
    """
    if from_site == to_site or not (0 <= from_site < L and 0 <= to_site < L):
        raise ContractError(f"invalid hop {from_site}->{to_site} on L={L}")
    if not is_adjacent(from_site, to_site, L, boundary):
        raise ContractError(f"sites {from_site} and {to_site} are not adjacent")

    if not (mask >> from_site) & 1 or (mask >> to_site) & 1:
        return None

    lo, hi = sorted((from_site, to_site))
    # occupied sites strictly between lo and hi; for the wrap bond this is
    # every other particle of the species, i.e. n - 1
    between = mask & ((1 << hi) - 1) & ~((1 << (lo + 1)) - 1)
    sign = -1 if between.bit_count() & 1 else 1
    return mask ^ (1 << from_site) ^ (1 << to_site), sign


@lru_cache(maxsize=64)
def hop_table(L: int, n: int, boundary: Boundary) -> sps.csr_matrix:
    """Sparse matrix of sum over directed bonds of c†_to c_from for one species."""
    states = _species_states(L, n)
    rank = {m: k for k, m in enumerate(states)}
    rows, cols, vals = [], [], []
    for k, mask in enumerate(states):
        for from_site, to_site in directed_pairs(L, boundary):
            moved = apply_hop(mask, from_site, to_site, L, boundary)
            if moved is None:
                continue
            new_mask, sign = moved
            rows.append(rank[new_mask])
            cols.append(k)
            vals.append(float(sign))
    size = len(states)
    return sps.csr_matrix((vals, (rows, cols)), shape=(size, size))
