from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hubbard.Basis import apply_hop, directed_pairs, enumerate_sector, hop_table, is_adjacent
from hubbard.errors import ContractError, SectorError
from hubbard.params import Boundary


@st.composite
def sectors(draw, max_L=8):
    L = draw(st.integers(min_value=2, max_value=max_L))
    return L, draw(st.integers(0, L)), draw(st.integers(0, L))


@settings(max_examples=40, deadline=None)
@given(sector=sectors())
def test_dimension_is_product_of_binomials(sector):
    L, n_up, n_down = sector
    basis = enumerate_sector(L, n_up, n_down)
    assert basis.dim == comb(L, n_up) * comb(L, n_down)
    assert basis.shape == (comb(L, n_up), comb(L, n_down))


@settings(max_examples=40, deadline=None)
@given(sector=sectors(max_L=6))
def test_states_are_sorted_and_carry_the_right_count(sector):
    L, n_up, n_down = sector
    basis = enumerate_sector(L, n_up, n_down)
    assert np.all(np.diff(basis.up_states) > 0)
    assert all(int(m).bit_count() == n_up for m in basis.up_states)
    assert all(int(m).bit_count() == n_down for m in basis.down_states)


def test_index_inverts_masks():
    basis = enumerate_sector(5, 2, 3)
    for idx in range(basis.dim):
        assert basis.index(*basis.masks(idx)) == idx


def test_doublon_counts_match_bit_overlap():
    basis = enumerate_sector(4, 2, 2)
    for idx in range(basis.dim):
        up, down = basis.masks(idx)
        iu, id_ = divmod(idx, basis.shape[1])
        assert basis.doublons[iu, id_] == (up & down).bit_count()


def test_l4_half_filling_has_36_states():
    assert enumerate_sector(4, 2, 2).dim == 36


@pytest.mark.parametrize(
    "L, n_up, n_down",
    [(1, 0, 0), (4, 5, 0), (4, 0, -1)],
)
def test_invalid_sectors(L, n_up, n_down):
    with pytest.raises(SectorError):
        enumerate_sector(L, n_up, n_down)


def test_lattice_cap_from_environment(monkeypatch):
    monkeypatch.setenv("HUBENT_MAX_SITES", "4")
    with pytest.raises(SectorError, match="cap"):
        enumerate_sector(5, 1, 1)
    assert enumerate_sector(4, 1, 1).dim == 16


def test_explicit_cap_wins():
    with pytest.raises(SectorError):
        enumerate_sector(6, 3, 3, cap=5)


'''
Hopping
'''


def test_wrap_hop_picks_up_the_string_sign():
    # particles on sites 1 and 3, move 3 -> 0 across the boundary
    assert apply_hop(0b1010, 3, 0, 4, Boundary.PERIODIC) == (0b0011, -1)


def test_wrap_hop_sign_follows_particle_count():
    # a lone particle crosses the boundary without a sign
    assert apply_hop(0b1000, 3, 0, 4, Boundary.PERIODIC) == (0b0001, 1)
    # with three particles the other two are passed over
    assert apply_hop(0b1110, 3, 0, 4, Boundary.PERIODIC) == (0b0111, 1)


def test_neighbour_hop_has_no_sign():
    assert apply_hop(0b0011, 1, 2, 4, Boundary.OPEN) == (0b0101, 1)


@pytest.mark.parametrize("mask, src, dst", [(0b0001, 1, 2), (0b0011, 0, 1)])
def test_blocked_hops_return_none(mask, src, dst):
    assert apply_hop(mask, src, dst, 4, Boundary.OPEN) is None


def test_non_adjacent_hops_are_contract_errors():
    with pytest.raises(ContractError):
        apply_hop(0b0001, 0, 2, 4, Boundary.OPEN)
    with pytest.raises(ContractError):
        apply_hop(0b1000, 3, 0, 4, Boundary.OPEN)
    with pytest.raises(ContractError):
        apply_hop(0b0001, 0, 0, 4, Boundary.PERIODIC)


def test_adjacency_and_bond_lists():
    assert is_adjacent(0, 3, 4, Boundary.PERIODIC)
    assert not is_adjacent(0, 3, 4, Boundary.OPEN)
    assert len(directed_pairs(4, Boundary.PERIODIC)) == 8
    assert len(directed_pairs(4, Boundary.OPEN)) == 6
    with pytest.raises(SectorError):
        directed_pairs(2, Boundary.PERIODIC)


@pytest.mark.parametrize("boundary", list(Boundary))
def test_hop_table_is_symmetric(boundary):
    for n in range(5):
        T = hop_table(5, n, boundary).toarray()
        assert np.array_equal(T, T.T)


@st.composite
def hops(draw):
    L = draw(st.integers(min_value=3, max_value=8))
    boundary = draw(st.sampled_from(list(Boundary)))
    src, dst = draw(st.sampled_from(directed_pairs(L, boundary)))
    mask = draw(st.integers(min_value=0, max_value=(1 << L) - 1))
    return L, boundary, src, dst, mask


@settings(max_examples=200, deadline=None)
@given(hop=hops())
def test_hopping_back_restores_mask_and_sign(hop):
    L, boundary, src, dst, mask = hop
    moved = apply_hop(mask, src, dst, L, boundary)
    if moved is None:
        return
    new_mask, sign = moved
    assert new_mask.bit_count() == mask.bit_count()
    assert apply_hop(new_mask, dst, src, L, boundary) == (mask, sign)
