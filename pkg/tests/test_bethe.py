import logging
import math

import numpy as np
import pytest

from hubbard import bethe
from hubbard.errors import ContractError, QuadratureError
from hubbard.observables import entanglement_at
from hubbard.params import ModelParams

LN2 = math.log(2.0)


def bessel_by_trapezoid(n, x, points=1024):
    """J_n(x) = (1/2pi) int_0^2pi cos(n t - x sin t) dt; the trapezoid rule is spectral here."""
    t = np.linspace(0.0, 2.0 * np.pi, points, endpoint=False)
    return np.mean(np.cos(n * t[None, :] - np.asarray(x)[:, None] * np.sin(t[None, :])), axis=1)


def test_bessel_kernel_against_integral_representation():
    omega = np.linspace(0.0, 200.0, 101)
    expected = bessel_by_trapezoid(0, omega) * bessel_by_trapezoid(1, omega)
    np.testing.assert_allclose(bethe.bessel_kernel(omega), expected, atol=1e-12, rtol=0)


def test_free_values():
    assert bethe.gs_energy_per_site(0.0) == pytest.approx(-4.0 / math.pi, abs=1e-15)
    assert bethe.double_occupancy(0.0) == 0.25
    assert bethe.ev_half_filling(0.0) == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("U", [1e-6, -1e-6])
def test_leading_weak_coupling_behaviour(U):
    z3 = 1.2020569031595942
    assert bethe.double_occupancy(U) == pytest.approx(0.25 - 7 * z3 * U / (8 * math.pi**3), abs=1e-15)
    assert bethe.gs_energy_per_site(U) == pytest.approx(-4.0 / math.pi + U / 4.0, abs=1e-14)


@pytest.mark.parametrize("U", [1e-4, 3e-4, -1e-3, 0.002])
def test_tiny_u_is_finite(U):
    w = bethe.double_occupancy(U)
    assert w == pytest.approx(bethe.series_weak_w(U).value, abs=1e-14)
    assert bethe.ev_half_filling(U) == pytest.approx(2.0, abs=1e-4)


def test_weak_coefficients():
    z3, z5, z7 = 1.2020569031595942, 1.0369277551433699, 1.0083492773819228
    assert bethe.weak_coefficient(1) == pytest.approx(-7 * z3 / (8 * math.pi**3), rel=1e-13)
    assert bethe.weak_coefficient(3) == pytest.approx(-93 * z5 / (2**9 * math.pi**5), rel=1e-13)
    assert bethe.weak_coefficient(5) == pytest.approx(-51435 * z7 / (2**18 * math.pi**7), rel=1e-13)
    with pytest.raises(ContractError):
        bethe.weak_coefficient(2)


@pytest.mark.parametrize("U", [0.06, 0.1])
def test_quadrature_meets_the_series_past_the_cutoff(U):
    assert U > bethe.SERIES_CUTOFF
    orders = range(1, 2 * bethe.WEAK_TERMS, 2)
    w = 0.25 + sum(bethe.weak_coefficient(n) * U**n for n in orders)
    e = -4.0 / math.pi + U / 4.0 + sum(bethe.weak_coefficient(n) * U ** (n + 1) / (n + 1) for n in orders)
    assert bethe.double_occupancy(U) == pytest.approx(w, abs=2e-11)
    assert bethe.gs_energy_per_site(U) == pytest.approx(e, abs=5e-11)


def test_energy_rises_towards_zero():
    energies = [bethe.gs_energy_per_site(U) for U in (0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0)]
    assert all(a < b for a, b in zip(energies, energies[1:]))
    assert energies[-1] < 0.0


def test_strong_coupling_energy():
    assert bethe.gs_energy_per_site(100.0) == pytest.approx(-4.0 * LN2 / 100.0, rel=0.02)


@pytest.mark.parametrize("U", [0.5, 2.0, 8.0, 32.0])
def test_double_occupancy_is_the_energy_slope(U):
    h = 1e-3
    slope = (bethe.gs_energy_per_site(U + h) - bethe.gs_energy_per_site(U - h)) / (2.0 * h)
    assert bethe.double_occupancy(U) == pytest.approx(slope, abs=1e-6)


@pytest.mark.parametrize("U", [0.7, 3.0, 16.0])
def test_negative_u_mirrors(U):
    assert bethe.double_occupancy(-U) + bethe.double_occupancy(U) == pytest.approx(0.5, abs=1e-15)
    assert bethe.ev_half_filling(-U) == pytest.approx(bethe.ev_half_filling(U), abs=1e-12)
    assert bethe.gs_energy_per_site(-U) == pytest.approx(bethe.gs_energy_per_site(U) - U / 2.0, abs=1e-12)


def test_double_occupancy_decreases():
    ws = [bethe.double_occupancy(U) for U in (-8.0, -2.0, 0.0, 1.0, 4.0, 16.0)]
    assert all(a > b for a, b in zip(ws, ws[1:]))
    assert all(0.0 <= w <= 0.5 for w in ws)


def test_strong_coupling_saturates_at_one_bit():
    assert bethe.ev_half_filling(1e3) == pytest.approx(1.0, abs=1e-2)
    assert bethe.ev_half_filling(-1e3) == pytest.approx(1.0, abs=1e-2)


@pytest.mark.slow
def test_agrees_with_l10_exact_diagonalisation_at_u4():
    ed = entanglement_at(ModelParams(U=4.0, L=10), 5, 5).ev
    assert bethe.ev_half_filling(4.0) == pytest.approx(ed, abs=0.02)


def test_unreachable_tolerance_raises():
    with pytest.raises(QuadratureError) as info:
        bethe.double_occupancy(0.5, bethe.QuadratureSpec(omega_max=5.0))
    assert info.value.error_estimate > 0


'''
Series
'''


def test_strong_series_matches_integral():
    assert abs(bethe.double_occupancy(16.0) - bethe.series_strong_w(16.0).value) <= 1e-5
    assert abs(bethe.double_occupancy(24.0) - bethe.series_strong_w(24.0).value) <= 1e-6


@pytest.mark.parametrize("U", [12.0, 16.0, 24.0])
def test_strong_series_error_is_the_omitted_term(U):
    series = bethe.series_strong_w(U)
    assert series.valid
    assert abs(bethe.double_occupancy(U) - series.value) <= 2.0 * series.omitted


@pytest.mark.parametrize("U", [-0.3, 0.1, 0.2, 0.3])
def test_weak_series_error_is_below_twice_the_omitted_term(U):
    series = bethe.series_weak_w(U)
    assert abs(bethe.double_occupancy(U) - series.value) <= 2.0 * series.omitted


def test_series_values_by_hand():
    z3, z5 = 1.2020569031595942, 1.0369277551433699
    assert bethe.series_weak_w(0.0).value == 0.25
    assert bethe.series_strong_w(16.0).value == pytest.approx(
        4 * LN2 / 256 - 27 * z3 / 16**4 + 375 * z5 / 16**6, rel=1e-14
    )
    assert bethe.series_strong_w(16.0).value == pytest.approx(1.03584e-2, abs=1e-6)
    d = 7 * z3 * 0.2 / (8 * math.pi**3)
    assert bethe.series_weak_ev(0.2).value == pytest.approx(2 - 8 * d**2 / LN2, rel=1e-14)


@pytest.mark.parametrize("U", [0.1, 0.2])
def test_weak_series_entanglement(U):
    assert abs(bethe.ev_half_filling(U) - bethe.series_weak_ev(U).value) <= 1e-4


@pytest.mark.parametrize("U", [200.0, 1000.0])
def test_strong_series_entanglement(U):
    series = bethe.series_strong_ev(U)
    excess = bethe.ev_half_filling(U) - 1.0
    assert excess / (16.0 * math.log(U) / U**2) == pytest.approx(1.0, abs=0.1)
    assert abs(bethe.ev_half_filling(U) - series.value) <= 1.5 * series.omitted


def test_out_of_window_series_warn(caplog):
    with caplog.at_level(logging.WARNING, logger="hubbard.bethe"):
        strong = bethe.series_strong_w(2.0)
        weak = bethe.series_weak_ev(3.0)
    assert not strong.valid and not weak.valid
    assert "outside" in strong.warning
    assert len(caplog.records) == 2


'''
Infinite U
'''


def test_infinite_u_closed_form():
    assert bethe.ev_infinite_u(0.0) == 0.0
    assert bethe.ev_infinite_u(1.0) == pytest.approx(1.0, abs=1e-14)
    assert bethe.ev_infinite_u(2.0 / 3.0) == pytest.approx(math.log2(3.0), abs=1e-14)


def test_infinite_u_maximum_sits_at_two_thirds():
    n = np.linspace(0.0, 1.0, 3001)
    values = [bethe.ev_infinite_u(x) for x in n]
    assert n[int(np.argmax(values))] == pytest.approx(2.0 / 3.0, abs=1e-3)


def test_infinite_u_mirror_and_range():
    assert bethe.ev_infinite_u(1.25) == pytest.approx(bethe.ev_infinite_u(0.75), abs=1e-14)
    with pytest.raises(ContractError):
        bethe.ev_infinite_u(2.5)


def test_strong_series_mirror_to_negative_u():
    assert bethe.series_strong_w(-16.0).value == pytest.approx(0.5 - bethe.series_strong_w(16.0).value, abs=1e-15)
    assert bethe.series_strong_ev(-200.0) == bethe.series_strong_ev(200.0)
    with pytest.raises(ContractError):
        bethe.series_strong_w(0.0)
