"""
Exact half-filled Hubbard chain (V = 0, L = infinity) from the Bethe-ansatz
ground-state energy

    e(U) = -4 int_0^inf J0(w) J1(w) / (w (1 + exp(w U / 2))) dw,

its U-derivative (the double occupancy) and the strong/weak coupling series.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.integrate import quad
from scipy.special import expit, gamma, j0, j1, zeta

from hubbard.errors import ContractError, QuadratureError
from hubbard.observables import _entropy_bits, entropy_from_double_occupancy

logger = logging.getLogger(__name__)

ZETA3 = float(zeta(3))
ZETA5 = float(zeta(5))
ZETA7 = float(zeta(7))
LN2 = math.log(2.0)

STRONG_WINDOW = 8.0
WEAK_WINDOW = 1.0
# below this |U| the exponential cut-off of the integrands sits too far out for
# quadrature and the weak coupling power series takes over
SERIES_CUTOFF = 0.05
# odd powers U, U^3, .., U^7 summed below the cutoff
WEAK_TERMS = 4
FREE_ENERGY = -4.0 / math.pi


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-11
    # hard stop for the truncation point; the tail bound normally stops far earlier
    omega_max: float = 1e5
    # panels follow the ~pi spacing of the Bessel oscillations
    panel_width: float = math.pi
    # |J0(w) J1(w)| <= envelope / w
    envelope: float = 1.0
    limit: int = 200


def bessel_kernel(omega: np.ndarray) -> np.ndarray:
    return j0(omega) * j1(omega)


def _integrate(
    integrand: Callable[[float], float],
    tail: Callable[[float], float],
    U: float,
    q: QuadratureSpec,
    label: str,
) -> float:
    width = min(q.panel_width, 8.0 / U)
    total, error, a, panels = 0.0, 0.0, 0.0, 0
    while a == 0.0 or tail(a) > 0.5 * q.abs_tol:
        if a >= q.omega_max:
            raise QuadratureError(f"{label}: tail still above tolerance at omega_max", total, tail(a))
        value, panel_error = quad(
            integrand, a, a + width, epsabs=1e-3 * q.abs_tol, epsrel=0.0, limit=q.limit
        )
        total += value
        error += panel_error
        a += width
        panels += 1
    error += tail(a)
    logger.debug("%s(U=%g): %d panels up to omega=%.4g, error %.2e", label, U, panels, a, error)
    if error > q.abs_tol:
        raise QuadratureError(f"{label}: tolerance {q.abs_tol:.1e} not met", total, error)
    return total


def gs_energy_per_site(U: float, q: QuadratureSpec = QuadratureSpec()) -> float:
    if abs(U) < SERIES_CUTOFF:
        return _weak_sum(U, q, "gs_energy", antiderivative=True)
    if U < 0:
        # particle-hole partner: e(-U) = e(U) - U/2
        return gs_energy_per_site(-U, q) + U / 2.0

    C = q.envelope

    def integrand(w: float) -> float:
        return bessel_kernel(w) / w * expit(-0.5 * w * U)

    def tail(w: float) -> float:
        return 4.0 * C / w**2 * (2.0 / U) * math.exp(-0.5 * w * U)

    return -4.0 * _integrate(integrand, tail, U, q, "gs_energy")


def double_occupancy(U: float, q: QuadratureSpec = QuadratureSpec()) -> float:
    """
    w = de/dU, differentiating the Fermi-like factor under the integral:
    w(U) = 2 int J0 J1 s(wU/2) s(-wU/2) dw with s the logistic function.
    """
    if abs(U) < SERIES_CUTOFF:
        return _weak_sum(U, q, "double_occupancy", antiderivative=False)
    if U < 0:
        return 0.5 - double_occupancy(-U, q)

    C = q.envelope

    def integrand(w: float) -> float:
        x = 0.5 * w * U
        return 2.0 * bessel_kernel(w) * expit(x) * expit(-x)

    def tail(w: float) -> float:
        return 4.0 * C / (w * U) * math.exp(-0.5 * w * U)

    return _integrate(integrand, tail, U, q, "double_occupancy")


def ev_half_filling(U: float, q: QuadratureSpec = QuadratureSpec()) -> float:
    return entropy_from_double_occupancy(double_occupancy(U, q))


def ev_infinite_u(n: float) -> float:
    """No double occupancy: z = 1 - n, u+ = u- = n/2. Mirrored for n > 1."""
    if not 0.0 <= n <= 2.0:
        raise ContractError(f"filling n={n} outside [0, 2]")
    if n > 1.0:
        n = 2.0 - n
    return _entropy_bits(np.array([1.0 - n, 0.5 * n, 0.5 * n]))


'''
Series
'''


class SeriesValue(NamedTuple):
    value: float
    valid: bool
    # size of the leading neglected contribution
    omitted: float
    warning: Optional[str] = None


def _series(value: float, valid: bool, omitted: float, name: str, U: float) -> SeriesValue:
    if valid:
        return SeriesValue(value, True, omitted)
    message = f"{name}: U={U} is outside the series validity window"
    logger.warning(message)
    return SeriesValue(value, False, omitted, message)


def series_strong_w(U: float) -> SeriesValue:
    if U < 0:
        mirrored = series_strong_w(-U)
        return mirrored._replace(value=0.5 - mirrored.value)
    if U == 0:
        raise ContractError("the strong coupling series diverges at U=0")
    value = 4.0 * LN2 / U**2 - 27.0 * ZETA3 / U**4 + 375.0 * ZETA5 / U**6
    # next order of the Laplace expansion of the Bessel kernel
    omitted = -77175.0 / 16.0 * ZETA7 / U**8
    return _series(value, U >= STRONG_WINDOW, abs(omitted), "series_strong_w", U)


def weak_coefficient(n: int) -> float:
    """
    Coefficient c_n of U^n in w(U) = 1/4 + sum_n c_n U^n (n odd), from the
    Mellin transforms of J0 J1 and of the logistic kernel:

        c_n = 2 eta'(-n-1) Gamma(1 + n/2) / ((n!)^2 Gamma(1 - n/2)^2 Gamma(-n/2))

    with eta the alternating zeta function. c_1 = -7 zeta(3) / (8 pi^3),
    c_3 = -93 zeta(5) / (2^9 pi^5).
    """
    if n < 1 or n % 2 == 0:
        raise ContractError(f"weak coupling coefficients exist for odd n >= 1, got {n}")
    m = (n + 1) // 2
    zeta_prime = (-1) ** m * math.factorial(2 * m) * float(zeta(2 * m + 1)) / (2.0 * (2.0 * math.pi) ** (2 * m))
    eta_prime = (1.0 - 2.0 ** (2 * m + 1)) * zeta_prime
    denominator = math.factorial(n) ** 2 * gamma(1.0 - 0.5 * n) ** 2 * gamma(-0.5 * n)
    return float(2.0 * eta_prime * gamma(1.0 + 0.5 * n) / denominator)


def _weak_sum(U: float, q: QuadratureSpec, label: str, antiderivative: bool) -> float:
    # the first left-out power is the error estimate
    orders = [2 * j + 1 for j in range(WEAK_TERMS + 1)]
    if antiderivative:
        base = FREE_ENERGY + 0.25 * U
        terms = [weak_coefficient(n) * U ** (n + 1) / (n + 1) for n in orders]
    else:
        base = 0.25
        terms = [weak_coefficient(n) * U**n for n in orders]
    value = base + math.fsum(terms[:-1])
    error = abs(terms[-1])
    logger.debug("%s(U=%g): weak coupling series, error %.2e", label, U, error)
    if error > q.abs_tol:
        raise QuadratureError(f"{label}: series remainder above {q.abs_tol:.1e}", value, error)
    return value


def series_weak_w(U: float) -> SeriesValue:
    value = 0.25 + weak_coefficient(1) * U + weak_coefficient(3) * U**3
    omitted = weak_coefficient(5) * U**5
    return _series(value, abs(U) <= WEAK_WINDOW, abs(omitted), "series_weak_w", U)


def series_strong_ev(U: float) -> SeriesValue:
    if U < 0:
        return series_strong_ev(-U)
    if U == 0:
        raise ContractError("the strong coupling series diverges at U=0")
    value = 1.0 + 16.0 * math.log(U) / U**2
    w0 = 4.0 * LN2 / U**2
    correction = w0 * (2.0 / LN2 - 2.0 - 2.0 * math.log2(4.0 * LN2))
    return _series(value, U >= STRONG_WINDOW, abs(correction), "series_strong_ev", U)


def series_weak_ev(U: float) -> SeriesValue:
    """
    2 - (8 / ln 2) d^2 with d = 7 zeta(3) U / (8 pi^3), the second-order
    expansion of the half-filling entropy about w = 1/4 along the weak
    coupling slope of w.
    """
    d = 7.0 * ZETA3 * U / (8.0 * math.pi**3)
    d3 = 93.0 * ZETA5 * U**3 / (2**9 * math.pi**5)
    value = 2.0 - 8.0 * d**2 / LN2
    return _series(value, abs(U) <= WEAK_WINDOW, 16.0 * abs(d * d3) / LN2, "series_weak_ev", U)
