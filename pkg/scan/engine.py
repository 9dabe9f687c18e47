"""
Parameter sweeps over the extended Hubbard chain.

Every point is an independent ground-state solve. Points are farmed out to a
thread pool from an asyncio loop and gathered back in axis order, so the
result never depends on completion order. A point whose solver fails is kept
as NaN with its error message; the sweep itself carries on.
"""

import asyncio
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Optional

import numpy as np

from hubbard.bethe import QuadratureSpec, ev_half_filling
from hubbard.errors import ContractError, ConvergenceError, QuadratureError, SectorError
from hubbard.lanczos import SolverOptions
from hubbard.observables import (
    SECTOR_POLICY,
    charge_gap,
    entanglement_at,
    ground_energy,
    sector_for,
)
from hubbard.params import Boundary, ModelParams
from scan.features import CUSP_THETA, FeatureReport, detect_features

logger = logging.getLogger(__name__)

# finite-size window for matching a transect feature to a phase line
FEATURE_WINDOW = 0.5
GAP_STEP = 0.1
PLATEAU_TOL = 1e-9

Range = tuple[float, float]


class Task(NamedTuple):
    params: ModelParams
    n_up: int
    n_down: int


@dataclass
class Sample:
    ev: float
    populations: np.ndarray
    degenerate: bool
    residual: float
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass
class EntanglementCurve:
    axis_name: str
    axis_values: np.ndarray
    ev_values: np.ndarray
    degenerate: np.ndarray
    # columns z, u_plus, u_minus, w
    populations: np.ndarray
    sectors: list[tuple[int, int]]
    params: ModelParams
    failed: np.ndarray
    errors: dict[int, str] = field(default_factory=dict)
    # optional per-point columns (e.g. the L = infinity Bethe value)
    extra: dict[str, np.ndarray] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)

    def argmax(self) -> int:
        return int(np.nanargmax(self.ev_values))


@dataclass
class EntanglementGrid:
    u_values: np.ndarray
    v_values: np.ndarray
    # row i is U = u_values[i]
    ev_matrix: np.ndarray
    degenerate: np.ndarray
    failed: np.ndarray
    L: int
    errors: dict[tuple[int, int], str] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)

    def column(self, V: float) -> np.ndarray:
        return self.ev_matrix[:, int(np.argmin(np.abs(self.v_values - V)))]


'''
Point evaluation
'''


def evaluate(task: Task, options: Optional[SolverOptions] = None) -> Sample:
    try:
        ev, rdm, ground = entanglement_at(task.params, task.n_up, task.n_down, options)
    except (ConvergenceError, ContractError) as exc:
        logger.warning("point failed: %s", exc)
        return Sample(float("nan"), np.full(4, np.nan), False, float("nan"), str(exc))
    return Sample(ev, rdm.populations, ground.degenerate, float(np.max(ground.residuals)))


async def _gather(tasks: list[Task], options: Optional[SolverOptions], jobs: int) -> list[Sample]:
    loop = asyncio.get_running_loop()
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [loop.run_in_executor(pool, evaluate, task, options) for task in tasks]
        return list(await asyncio.gather(*futures))


def evaluate_all(tasks: list[Task], options: Optional[SolverOptions] = None, jobs: int = 1) -> list[Sample]:
    logger.info("evaluating %d points with %d worker(s)", len(tasks), max(jobs, 1))
    if jobs <= 1:
        return [evaluate(task, options) for task in tasks]
    return asyncio.run(_gather(tasks, options, jobs))


def _axis(span: Range, steps: int) -> np.ndarray:
    lo, hi = span
    if steps < 2:
        raise ContractError(f"a sweep needs at least 2 steps, got {steps}")
    if not lo < hi:
        raise ContractError(f"empty range {lo}:{hi}")
    return np.linspace(lo, hi, steps)


def _half_filling(L: int) -> tuple[int, int]:
    if L % 2:
        raise SectorError(f"half-filling scans need even L, got {L}")
    return L // 2, L // 2


def _curve(
    axis_name: str,
    axis: np.ndarray,
    tasks: list[Task],
    samples: list[Sample],
    params: ModelParams,
    **metadata: Any,
) -> EntanglementCurve:
    errors = {i: s.error for i, s in enumerate(samples) if s.error}
    return EntanglementCurve(
        axis_name=axis_name,
        axis_values=axis,
        ev_values=np.array([s.ev for s in samples]),
        degenerate=np.array([s.degenerate for s in samples]),
        populations=np.array([s.populations for s in samples]),
        sectors=[(t.n_up, t.n_down) for t in tasks],
        params=params,
        failed=np.array([s.failed for s in samples]),
        errors=errors,
        metadata={"sector_policy": SECTOR_POLICY, **metadata},
    )


'''
Sweeps
'''


def scan_uv(
    L: int,
    u_range: Range,
    v_range: Range,
    steps: int | tuple[int, int],
    *,
    boundary: Boundary = Boundary.PERIODIC,
    options: Optional[SolverOptions] = None,
    jobs: int = 1,
) -> EntanglementGrid:
    u_steps, v_steps = (steps, steps) if isinstance(steps, int) else steps
    us, vs = _axis(u_range, u_steps), _axis(v_range, v_steps)
    n_up, n_down = _half_filling(L)

    tasks = [
        Task(ModelParams(U=u, V=v, L=L, boundary=boundary), n_up, n_down)
        for u in us
        for v in vs
    ]
    samples = evaluate_all(tasks, options, jobs)

    shape = (len(us), len(vs))
    errors = {divmod(i, len(vs)): s.error for i, s in enumerate(samples) if s.error}
    return EntanglementGrid(
        u_values=us,
        v_values=vs,
        ev_matrix=np.array([s.ev for s in samples]).reshape(shape),
        degenerate=np.array([s.degenerate for s in samples]).reshape(shape),
        failed=np.array([s.failed for s in samples]).reshape(shape),
        L=L,
        errors=errors,
        metadata={"sector_policy": SECTOR_POLICY, "boundary": boundary.value},
    )


def scan_u(
    L: int,
    u_range: Range,
    steps: int,
    V: float = 0.0,
    *,
    bethe: bool = False,
    boundary: Boundary = Boundary.PERIODIC,
    options: Optional[SolverOptions] = None,
    jobs: int = 1,
) -> EntanglementCurve:
    us = _axis(u_range, steps)
    n_up, n_down = _half_filling(L)
    base = ModelParams(U=0.0, V=V, L=L, boundary=boundary)
    tasks = [Task(base.with_couplings(U=u), n_up, n_down) for u in us]
    curve = _curve("U", us, tasks, evaluate_all(tasks, options, jobs), base)

    if bethe:
        curve.extra["ev_bethe"] = np.array([_bethe_or_nan(u) for u in us])
        if V != 0.0:
            logger.warning("the Bethe column is exact only at V=0, got V=%g", V)
    return curve


def _bethe_or_nan(U: float) -> float:
    try:
        return ev_half_filling(U, QuadratureSpec())
    except QuadratureError as exc:
        logger.warning("Bethe value at U=%g unavailable: %s", U, exc)
        return float("nan")


def scan_v(
    L: int,
    U: float,
    v_range: Range,
    steps: int,
    *,
    theta: float = CUSP_THETA,
    boundary: Boundary = Boundary.PERIODIC,
    options: Optional[SolverOptions] = None,
    jobs: int = 1,
) -> tuple[EntanglementCurve, FeatureReport]:
    vs = _axis(v_range, steps)
    n_up, n_down = _half_filling(L)
    base = ModelParams(U=U, V=0.0, L=L, boundary=boundary)
    tasks = [Task(base.with_couplings(V=v), n_up, n_down) for v in vs]
    curve = _curve(
        "V", vs, tasks, evaluate_all(tasks, options, jobs), base,
        cusp_theta=theta, feature_window=FEATURE_WINDOW,
    )
    return curve, detect_features(curve, theta)


def scan_filling(
    L: int,
    U: float,
    V: float = 0.0,
    *,
    theta: float = CUSP_THETA,
    boundary: Boundary = Boundary.PERIODIC,
    options: Optional[SolverOptions] = None,
    jobs: int = 1,
) -> tuple[EntanglementCurve, FeatureReport]:
    """E_v against n = N/L for N = 1 .. 2L-1, one Sz-minimal sector per N."""
    base = ModelParams(U=U, V=V, L=L, boundary=boundary)
    counts = list(range(1, 2 * L))
    tasks = [Task(base, *sector_for(N, L)) for N in counts]
    samples = evaluate_all(tasks, options, jobs)
    ns = np.array(counts, dtype=np.float64) / L

    ev = np.array([s.ev for s in samples])
    # E_v(N) against E_v(2L - N); the list is its own mirror image
    mirror_defect = float(np.nanmax(np.abs(ev - ev[::-1])))
    curve = _curve("n", ns, tasks, samples, base, cusp_theta=theta, mirror_defect=mirror_defect)
    if mirror_defect > 1e-8:
        logger.warning("mirror relation off by %.3e at L=%d U=%g V=%g", mirror_defect, L, U, V)
    return curve, detect_features(curve, theta)


'''
Half filling slope and chemical potential
'''


@dataclass(frozen=True)
class SlopeJump:
    U: float
    L: int
    ev_half: float
    # second-order one-sided stencils at n = 1 from below and above
    slope_minus: float
    slope_plus: float
    two_point_minus: float
    two_point_plus: float
    gap_estimate: Optional[float] = None
    # no cusp is expected in the free chain
    flagged_free: bool = False

    @property
    def jump(self) -> float:
        return self.slope_plus - self.slope_minus

    @property
    def antisymmetry(self) -> float:
        return abs(self.slope_plus + self.slope_minus)


def slope_jump_at_half_filling(
    L: int,
    U: float,
    *,
    with_gap_estimate: bool = True,
    boundary: Boundary = Boundary.PERIODIC,
    options: Optional[SolverOptions] = None,
    jobs: int = 1,
) -> SlopeJump:
    _half_filling(L)
    if L < 4:
        raise SectorError(f"the slope stencil needs L >= 4, got {L}")
    h = 2.0 / L
    params = ModelParams(U=U, V=0.0, L=L, boundary=boundary)

    counts = [L - 4, L - 2, L, L + 2, L + 4]
    tasks = [Task(params, *sector_for(N, L)) for N in counts]
    samples = evaluate_all(tasks, options, jobs)
    for N, sample in zip(counts, samples):
        if sample.failed:
            raise ConvergenceError(sample.error, sample.residual, point=f"U={U}, L={L}, N={N}")
    e_mm, e_m, e_0, e_p, e_pp = (s.ev for s in samples)

    estimate = None
    if with_gap_estimate:
        z, u_plus = samples[2].populations[0], samples[2].populations[1]
        estimate = _gap_estimate(params, z, u_plus, options)

    result = SlopeJump(
        U=U,
        L=L,
        ev_half=e_0,
        slope_minus=(3.0 * e_0 - 4.0 * e_m + e_mm) / (2.0 * h),
        slope_plus=(3.0 * e_0 - 4.0 * e_p + e_pp) / (-2.0 * h),
        two_point_minus=(e_0 - e_m) / h,
        two_point_plus=(e_p - e_0) / h,
        gap_estimate=estimate,
        flagged_free=U == 0.0,
    )
    if result.flagged_free:
        logger.info("U=0: no slope jump expected at half filling (measured %.3e)", result.jump)
    return result


def scan_slope(
    L: int,
    u_range: Range,
    steps: int,
    *,
    with_gap_estimate: bool = True,
    boundary: Boundary = Boundary.PERIODIC,
    options: Optional[SolverOptions] = None,
    jobs: int = 1,
) -> list[SlopeJump]:
    """Slope jump at n = 1 along U. A failing U stops the sweep, naming the point."""
    results = [
        slope_jump_at_half_filling(
            L, float(u), with_gap_estimate=with_gap_estimate, boundary=boundary, options=options, jobs=jobs
        )
        for u in _axis(u_range, steps)
    ]
    logger.info("slope sweep L=%d: jumps %s", L, ", ".join(f"{r.U:g}:{r.jump:.4g}" for r in results))
    return results


def _gap_estimate(params: ModelParams, z: float, u_plus: float, options: Optional[SolverOptions]) -> float:
    """-(log2 u+ - log2 z) (1/2 + 2 dGap/dU), the gap slope by centred difference."""
    L = params.L
    upper = charge_gap(params.with_couplings(U=params.U + GAP_STEP), L, options).delta_e
    lower = charge_gap(params.with_couplings(U=params.U - GAP_STEP), L, options).delta_e
    d_gap = (upper - lower) / (2.0 * GAP_STEP)
    return float(-(np.log2(u_plus) - np.log2(z)) * (0.5 + 2.0 * d_gap))


@dataclass(frozen=True)
class MuSelection:
    n_particles: int
    ground_energy: float
    # E0(N) - mu N for N = 0 .. 2L
    energies: np.ndarray
    # every N tied with the minimum
    plateau: list[int]
    mu: float
    L: int

    @property
    def filling(self) -> float:
        return self.n_particles / self.L

    @property
    def degenerate(self) -> bool:
        return len(self.plateau) > 1


def select_sector_by_mu(
    L: int,
    U: float,
    V: float,
    mu: float,
    *,
    boundary: Boundary = Boundary.PERIODIC,
    options: Optional[SolverOptions] = None,
) -> MuSelection:
    params = ModelParams(U=U, V=V, mu=mu, L=L, boundary=boundary)
    energies = np.array([ground_energy(params, N, options) for N in range(2 * L + 1)])
    best = int(np.argmin(energies))
    tol = PLATEAU_TOL * max(1.0, abs(float(energies[best])))
    plateau = [int(N) for N in np.flatnonzero(energies - energies[best] <= tol)]
    logger.info("mu=%g: N*=%d (plateau %s)", mu, best, plateau)
    return MuSelection(
        n_particles=best,
        ground_energy=float(energies[best]),
        energies=energies,
        plateau=plateau,
        mu=mu,
        L=L,
    )
