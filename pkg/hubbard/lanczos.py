import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal

from hubbard.errors import ContractError, ConvergenceError

logger = logging.getLogger(__name__)

Matvec = Callable[[np.ndarray], np.ndarray]

DEFAULT_SEED = 20040917
TOL_DEGENERACY = 1e-8
MAX_PAIRS = 8
# beta below this fraction of ||T|| means the Krylov space is invariant
BREAKDOWN = 1e-12
# residuals below this many ulps of ||H|| are out of reach in double precision
RESIDUAL_FLOOR = 1e3
EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class SolverOptions:
    k: int = 3
    tol: float = 1e-10
    max_iter: int = 20000
    seed: int = DEFAULT_SEED
    method: str = "auto"
    krylov_dim: Optional[int] = None
    dense_cutoff: int = 400
    extend_degenerate: bool = True


@dataclass
class GroundStateResult:
    eigenvalues: np.ndarray
    # columns are eigenvectors, ordered like eigenvalues
    vectors: np.ndarray
    residuals: np.ndarray
    degeneracy: int
    # tol, or the attainable floor when tol sits below it
    residual_bound: float
    method: str = "lanczos"
    steps: int = 0

    @property
    def converged(self) -> bool:
        return bool(np.all(self.residuals <= self.residual_bound))

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def ground_vectors(self) -> np.ndarray:
        return self.vectors[:, : self.degeneracy]

    @property
    def degenerate(self) -> bool:
        return self.degeneracy > 1


def residual_bound(tol: float, norm: float) -> float:
    return float(max(tol, RESIDUAL_FLOOR * EPS * norm))


def count_degenerate(eigenvalues: np.ndarray) -> int:
    return int(np.sum(eigenvalues - eigenvalues[0] <= TOL_DEGENERACY))


def lowest_eigenpairs(
    dim: int,
    matvec: Matvec,
    k: int = 3,
    tol: float = 1e-10,
    max_iter: int = 20000,
    seed: int = DEFAULT_SEED,
    *,
    method: str = "auto",
    krylov_dim: Optional[int] = None,
    dense_cutoff: int = 400,
    extend_degenerate: bool = False,
) -> GroundStateResult:
    """
    k lowest eigenpairs of the real symmetric operator behind `matvec`.

    Every residual is at most tol. When tol is below what double precision
    can resolve for this ||H|| (about 1e3 ulps of ||H||, estimated from the
    Lanczos tridiagonal) the bound is raised to that floor and reported as
    residual_bound. With extend_degenerate, extra pairs are computed while
    every pair found so far is degenerate with the lowest one, so a ground
    multiplet is never cut in half.
    """
    if dim < 1:
        raise ContractError(f"dim must be positive, got {dim}")
    if not 1 <= k <= min(dim, MAX_PAIRS):
        raise ContractError(f"k={k} outside [1, {min(dim, MAX_PAIRS)}]")
    if tol <= 0:
        raise ContractError("tol must be positive")
    if method not in ("auto", "lanczos", "dense"):
        raise ContractError(f"unknown method {method!r}")

    cap = min(dim, MAX_PAIRS) if extend_degenerate else k
    if method == "dense" or (method == "auto" and dim <= dense_cutoff):
        return _dense_pairs(dim, matvec, k, cap, tol)
    return _lanczos_pairs(dim, matvec, k, cap, tol, max_iter, seed, krylov_dim)


def _dense_pairs(dim: int, matvec: Matvec, k: int, cap: int, tol: float) -> GroundStateResult:
    H = np.empty((dim, dim))
    unit = np.zeros(dim)
    for i in range(dim):
        unit[i] = 1.0
        H[:, i] = matvec(unit)
        unit[i] = 0.0
    values, vectors = np.linalg.eigh(H)
    bound = residual_bound(tol, max(abs(values[0]), abs(values[-1])))

    count = k
    while count < cap and values[count - 1] - values[0] <= TOL_DEGENERACY:
        count += 1
    values, vectors = values[:count], vectors[:, :count]

    residuals = np.array(
        [np.linalg.norm(matvec(vectors[:, i]) - values[i] * vectors[:, i]) for i in range(count)]
    )
    worst = int(np.argmax(residuals))
    if residuals[worst] > bound:
        raise ConvergenceError(
            "dense diagonalisation missed the residual bound",
            float(residuals[worst]),
            float(values[worst]),
        )
    return GroundStateResult(
        eigenvalues=values,
        vectors=vectors,
        residuals=residuals,
        degeneracy=count_degenerate(values),
        residual_bound=bound,
        method="dense",
        steps=dim,
    )


def _lanczos_pairs(
    dim: int,
    matvec: Matvec,
    k: int,
    cap: int,
    tol: float,
    max_iter: int,
    seed: int,
    krylov_dim: Optional[int],
) -> GroundStateResult:
    rng = np.random.default_rng(seed)
    m_max = krylov_dim or max(200, 4 * k)
    workspace = np.zeros((min(m_max, dim), dim))

    thetas: list[float] = []
    locked: list[np.ndarray] = []
    residuals: list[float] = []
    bound = tol
    steps = 0
    target = k
    while len(thetas) < target:
        theta, x, res, used, pair_bound = _lowest_in_complement(
            matvec, dim, np.array(locked).reshape(len(locked), dim), rng, tol, workspace, max_iter
        )
        steps += used
        bound = max(bound, pair_bound)
        thetas.append(theta)
        locked.append(x)
        residuals.append(res)
        logger.debug("pair %d: %.12g (residual %.2e, %d steps)", len(thetas), theta, res, used)

        if len(thetas) == target and target < cap:
            if count_degenerate(np.sort(np.array(thetas))) == len(thetas):
                target += 1

    order = np.argsort(thetas, kind="stable")
    values = np.array(thetas)[order]
    return GroundStateResult(
        eigenvalues=values,
        vectors=np.array(locked)[order].T,
        residuals=np.array(residuals)[order],
        degeneracy=count_degenerate(values),
        residual_bound=bound,
        method="lanczos",
        steps=steps,
    )


def _orthogonalise(w: np.ndarray, basis: np.ndarray) -> np.ndarray:
    if basis.size:
        w -= basis.T @ (basis @ w)
    return w


def _lowest_in_complement(
    matvec: Matvec,
    dim: int,
    locked: np.ndarray,
    rng: np.random.Generator,
    tol: float,
    workspace: np.ndarray,
    max_iter: int,
) -> tuple[float, np.ndarray, float, int, float]:
    """Lowest eigenpair orthogonal to the locked vectors, with explicit restarts."""
    start = rng.standard_normal(dim)
    for _ in range(2):
        start = _orthogonalise(start, locked)

    available = dim - len(locked)
    budget = max_iter
    used = 0
    best_res, best_theta = np.inf, None
    while budget > 0:
        m_cap = min(workspace.shape[0], available, budget)
        theta, x, m, scale = _krylov_cycle(matvec, start, locked, workspace, m_cap, tol)
        residual = float(np.linalg.norm(matvec(x) - theta * x))
        used += m + 1
        budget -= m + 1
        bound = residual_bound(tol, max(scale, abs(theta)))
        if residual <= bound:
            return theta, x, residual, used, bound
        if residual < best_res:
            best_res, best_theta = residual, theta
        logger.debug("restart after %d steps: theta %.12g residual %.2e", used, theta, residual)
        start = x
    raise ConvergenceError("Lanczos did not converge", best_res, best_theta, used)


def _lowest_ritz(alphas: list[float], betas: list[float]) -> tuple[float, np.ndarray]:
    if len(alphas) == 1:
        return alphas[0], np.ones(1)
    w, v = eigh_tridiagonal(
        np.array(alphas), np.array(betas), select="i", select_range=(0, 0)
    )
    return float(w[0]), v[:, 0]


def _krylov_cycle(
    matvec: Matvec,
    start: np.ndarray,
    locked: np.ndarray,
    Q: np.ndarray,
    m_cap: int,
    tol: float,
) -> tuple[float, np.ndarray, int, float]:
    alphas: list[float] = []
    betas: list[float] = []
    q = start / np.linalg.norm(start)
    beta_prev = 0.0
    scale = 0.0
    for j in range(m_cap):
        Q[j] = q
        w = matvec(q)
        alpha = float(q @ w)
        w = w - alpha * q
        if j > 0:
            w -= beta_prev * Q[j - 1]
        # full reorthogonalisation, twice is enough
        for _ in range(2):
            w = _orthogonalise(w, Q[: j + 1])
            w = _orthogonalise(w, locked)
        beta = float(np.linalg.norm(w))
        alphas.append(alpha)
        scale = max(scale, abs(alpha) + beta + beta_prev)

        theta, s = _lowest_ritz(alphas, betas)
        estimate = abs(beta * s[-1])
        if estimate <= residual_bound(tol, scale) or beta <= BREAKDOWN * scale or j == m_cap - 1:
            x = Q[: j + 1].T @ s
            return theta, x / np.linalg.norm(x), j + 1, scale

        betas.append(beta)
        beta_prev = beta
        q = w / beta
    raise ContractError("empty Krylov cycle")
