from typing import Optional


class HubbardError(Exception):
    pass


class SectorError(HubbardError, ValueError):
    """Invalid lattice length, particle counts or boundary for a sector."""


class ContractError(HubbardError, AssertionError):
    """A caller broke an operation's precondition (not a numerical failure)."""


class ConvergenceError(HubbardError):
    def __init__(
        self,
        message: str,
        best_residual: float,
        eigenvalue: Optional[float] = None,
        steps: int = 0,
        point: Optional[str] = None,
    ):
        self.message = message
        self.best_residual = best_residual
        self.eigenvalue = eigenvalue
        self.steps = steps
        self.point = point
        detail = f"{message} (best residual {best_residual:.3e} after {steps} steps"
        if eigenvalue is not None:
            detail += f", eigenvalue estimate {eigenvalue:.12g}"
        detail += ")"
        if point:
            detail += f" at {point}"
        super().__init__(detail)

    def at(self, point: str) -> "ConvergenceError":
        return ConvergenceError(
            self.message,
            self.best_residual,
            self.eigenvalue,
            self.steps,
            point,
        )


class QuadratureError(HubbardError):
    def __init__(self, message: str, value: float, error_estimate: float):
        self.value = value
        self.error_estimate = error_estimate
        super().__init__(
            f"{message} (value {value:.15g}, error estimate {error_estimate:.3e})"
        )
