import json
import os
from enum import Enum
from pathlib import Path
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from hubbard.lanczos import DEFAULT_SEED, SolverOptions
from hubbard.params import Boundary, ModelParams
from scan.features import CUSP_THETA


class Command(str, Enum):
    POINT = "point"
    SCAN_UV = "scan-uv"
    SCAN_U = "scan-u"
    SCAN_V = "scan-v"
    SCAN_N = "scan-n"
    SLOPE = "slope"
    GAP = "gap"
    BETHE = "bethe"
    MU = "mu"


SCANS = (Command.SCAN_UV, Command.SCAN_U, Command.SCAN_V, Command.SCAN_N)


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"
    # whitespace-delimited block for contour plotters, scan-uv only
    MATRIX = "matrix"


class SeriesKind(str, Enum):
    STRONG = "strong"
    WEAK = "weak"


def default_seed() -> int:
    return int(os.getenv("HUBENT_SEED", DEFAULT_SEED))


# Everything needed to reproduce one run. JSON outputs embed it under "config".
class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    command: Command
    L: int = 8
    nup: Optional[int] = None
    ndown: Optional[int] = None
    N: Optional[int] = None
    U: float = 0.0
    V: float = 0.0
    mu: float = 0.0
    boundary: Boundary = Boundary.PERIODIC

    u_range: Optional[tuple[float, float]] = None
    u_steps: int = 9
    v_range: Optional[tuple[float, float]] = None
    v_steps: int = 9
    theta: float = CUSP_THETA
    bethe: bool = False
    gap_estimate: bool = True
    series: Optional[SeriesKind] = None

    seed: int = Field(default_factory=default_seed)
    tol: float = 1e-10
    max_iter: int = 20000
    jobs: int = 1

    output: Optional[Path] = None
    format: Optional[OutputFormat] = None

    @field_validator("u_range", "v_range")
    @classmethod
    def _ordered(cls, span: Optional[tuple[float, float]]) -> Optional[tuple[float, float]]:
        if span is not None and not span[0] < span[1]:
            raise ValueError(f"range {span[0]}:{span[1]} is empty")
        return span

    @field_validator("u_steps", "v_steps")
    @classmethod
    def _steps(cls, steps: int) -> int:
        if steps < 2:
            raise ValueError("sweeps need at least 2 steps")
        return steps

    @field_validator("tol")
    @classmethod
    def _positive(cls, tol: float) -> float:
        if tol <= 0:
            raise ValueError("tolerance must be positive")
        return tol

    @field_validator("output")
    @classmethod
    def _writable(cls, path: Optional[Path]) -> Optional[Path]:
        if path is not None and not path.parent.is_dir():
            raise ValueError(f"output directory {path.parent} does not exist")
        return path

    @model_validator(mode="after")
    def _command_inputs(self) -> "RunConfig":
        needs_u = self.command in (Command.SCAN_UV, Command.SCAN_U)
        needs_v = self.command in (Command.SCAN_UV, Command.SCAN_V)
        if needs_u and self.u_range is None:
            raise ValueError(f"{self.command.value} needs --u-range")
        if needs_v and self.v_range is None:
            raise ValueError(f"{self.command.value} needs --v-range")
        if self.format == OutputFormat.MATRIX and self.command != Command.SCAN_UV:
            raise ValueError("the matrix format is only available for scan-uv")
        if (self.nup is None) != (self.ndown is None):
            raise ValueError("--nup and --ndown go together")
        if self.jobs < 1:
            raise ValueError("--jobs must be at least 1")
        return self

    @property
    def output_format(self) -> OutputFormat:
        if self.format is not None:
            return self.format
        return OutputFormat.CSV if self.command in SCANS else OutputFormat.JSON

    def model_params(self) -> ModelParams:
        return ModelParams(U=self.U, V=self.V, mu=self.mu, L=self.L, boundary=self.boundary)

    def solver_options(self) -> SolverOptions:
        return SolverOptions(tol=self.tol, max_iter=self.max_iter, seed=self.seed)


def load_config(path: Path) -> dict[str, Any]:
    """Config fields from a previous JSON output (or a bare config object)."""
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    return data.get("config", data)
