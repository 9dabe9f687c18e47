import math
from enum import Enum

from pydantic import BaseModel, ConfigDict, field_validator, model_validator


class Boundary(str, Enum):
    OPEN = "open"
    PERIODIC = "periodic"


# Couplings are in units of the hopping amplitude, which is fixed to 1.
class ModelParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    U: float
    V: float = 0.0
    mu: float = 0.0
    L: int
    boundary: Boundary = Boundary.PERIODIC

    @field_validator("U", "V", "mu")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("couplings must be finite")
        return value

    @model_validator(mode="after")
    def _check_lattice(self) -> "ModelParams":
        if self.L < 2:
            raise ValueError("L must be at least 2")
        # a 2-site ring would count its single bond twice
        if self.boundary == Boundary.PERIODIC and self.L < 3:
            raise ValueError("periodic boundary needs L >= 3")
        return self

    def with_couplings(self, **changes: float) -> "ModelParams":
        return ModelParams.model_validate({**self.model_dump(), **changes})

    def bonds(self) -> list[tuple[int, int]]:
        """Nearest-neighbour bonds (j, j+1), each listed once."""
        pairs = [(j, j + 1) for j in range(self.L - 1)]
        if self.boundary == Boundary.PERIODIC:
            pairs.append((self.L - 1, 0))
        return pairs
