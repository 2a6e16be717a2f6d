"""Run configuration assembled from command-line flags."""

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Command(str, Enum):
    SYSTEM = "system"
    PERIOD = "period"
    MONOTONICITY = "monotonicity"
    ISOCHRONY = "isochrony"
    REPRO_KM = "repro-km"
    REPRO_SECT3 = "repro-sect3"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class EnergyRange(BaseModel):
    """Evenly spaced energies E_min..E_max, inclusive."""

    model_config = ConfigDict(frozen=True)

    e_min: float = Field(..., gt=0.0, description="Lowest energy, must be positive")
    e_max: float
    count: int = Field(..., ge=1, description="Number of energies")

    @model_validator(mode="after")
    def _ordered(self) -> "EnergyRange":
        if self.e_max < self.e_min:
            raise ValueError("E_max must not be below E_min")
        return self

    def values(self) -> list[float]:
        if self.count == 1:
            return [self.e_min]
        return [float(e) for e in np.linspace(self.e_min, self.e_max, self.count)]


class RunConfig(BaseModel):
    """Validated inputs of one CLI invocation."""

    model_config = ConfigDict(frozen=True, use_enum_values=True)

    command: Command
    f_text: str | None = Field(default=None, description="Coefficient of ẋ²")
    g_text: str | None = Field(default=None, description="Restoring term")
    domain: tuple[float, float]
    energies: list[float] | None = Field(default=None, description="Explicit energy list")
    e_range: EnergyRange | None = None
    a3: list[float] = Field(default_factory=list, description="Cubic coefficients for repro-km")
    tol_q: float = Field(..., gt=0.0)
    tol_iso: float = Field(..., gt=0.0)
    samples: int = Field(..., ge=16, description="Chebyshev samples per orbit window")
    output_format: OutputFormat = OutputFormat.CSV
    out: str | None = Field(default=None, description="Output path; stdout when unset")
    workers: int = Field(default=1, ge=1)

    @field_validator("domain")
    @classmethod
    def _contains_origin(cls, value: tuple[float, float]) -> tuple[float, float]:
        lo, hi = value
        if not lo < 0.0 < hi:
            raise ValueError("domain must contain 0 in its interior")
        return value

    @field_validator("energies")
    @classmethod
    def _positive(cls, value: list[float] | None) -> list[float] | None:
        if value is not None:
            if not value:
                raise ValueError("energy list is empty")
            if any(e <= 0.0 for e in value):
                raise ValueError("energies must be positive")
        return value

    @model_validator(mode="after")
    def _one_energy_source(self) -> "RunConfig":
        if self.energies is not None and self.e_range is not None:
            raise ValueError("give either an energy list or an energy range, not both")
        return self

    def energy_list(self) -> list[float] | None:
        """Requested energies in order, or None when the command should choose."""
        if self.energies is not None:
            return list(self.energies)
        if self.e_range is not None:
            return self.e_range.values()
        return None
