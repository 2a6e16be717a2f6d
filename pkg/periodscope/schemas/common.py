"""Common output envelopes."""

from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from periodscope.core.exceptions import PeriodScopeError


# =============================================================================
# Error Schemas
# =============================================================================


class ErrorDetail(BaseModel):
    """Error detail structure."""

    code: str
    message: str
    details: dict[str, Any] = {}


class ErrorResponse(BaseModel):
    """Error body printed on stderr when a command fails."""

    error: ErrorDetail
    exit_code: int

    @classmethod
    def from_exception(cls, exc: PeriodScopeError) -> "ErrorResponse":
        return cls(
            error=ErrorDetail(code=exc.error_code, message=exc.message, details=exc.details),
            exit_code=exc.exit_code,
        )


# =============================================================================
# Result Schemas
# =============================================================================


class RowModel(BaseModel):
    """Base for table rows; field order is column order."""

    model_config = ConfigDict(use_enum_values=True)

    status: str = Field(default="ok", description="ok, or failed with error_code set")
    error_code: str | None = None


class OutputDocument(BaseModel):
    """Top-level JSON document: provenance, the run configuration, table rows and diagnostics."""

    program: str
    version: str
    config: dict[str, Any]
    rows: list[dict[str, Any]]
    diagnostics: dict[str, Any] = {}
