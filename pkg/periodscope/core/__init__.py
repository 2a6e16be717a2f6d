"""Core module with exceptions and logging."""

from periodscope.core.exceptions import (
    CenterHypothesisViolated,
    ConfigurationError,
    DegenerateCritical,
    DomainError,
    EnergyOutOfRange,
    ExpressionSyntaxError,
    GuardViolation,
    HypothesisError,
    IntegrationFailure,
    InversionFailure,
    NumberOutOfRange,
    NotConservative,
    NotEven,
    NotPositive,
    NumericalError,
    ParseError,
    PeriodScopeError,
    QuadratureNonConvergence,
    RowFailures,
    UnknownIdentifierError,
)
from periodscope.core.logging import get_logger, setup_logging

__all__ = [
    "CenterHypothesisViolated",
    "ConfigurationError",
    "DegenerateCritical",
    "DomainError",
    "EnergyOutOfRange",
    "ExpressionSyntaxError",
    "GuardViolation",
    "HypothesisError",
    "IntegrationFailure",
    "InversionFailure",
    "NumberOutOfRange",
    "NotConservative",
    "NotEven",
    "NotPositive",
    "NumericalError",
    "ParseError",
    "PeriodScopeError",
    "QuadratureNonConvergence",
    "RowFailures",
    "UnknownIdentifierError",
    "get_logger",
    "setup_logging",
]
