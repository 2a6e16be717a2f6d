"""Custom exception classes.

Every error carries the process exit code the CLI reports for it:
2 for malformed input, 3 for violated mathematical hypotheses and
4 for numerical failures.
"""

from typing import Any


class PeriodScopeError(Exception):
    """Base exception for application errors."""

    def __init__(
        self,
        message: str,
        exit_code: int = 1,
        error_code: str = "INTERNAL_ERROR",
        details: dict[str, Any] | None = None,
    ) -> None:
        self.message = message
        self.exit_code = exit_code
        self.error_code = error_code
        self.details = details or {}
        super().__init__(message)


# =============================================================================
# Parse Errors (exit 2)
# =============================================================================


class ParseError(PeriodScopeError):
    """Input could not be parsed."""

    def __init__(
        self,
        message: str = "Parse error",
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(
            message=message,
            exit_code=2,
            error_code="PARSE_ERROR",
            details=details,
        )


class ExpressionSyntaxError(ParseError):
    """Expression text does not follow the grammar."""

    def __init__(self, offset: int, expected: set[str] | frozenset[str], found: str) -> None:
        super().__init__(
            message=f"Syntax error at offset {offset}: found {found}, "
            f"expected one of {', '.join(sorted(expected))}",
            details={"offset": offset, "expected": sorted(expected), "found": found},
        )
        self.offset = offset
        self.expected = frozenset(expected)
        self.error_code = "EXPRESSION_SYNTAX"


class UnknownIdentifierError(ParseError):
    """Identifier is not a supported function or constant."""

    def __init__(self, name: str, offset: int) -> None:
        super().__init__(
            message=f"Unknown identifier '{name}' at offset {offset}",
            details={"identifier": name, "offset": offset},
        )
        self.name = name
        self.offset = offset
        self.error_code = "UNKNOWN_IDENTIFIER"


class NumberOutOfRange(ParseError):
    """Numeric literal does not fit a finite double."""

    def __init__(self, literal: str, offset: int) -> None:
        super().__init__(
            message=f"Number '{literal}' at offset {offset} is not a finite double",
            details={"literal": literal, "offset": offset},
        )
        self.literal = literal
        self.offset = offset
        self.error_code = "NUMBER_OUT_OF_RANGE"


class ConfigurationError(ParseError):
    """Command-line options are inconsistent."""

    def __init__(self, message: str, field: str | None = None) -> None:
        super().__init__(message=message, details={"field": field} if field else None)
        self.error_code = "INVALID_CONFIGURATION"


# =============================================================================
# Hypothesis Errors (exit 3)
# =============================================================================


class HypothesisError(PeriodScopeError):
    """The system does not satisfy a required mathematical hypothesis."""

    def __init__(
        self,
        message: str = "Hypothesis violated",
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(
            message=message,
            exit_code=3,
            error_code="HYPOTHESIS_VIOLATED",
            details=details,
        )


class CenterHypothesisViolated(HypothesisError):
    """Origin is not a nondegenerate minimum of V."""

    def __init__(self, reason: str, g0: float, dg0: float) -> None:
        super().__init__(
            message=f"Center hypothesis violated: {reason}",
            details={"g(0)": g0, "g'(0)": dg0},
        )
        self.error_code = "CENTER_HYPOTHESIS"


class NotConservative(HypothesisError):
    """f is not identically zero."""

    def __init__(self, x: float, value: float) -> None:
        super().__init__(
            message=f"System is not conservative: f({x:g}) = {value:g}",
            details={"x": x, "f": value},
        )
        self.error_code = "NOT_CONSERVATIVE"


class NotEven(HypothesisError):
    """Function is not even on the sample grid."""

    def __init__(self, x: float, mismatch: float) -> None:
        super().__init__(
            message=f"Function is not even: |f(x) - f(-x)| = {mismatch:g} at x = {x:g}",
            details={"x": x, "mismatch": mismatch},
        )
        self.error_code = "NOT_EVEN"


class NotPositive(HypothesisError):
    """Function is not positive on the sample grid."""

    def __init__(self, x: float, value: float) -> None:
        super().__init__(
            message=f"Function is not positive: f({x:g}) = {value:g}",
            details={"x": x, "value": value},
        )
        self.error_code = "NOT_POSITIVE"


# =============================================================================
# Numerical Errors (exit 4)
# =============================================================================


class NumericalError(PeriodScopeError):
    """A numerical procedure failed."""

    def __init__(
        self,
        message: str = "Numerical failure",
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(
            message=message,
            exit_code=4,
            error_code="NUMERICAL_FAILURE",
            details=details,
        )


class DomainError(NumericalError):
    """Expression evaluated outside its natural domain."""

    def __init__(self, subexpression: str, reason: str) -> None:
        super().__init__(
            message=f"Domain error in '{subexpression}': {reason}",
            details={"subexpression": subexpression, "reason": reason},
        )
        self.subexpression = subexpression
        self.error_code = "DOMAIN_ERROR"


class EnergyOutOfRange(NumericalError):
    """Energy outside the open admissible window (0, E_star)."""

    def __init__(self, energy: float, ceiling: float) -> None:
        super().__init__(
            message=f"Energy {energy:g} outside admissible window (0, {ceiling:g})",
            details={"energy": energy, "ceiling": ceiling},
        )
        self.error_code = "ENERGY_OUT_OF_RANGE"


class QuadratureNonConvergence(NumericalError):
    """Quadrature tolerance not met at maximum refinement."""

    def __init__(self, what: str, error: float | None = None) -> None:
        super().__init__(
            message=f"Quadrature did not converge: {what}",
            details={"what": what, "estimated_error": error},
        )
        self.error_code = "QUADRATURE_NON_CONVERGENCE"


class InversionFailure(NumericalError):
    """Branch inversion h^-1 did not converge."""

    def __init__(self, target: float, residual: float) -> None:
        super().__init__(
            message=f"Inversion of h did not converge at r = {target:g} "
            f"(residual {residual:g})",
            details={"target": target, "residual": residual},
        )
        self.error_code = "INVERSION_FAILURE"


class IntegrationFailure(NumericalError):
    """ODE integration failed or never returned to the section."""

    def __init__(self, reason: str) -> None:
        super().__init__(
            message=f"ODE integration failed: {reason}",
            details={"reason": reason},
        )
        self.error_code = "INTEGRATION_FAILURE"


class DegenerateCritical(NumericalError):
    """V' vanishes at a point other than the origin."""

    def __init__(self, x: float) -> None:
        super().__init__(
            message=f"V' vanishes at x = {x:g}; N is undefined there",
            details={"x": x},
        )
        self.error_code = "DEGENERATE_CRITICAL"


class GuardViolation(NumericalError):
    """W vanishes; the isochronicity constants C and D are undefined."""

    def __init__(self, locations: list[float]) -> None:
        super().__init__(
            message=f"W = 3P^2 - gP' vanishes at {len(locations)} sample(s)",
            details={"locations": locations},
        )
        self.locations = locations
        self.error_code = "GUARD_VIOLATION"


class RowFailures(NumericalError):
    """Some rows of a sweep failed; the table was written with those rows marked."""

    def __init__(self, failed: int, total: int) -> None:
        super().__init__(
            message=f"{failed} of {total} row(s) failed",
            details={"failed": failed, "total": total},
        )
        self.error_code = "ROW_FAILURES"
