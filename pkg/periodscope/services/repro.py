"""Closed-form reproductions of two worked families.

Rational-mass family
    f = −3x/(1 + x²), g = x + a₃x³, so μ = (1 + x²)⁻³ and
    V = x²(1 + (1 + a₃)x²/2) / (2(1 + x²)²). The sign of N on K(E) reduces to
    the sign of a degree-10 even polynomial with coefficients C₀…C₅ that are
    all zero at a₃ = 1, where the system is isochronous.

Even-f family
    For an even positive f, ẍ − (f′/f)ẋ² + fU = 0 with U = ∫₀ˣ 1/f is the
    unit harmonic oscillator in ξ = U(x), hence T ≡ 2π.
"""

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import structlog
from numpy.typing import ArrayLike

from periodscope.config import get_settings
from periodscope.core.exceptions import DomainError, NotEven, NotPositive, QuadratureNonConvergence
from periodscope.services.expr import Expr, Jet, SmoothFunction, as_function
from periodscope.services.expr.jet import FloatArray
from periodscope.services.liesys import LienardSystem, build_system
from periodscope.services.quadrature import CheckpointedAntiderivative

logger = structlog.get_logger(__name__)

KM_F = "-3*x/(1+x^2)"
KM_GRID = (0.05, 2.5, 64)
POLE_GUARD = 1e-6


# =============================================================================
# Rational-mass family
# =============================================================================


@dataclass(frozen=True)
class KMFamily:
    """f = −3x/(1 + x²), g = x + a₃x³ (mass exponent p = 3/2, one odd term)."""

    a3: float

    @property
    def f_text(self) -> str:
        return KM_F

    @property
    def g_text(self) -> str:
        return f"x + {self.a3!r}*x^3"

    @property
    def b(self) -> float:
        """Coefficient (1 + a₃)/2 of x² in the numerator of V."""
        return 0.5 * (1.0 + self.a3)


@dataclass(frozen=True)
class KMClosedForms:
    potential: FloatArray
    potential_slope: FloatArray
    u: FloatArray
    k: FloatArray
    m_over_u: FloatArray


def _k_and_slope(family: KMFamily, x: FloatArray) -> tuple[FloatArray, FloatArray]:
    """K = u′/(xu) and K′ = 2x dK/d(x²)."""
    a, b = family.a3, family.b
    big_x = x * x
    k = 8.0 / (1.0 + big_x) + (1.0 + a) / (1.0 + b * big_x) - 4.0 * a / (1.0 + a * big_x)
    dk_dx2 = (
        -8.0 / (1.0 + big_x) ** 2
        - (1.0 + a) * b / (1.0 + b * big_x) ** 2
        + 4.0 * a * a / (1.0 + a * big_x) ** 2
    )
    return k, 2.0 * x * dk_dx2


def _check_poles(family: KMFamily, x: FloatArray) -> None:
    if np.any(np.abs(1.0 + family.a3 * x * x) < POLE_GUARD):
        raise DomainError(f"1 + {family.a3!r}*x^2", "pole of K")


def km_closed_forms(a3: float, x: ArrayLike) -> KMClosedForms:
    """V, V′, u = V/V′², K and M/u in closed form.

    M/u = K(1 + 3xf) + x²K² + xK′ + 2(f² + f′) with f² + f′ = 3(4x² − 1)/(1 + x²)².

    Raises:
        DomainError: 1 + a₃x² vanishes at a sample
    """
    family = KMFamily(a3)
    xs = np.asarray(x, dtype=np.float64)
    _check_poles(family, xs)
    big_x = xs * xs
    potential = big_x * (1.0 + family.b * big_x) / (2.0 * (1.0 + big_x) ** 2)
    slope = xs * (1.0 + a3 * big_x) / (1.0 + big_x) ** 3
    u = (1.0 + big_x) ** 4 * (1.0 + family.b * big_x) / (2.0 * (1.0 + a3 * big_x) ** 2)
    k, dk = _k_and_slope(family, xs)
    f = -3.0 * xs / (1.0 + big_x)
    f2_plus_df = 3.0 * (4.0 * big_x - 1.0) / (1.0 + big_x) ** 2
    m_over_u = k * (1.0 + 3.0 * xs * f) + big_x * k * k + xs * dk + 2.0 * f2_plus_df
    return KMClosedForms(
        potential=potential, potential_slope=slope, u=u, k=k, m_over_u=m_over_u
    )


def km_u_derivatives(a3: float, x: ArrayLike) -> tuple[FloatArray, FloatArray, FloatArray]:
    """u, u′ = xuK and u″ = u(K + x²K² + xK′)."""
    xs = np.asarray(x, dtype=np.float64)
    forms = km_closed_forms(a3, xs)
    _, dk = _k_and_slope(KMFamily(a3), xs)
    u, k = forms.u, forms.k
    return u, xs * u * k, u * (k + xs * xs * k * k + xs * dk)


def km_coefficients(a3: float) -> tuple[float, float, float, float, float, float]:
    """C₀…C₅ of the monotonicity polynomial Σ Cᵢ x²ⁱ."""
    a = a3
    c0 = 1.5 * (1.0 - a)
    c1 = 0.25 * (a - 1.0) * (21.0 * a - 39.0)
    c2 = 1.5 * (a - 1.0) * (3.0 * a * a + a - 7.0)
    c3 = 0.75 * (a + 1.0) * (a - 1.0) * (a * a + 2.0 * a - 4.0)
    return (c0, c1, c2, c3, 0.0, 0.0)


def km_polynomial(a3: float, x: ArrayLike) -> FloatArray:
    """Σ Cᵢ x²ⁱ."""
    big_x = np.asarray(x, dtype=np.float64) ** 2
    return np.polynomial.polynomial.polyval(big_x, km_coefficients(a3))


@dataclass(frozen=True)
class PolynomialCheck:
    """Proportionality of M/u times the squared denominators to the C polynomial.

    prefactor is None when the polynomial vanishes identically (a₃ = 1); the
    discrepancy is then max|lhs|.
    """

    a3: float
    prefactor: float | None
    discrepancy: float
    poly_min: float
    poly_max: float
    sign: int
    points: int


def km_grid(a3: float) -> FloatArray:
    """Default validation grid, dropping points within the pole guard of K."""
    lo, hi, n = KM_GRID
    grid = np.linspace(lo, hi, n)
    return grid[np.abs(1.0 + a3 * grid * grid) >= POLE_GUARD]


def km_polynomial_check(a3: float, grid: ArrayLike | None = None) -> PolynomialCheck:
    """Fit lhs = c·Σ Cᵢ x²ⁱ with lhs = (M/u)(1 + x²)²(1 + a₃x²)²(1 + (1 + a₃)x²/2)².

    Raises:
        DomainError: the grid hits a pole of K
    """
    xs = km_grid(a3) if grid is None else np.asarray(grid, dtype=np.float64)
    family = KMFamily(a3)
    big_x = xs * xs
    forms = km_closed_forms(a3, xs)
    lhs = (
        forms.m_over_u
        * (1.0 + big_x) ** 2
        * (1.0 + a3 * big_x) ** 2
        * (1.0 + family.b * big_x) ** 2
    )
    rhs = km_polynomial(a3, xs)

    norm = float(np.dot(rhs, rhs))
    if norm == 0.0:
        prefactor = None
        discrepancy = float(np.max(np.abs(lhs)))
    else:
        prefactor = float(np.dot(lhs, rhs) / norm)
        discrepancy = float(np.max(np.abs(lhs - prefactor * rhs)))

    if np.all(rhs > 0.0):
        sign = 1
    elif np.all(rhs < 0.0):
        sign = -1
    else:
        sign = 0
    logger.debug(
        "km_polynomial_checked", a3=a3, prefactor=prefactor, discrepancy=discrepancy, sign=sign
    )
    return PolynomialCheck(
        a3=a3,
        prefactor=prefactor,
        discrepancy=discrepancy,
        poly_min=float(rhs.min()),
        poly_max=float(rhs.max()),
        sign=sign,
        points=int(xs.size),
    )


def km_system(a3: float, domain: tuple[float, float] | None = None) -> LienardSystem:
    """The rational-mass system for a given a₃."""
    family = KMFamily(a3)
    return build_system(family.f_text, family.g_text, domain)


def period_trend(periods: Sequence[float], strict: float = 1e-7, flat: float = 1e-5) -> str:
    """Ordering of T over increasing energies.

    "increasing" / "decreasing" when every step exceeds ``strict`` relative
    separation, "constant" when the relative spread is within ``flat``,
    "mixed" otherwise.
    """
    values = np.asarray(periods, dtype=np.float64)
    if values.size > 1:
        steps = np.diff(values) / np.abs(values[:-1])
        if np.all(steps > strict):
            return "increasing"
        if np.all(steps < -strict):
            return "decreasing"
    spread = (values.max() - values.min()) / np.abs(values).max()
    return "constant" if spread <= flat else "mixed"


# =============================================================================
# Even-f family
# =============================================================================


class LogDerivativeFunction:
    """x ↦ −f′(x)/f(x)."""

    def __init__(self, f: SmoothFunction) -> None:
        self.base = f

    @property
    def text(self) -> str:
        return f"-d/dx ln({self.base.text})"

    def __call__(self, x: ArrayLike) -> FloatArray:
        return self.jet(x, 0).value

    def jet(self, x: ArrayLike, order: int) -> Jet:
        u = self.base.jet(x, order + 1)
        return -(u.differentiate() / u.truncate(order))


class ProductWithAntiderivative:
    """x ↦ f(x)·U(x) with U = ∫₀ˣ 1/f by checkpointed quadrature."""

    def __init__(self, f: SmoothFunction, antiderivative: CheckpointedAntiderivative) -> None:
        self.base = f
        self.antiderivative = antiderivative

    @property
    def text(self) -> str:
        return f"({self.base.text})*int_0^x 1/({self.base.text})"

    def __call__(self, x: ArrayLike) -> FloatArray:
        return np.asarray(self.base(x)) * self.antiderivative(x)

    def jet(self, x: ArrayLike, order: int) -> Jet:
        xs = np.asarray(x, dtype=np.float64)
        value = self.antiderivative(xs)
        if order == 0:
            return Jet.constant(np.asarray(self.base(xs)) * value, xs, 0)
        u_jet = (1.0 / self.base.jet(xs, order - 1)).integrate(value)
        return self.base.jet(xs, order) * u_jet


def _check_even_positive(f: SmoothFunction, domain: tuple[float, float], points: int = 257) -> None:
    lo, hi = domain
    half = min(-lo, hi)
    grid = np.linspace(0.0, half, points)
    left, right = np.asarray(f(-grid)), np.asarray(f(grid))
    mismatch = np.abs(left - right)
    bad = np.flatnonzero(mismatch > 1e-10 * np.maximum(1.0, np.abs(right)))
    if bad.size:
        i = int(bad[0])
        raise NotEven(float(grid[i]), float(mismatch[i]))
    full = np.linspace(lo, hi, 2 * points - 1)
    values = np.asarray(f(full)) * np.ones_like(full)
    bad = np.flatnonzero(values <= 0.0)
    if bad.size:
        i = int(bad[0])
        raise NotPositive(float(full[i]), float(values[i]))


def sect3_family(
    fexpr: "Expr | SmoothFunction | str", domain: tuple[float, float] | None = None
) -> LienardSystem:
    """Build ẍ − (f′/f)ẋ² + fU = 0 for an even positive f.

    The system's μ and V are checked against (f(0)/f)² and f(0)²U²/2.

    Raises:
        NotEven: f(x) ≠ f(−x) on a grid
        NotPositive: f ≤ 0 somewhere in the domain
    """
    settings = get_settings()
    lo, hi = domain if domain is not None else (settings.domain_lo, settings.domain_hi)
    f = as_function(fexpr)
    _check_even_positive(f, (lo, hi))

    antiderivative = CheckpointedAntiderivative(
        lambda s: 1.0 / np.asarray(f(s)),
        (lo, hi),
        settings.tol_quadrature,
        panel_width=settings.panel_width,
        label="U",
    )
    system = build_system(
        LogDerivativeFunction(f), ProductWithAntiderivative(f, antiderivative), (lo, hi)
    )

    grid = np.linspace(0.5 * lo, 0.5 * hi, 17)
    f0 = float(np.asarray(f(np.float64(0.0))))
    fx = np.asarray(f(grid))
    u = antiderivative(grid)
    expected = {
        "mass": ((f0 / fx) ** 2, system.mass(grid)),
        "potential": (0.5 * f0 * f0 * u * u, system.potential(grid)),
    }
    tol = 100.0 * system.tol_q
    for name, (closed, computed) in expected.items():
        mismatch = np.abs(closed - computed) / np.maximum(1.0, np.abs(closed))
        if np.any(mismatch > tol):
            raise QuadratureNonConvergence(f"{name} of the even-f family", float(mismatch.max()))
    logger.info("sect3_family_built", f=f.text, domain=[lo, hi])
    return system
