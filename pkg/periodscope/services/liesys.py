"""Position-dependent-mass form of a Liénard II system.

For ẍ + f(x)ẋ² + g(x) = 0 the Hamiltonian is H = p²/(2μ) + V with

    F(x) = ∫₀ˣ f,    μ(x) = exp(2F(x)),    V(x) = ∫₀ˣ μ g.

F, V and ∫₀ˣ e^F are checkpointed quadratures; every derivative of μ and V
comes from Taylor jets of f and g, never from differentiating quadrature
output.
"""

import threading
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from periodscope.config import get_settings
from periodscope.core.exceptions import (
    CenterHypothesisViolated,
    ConfigurationError,
    EnergyOutOfRange,
    NumericalError,
)
from periodscope.core.logging import LoggerMixin
from periodscope.services.expr import Expr, Jet, SmoothFunction, as_function
from periodscope.services.expr import jet as jets
from periodscope.services.expr.jet import FloatArray
from periodscope.services.quadrature import CheckpointedAntiderivative
from periodscope.services.roots import refine_root


@dataclass(frozen=True)
class OrbitWindow:
    """Turning points x1* < 0 < x2* of the orbit at energy E."""

    energy: float
    x1: float
    x2: float
    ceiling: float

    @property
    def width(self) -> float:
        return self.x2 - self.x1


@dataclass(frozen=True)
class CeilingScan:
    """Result of the outward scan for the nearest critical points of V."""

    energy: float
    left_limit: float
    right_limit: float
    left_critical: bool
    right_critical: bool
    left_grid: FloatArray
    left_potential: FloatArray
    right_grid: FloatArray
    right_potential: FloatArray


@dataclass(frozen=True)
class OriginSeries:
    """Power series at x = 0 for quantities with removable singularities there.

    potential_ratio is V/x², h is sign(x)√V = x·√(V/x²) and u is V/V′².
    """

    potential: Jet
    sqrt_mass: Jet
    potential_ratio: Jet
    h: Jet
    u: Jet


class LienardSystem(LoggerMixin):
    """f, g and the derived F, μ, V with cached antiderivative evaluators.

    Immutable after construction apart from the internal caches, which are
    filled under locks and never change once written.
    """

    def __init__(
        self,
        f: SmoothFunction,
        g: SmoothFunction,
        domain: tuple[float, float],
        tol_q: float,
        *,
        panel_width: float,
        scan_points: int,
        energy_margin: float,
        series_order: int,
        origin_epsilon: float,
    ) -> None:
        self.f = f
        self.g = g
        self.domain = domain
        self.tol_q = tol_q
        self.scan_points = scan_points
        self.energy_margin = energy_margin
        self.series_order = series_order
        self.origin_epsilon = origin_epsilon
        self._lock = threading.Lock()
        self._ceiling: CeilingScan | None = None
        self._series: OriginSeries | None = None

        self._F = CheckpointedAntiderivative(
            self.f, domain, tol_q, panel_width=panel_width, label="F"
        )
        self._V = CheckpointedAntiderivative(
            self.potential_slope, domain, tol_q, panel_width=panel_width, label="V"
        )
        self._exp_F = CheckpointedAntiderivative(
            lambda s: np.exp(self._F(s)), domain, tol_q, panel_width=panel_width, label="int_exp_F"
        )

    def __repr__(self) -> str:
        return (
            f"LienardSystem(f={self.f.text!r}, g={self.g.text!r}, "
            f"domain=[{self.domain[0]:g}, {self.domain[1]:g}])"
        )

    # -------------------------------------------------------------------------
    # F and μ
    # -------------------------------------------------------------------------

    def F(self, x: ArrayLike) -> FloatArray:
        """F(x) = ∫₀ˣ f."""
        return self._F(x)

    def F_jet(self, x: ArrayLike, order: int) -> Jet:
        """Jet of F: value from quadrature, higher coefficients from the jet of f."""
        value = self._F(x)
        if order == 0:
            return Jet.constant(value, x, 0)
        return self.f.jet(x, order - 1).integrate(value)

    def mass(self, x: ArrayLike) -> FloatArray:
        """μ(x) = exp(2F(x)); +inf where it overflows."""
        with np.errstate(over="ignore"):
            return np.exp(2.0 * self._F(x))

    def mass_jet(self, x: ArrayLike, order: int) -> Jet:
        """Jet of μ = exp(2F); μ′ = 2fμ, μ″ = (4f² + 2f′)μ follow from the recurrences."""
        return jets.exp(2.0 * self.F_jet(x, order))

    def sqrt_mass_jet(self, x: ArrayLike, order: int) -> Jet:
        """Jet of √μ = exp(F): (√μ)′ = √μ f and (√μ)″ = √μ (f² + f′)."""
        return jets.exp(self.F_jet(x, order))

    def exp_f_integral(self, x: ArrayLike) -> FloatArray:
        """∫₀ˣ e^F."""
        return self._exp_F(x)

    # -------------------------------------------------------------------------
    # V
    # -------------------------------------------------------------------------

    def potential_slope(self, x: ArrayLike) -> FloatArray:
        """V′(x) = μ(x) g(x)."""
        return self.mass(x) * self.g(x)

    def potential(self, x: ArrayLike) -> FloatArray:
        """V(x) by checkpointed quadrature of μg."""
        return self._V(x)

    def potential_segment(self, a: ArrayLike, b: ArrayLike) -> FloatArray:
        """V(b) − V(a) for short segments, without cancellation."""
        return self._V.segment(a, b)

    def potential_jet(self, x: ArrayLike, order: int) -> Jet:
        """Jet of V: value from quadrature, V′ = μg and higher from jets.

        V″ = μ(2fg + g′) and V‴ = μ(4f²g + 2f′g + 4fg′ + g″) are what the
        jet product produces.
        """
        value = self._V(x)
        if order == 0:
            return Jet.constant(value, x, 0)
        slope = self.mass_jet(x, order - 1) * self.g.jet(x, order - 1)
        return slope.integrate(value)

    # -------------------------------------------------------------------------
    # Energy window
    # -------------------------------------------------------------------------

    def energy_ceiling(self) -> float:
        """E_star: the supremum of energies whose orbit stays inside the scanned well."""
        return self.ceiling_scan().energy

    @staticmethod
    def _finite_prefix(fn: Callable[[FloatArray], FloatArray], grid: FloatArray) -> FloatArray:
        """fn on an outward grid, cut before the first point where it is undefined or infinite."""
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                values = np.asarray(fn(grid), dtype=np.float64) * np.ones_like(grid)
        except NumericalError:
            collected: list[float] = []
            for s in grid:
                try:
                    with np.errstate(over="ignore", invalid="ignore"):
                        collected.append(float(fn(s)))
                except NumericalError:
                    break
            values = np.array(collected, dtype=np.float64)
        bad = np.flatnonzero(~np.isfinite(values))
        return values if bad.size == 0 else values[: int(bad[0])]

    def _scan_side(self, direction: float) -> tuple[float, bool, FloatArray, FloatArray]:
        edge = self.domain[1] if direction > 0 else self.domain[0]
        grid = np.linspace(0.0, edge, self.scan_points + 1)[1:]
        slope = self._finite_prefix(self.potential_slope, grid)
        if slope.size < grid.size:
            # stay one grid step inside the region where μg is finite
            grid = grid[: max(slope.size - 1, 0)]
            slope = slope[: grid.size]
            self.logger.warning(
                "energy_scan_stopped",
                reason="potential slope not finite",
                limit=float(grid[-1]) if grid.size else 0.0,
            )
        bad = np.flatnonzero(slope * direction <= 0.0)
        if bad.size:
            i = int(bad[0])
            if i == 0:
                critical = float(grid[0])
            else:
                critical = refine_root(
                    lambda s: float(self.potential_slope(s)), float(grid[i - 1]), float(grid[i])
                )
            grid = np.append(grid[:i], critical)
        potential = self._finite_prefix(self.potential, grid)
        found_critical = bad.size > 0 and potential.size == grid.size
        if potential.size < grid.size:
            self.logger.warning(
                "energy_scan_stopped",
                reason="potential not finite",
                limit=float(grid[potential.size - 1]) if potential.size else 0.0,
            )
        grid = grid[: potential.size]
        if grid.size == 0:
            return 0.0, False, np.zeros(1), np.zeros(1)
        return float(grid[-1]), found_critical, grid, potential

    def ceiling_scan(self) -> CeilingScan:
        if self._ceiling is not None:
            return self._ceiling
        with self._lock:
            if self._ceiling is None:
                right, right_crit, right_grid, right_v = self._scan_side(1.0)
                left, left_crit, left_grid, left_v = self._scan_side(-1.0)
                top = min(float(left_v[-1]), float(right_v[-1]))
                energy = top * (1.0 - self.energy_margin)
                self._ceiling = CeilingScan(
                    energy=energy,
                    left_limit=left,
                    right_limit=right,
                    left_critical=left_crit,
                    right_critical=right_crit,
                    left_grid=left_grid,
                    left_potential=left_v,
                    right_grid=right_grid,
                    right_potential=right_v,
                )
                self.logger.info(
                    "energy_ceiling_found",
                    energy_ceiling=energy,
                    left_limit=left,
                    right_limit=right,
                    left_critical=left_crit,
                    right_critical=right_crit,
                )
            return self._ceiling

    def turning_points(self, energy: float) -> OrbitWindow:
        """Turning points x1* < 0 < x2* with V = E.

        Raises:
            EnergyOutOfRange: E is not in the open window (0, E_star)
        """
        scan = self.ceiling_scan()
        if not 0.0 < energy < scan.energy:
            raise EnergyOutOfRange(energy, scan.energy)

        def crossing(grid: FloatArray, values: FloatArray) -> float:
            i = int(np.flatnonzero(values >= energy)[0])
            lo = grid[i - 1] if i > 0 else 0.0
            return refine_root(
                lambda s: float(self.potential(s)) - energy, float(lo), float(grid[i])
            )

        x2 = crossing(scan.right_grid, scan.right_potential)
        x1 = crossing(scan.left_grid, scan.left_potential)
        self.logger.debug("turning_points_found", energy=energy, x1=x1, x2=x2)
        return OrbitWindow(energy=energy, x1=x1, x2=x2, ceiling=scan.energy)

    # -------------------------------------------------------------------------
    # Origin expansions and the branch function h
    # -------------------------------------------------------------------------

    def origin_series(self) -> OriginSeries:
        """Taylor series at 0 of V/x², h and u = V/V′²."""
        if self._series is not None:
            return self._series
        with self._lock:
            if self._series is None:
                self._series = self._build_origin_series()
            return self._series

    def _build_origin_series(self) -> OriginSeries:
        order = self.series_order
        origin = np.float64(0.0)
        v = self.potential_jet(origin, order + 2)
        c = v.coefficients
        ratio = Jet(origin, c[2:])
        slope_ratio = Jet(origin, c[2:] * np.arange(2, order + 3))
        u = ratio / (slope_ratio * slope_ratio)
        s = self.sqrt_mass_jet(origin, order + 1)
        root = jets.sqrt(ratio)
        h = Jet(origin, np.concatenate([[0.0], root.coefficients]))
        return OriginSeries(potential=v, sqrt_mass=s, potential_ratio=ratio, h=h, u=u)

    def branch_function(self, x: ArrayLike) -> tuple[FloatArray, FloatArray, FloatArray]:
        """h = sign(x)√V with h′ and h″; origin series for |x| < ε₀."""
        xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
        h = np.empty(xs.shape)
        dh = np.empty(xs.shape)
        d2h = np.empty(xs.shape)
        near = np.abs(xs) < self.origin_epsilon
        if np.any(near):
            series = self.origin_series().h
            xn = xs[near]
            h[near] = series.evaluate(xn)
            first = series.differentiate()
            dh[near] = first.evaluate(xn)
            d2h[near] = first.differentiate().evaluate(xn)
        far = ~near
        if np.any(far):
            xf = xs[far]
            root = jets.sqrt(self.potential_jet(xf, 2)) * np.sign(xf)
            h[far] = root.coefficients[0]
            dh[far] = root.coefficients[1]
            d2h[far] = 2.0 * root.coefficients[2]
        shape = np.shape(x)
        return h.reshape(shape), dh.reshape(shape), d2h.reshape(shape)


def build_system(
    f: "Expr | SmoothFunction | str",
    g: "Expr | SmoothFunction | str",
    domain: tuple[float, float] | None = None,
    tol_q: float | None = None,
) -> LienardSystem:
    """Build and validate the position-dependent-mass system.

    Args:
        f: Coefficient of ẋ²
        g: Restoring term
        domain: Interval containing 0; settings default when None
        tol_q: Absolute quadrature tolerance; settings default when None

    Returns:
        A validated system

    Raises:
        ConfigurationError: Domain does not contain 0 in its interior
        CenterHypothesisViolated: g(0) ≠ 0, or V″(0) = g′(0) ≤ 0
        DomainError: f or g undefined at 0
    """
    settings = get_settings()
    lo, hi = domain if domain is not None else (settings.domain_lo, settings.domain_hi)
    if not lo < 0.0 < hi:
        raise ConfigurationError(
            f"Domain [{lo:g}, {hi:g}] must contain 0 in its interior", "domain"
        )

    g_fn = as_function(g)
    g_jet = g_fn.jet(np.float64(0.0), 1)
    g0, dg0 = float(g_jet.coefficients[0]), float(g_jet.coefficients[1])
    if abs(g0) > 1e-12:
        raise CenterHypothesisViolated("g(0) != 0, the origin is not an equilibrium", g0, dg0)
    if dg0 <= 0.0:
        raise CenterHypothesisViolated("V''(0) = g'(0) <= 0, no nondegenerate minimum", g0, dg0)

    system = LienardSystem(
        as_function(f),
        g_fn,
        (float(lo), float(hi)),
        tol_q if tol_q is not None else settings.tol_quadrature,
        panel_width=settings.panel_width,
        scan_points=settings.scan_points,
        energy_margin=settings.energy_margin,
        series_order=settings.series_order,
        origin_epsilon=settings.origin_epsilon,
    )
    # f must be smooth at 0; raises DomainError otherwise
    system.f.jet(np.float64(0.0), 1)
    system.logger.info("system_built", f=system.f.text, g=system.g.text, domain=[lo, hi])
    return system
