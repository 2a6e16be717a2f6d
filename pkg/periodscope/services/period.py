"""Period function T(E) and its energy derivative.

Three independent evaluations of T:

* ``x``: T = √2 ∫ √μ / √(E − V) dx with the endpoint singularities removed
  by x = x* ∓ t² near each turning point;
* ``θ``: with r = h(x) = sign(x)√V and r = √E sin θ,
  T = √2 ∫ √μ(x) / h′(x) dθ over (−π/2, π/2), a regular integrand;
* ``ode``: return time of Hamilton's equations to the section p = 0, x > 0.

dT/dE comes from the integrated-by-parts form (1/√2) ∫ G cos²θ dθ with
G = 2N/h′, from the sine form −(1/√(2E)) ∫ S sin θ dθ, or from a centred
finite difference of the θ-quadrature.
"""

from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from itertools import combinations

import numpy as np
import structlog
from numpy.typing import ArrayLike
from scipy.integrate import quad, solve_ivp

from periodscope.config import get_settings
from periodscope.core.exceptions import (
    IntegrationFailure,
    InversionFailure,
    QuadratureNonConvergence,
)
from periodscope.services.criteria import n_function
from periodscope.services.expr.jet import FloatArray
from periodscope.services.liesys import LienardSystem, OrbitWindow
from periodscope.services.quadrature import QuadratureResult, adaptive_gauss_legendre
from periodscope.services.roots import newton_bisection

logger = structlog.get_logger(__name__)

SQRT2 = float(np.sqrt(2.0))


class PeriodMethod(str, Enum):
    """Provenance of a PeriodSample."""

    X_QUADRATURE = "x-quadrature"
    THETA_QUADRATURE = "theta-quadrature"
    ODE_RETURN = "ode-return"
    DERIVATIVE_QUADRATURE = "derivative-quadrature"
    FINITE_DIFFERENCE = "finite-difference"
    SINE_QUADRATURE = "sine-quadrature"


@dataclass(frozen=True)
class PeriodSample:
    """T(E), optionally dT/dE, with the method and its self-reported error."""

    energy: float
    period: float
    derivative: float | None
    method: PeriodMethod
    est_error: float


# =============================================================================
# h⁻¹
# =============================================================================


class BranchInverter:
    """Inverse of the increasing branch function h = sign(x)√V on [x1*, x2*].

    Safeguarded Newton from a secant guess on [0, x2*] for r > 0 and on
    [x1*, 0] for r < 0. Targets at or beyond ±√E map to the turning points.
    """

    def __init__(
        self, system: LienardSystem, window: OrbitWindow, tol: float | None = None
    ) -> None:
        self.system = system
        self.window = window
        self.tol = tol if tol is not None else get_settings().inversion_tol
        self._root_e = float(np.sqrt(window.energy))

    def _h(self, x: FloatArray) -> tuple[FloatArray, FloatArray]:
        h, dh, _ = self.system.branch_function(x)
        return h, dh

    def __call__(self, r: ArrayLike) -> FloatArray:
        targets = np.asarray(r, dtype=np.float64)
        flat = targets.ravel()
        x = np.zeros(flat.shape)
        top, bottom = flat >= self._root_e, flat <= -self._root_e
        x[top] = self.window.x2
        x[bottom] = self.window.x1

        sides = (
            ((flat > 0.0) & ~top, 0.0, self.window.x2, self.window.x2 / self._root_e),
            ((flat < 0.0) & ~bottom, self.window.x1, 0.0, -self.window.x1 / self._root_e),
        )
        for mask, lo, hi, secant in sides:
            if not np.any(mask):
                continue
            rs = flat[mask]
            result = newton_bisection(
                self._h,
                rs,
                lo,
                hi,
                secant * rs,
                self.tol * np.maximum(1.0, np.abs(rs)),
            )
            if not np.all(result.converged):
                worst = int(np.argmax(np.where(result.converged, 0.0, np.abs(result.residual))))
                raise InversionFailure(float(rs[worst]), float(result.residual[worst]))
            x[mask] = result.x
        return x.reshape(targets.shape)


def _theta_quadrature(
    system: LienardSystem,
    window: OrbitWindow,
    integrand: Callable[[FloatArray, FloatArray], FloatArray],
    label: str,
) -> QuadratureResult:
    """∫ integrand(θ, h⁻¹(√E sin θ)) dθ over (−π/2, π/2)."""
    settings = get_settings()
    inverter = BranchInverter(system, window)
    root_e = np.sqrt(window.energy)

    def fn(theta: FloatArray) -> FloatArray:
        return integrand(theta, inverter(root_e * np.sin(theta)))

    return adaptive_gauss_legendre(
        fn,
        -0.5 * np.pi,
        0.5 * np.pi,
        order=settings.gl_order,
        abs_tol=settings.quad_abs_tol,
        rel_tol=settings.quad_rel_tol,
        max_depth=settings.max_panel_depth,
        label=label,
    )


def _record(sample: PeriodSample) -> PeriodSample:
    logger.info(
        "period_computed",
        method=sample.method.value,
        energy=sample.energy,
        period=sample.period,
        derivative=sample.derivative,
        est_error=sample.est_error,
    )
    return sample


# =============================================================================
# T(E)
# =============================================================================


def period_theta_quadrature(system: LienardSystem, energy: float) -> PeriodSample:
    """T(E) = √2 ∫ √μ(x)/h′(x) dθ with x = h⁻¹(√E sin θ).

    Near x = 0 h′ comes from the origin series, so √μ/h′ tends to
    √(2μ(0)/V″(0)) without a 0/0.

    Raises:
        EnergyOutOfRange: E is not in (0, E_star)
        InversionFailure: h⁻¹ did not converge at some node
    """
    window = system.turning_points(energy)

    def integrand(_theta: FloatArray, x: FloatArray) -> FloatArray:
        dh = system.branch_function(x)[1]
        return SQRT2 * np.exp(system.F(x)) / dh

    result = _theta_quadrature(system, window, integrand, f"T_theta(E={energy:g})")
    return _record(
        PeriodSample(
            energy=energy,
            period=result.value,
            derivative=None,
            method=PeriodMethod.THETA_QUADRATURE,
            est_error=result.error,
        )
    )


def _half_orbit(
    system: LienardSystem, energy: float, turning: float, middle: float
) -> tuple[float, float]:
    """∫ √μ/√(E − V) dx between the midpoint and one turning point, x = x* ∓ t²."""
    settings = get_settings()
    span = abs(turning - middle)
    toward = -1.0 if turning > middle else 1.0
    near = min(0.1, 0.25 * span)
    edge_slope = abs(float(system.potential_slope(turning)))
    edge_mass = float(np.exp(system.F(turning)))

    def integrand(t: float) -> float:
        d = t * t
        if d == 0.0:
            return 2.0 * edge_mass / np.sqrt(edge_slope)
        x = turning + toward * d
        if d <= near:
            gap = float(system.potential_segment(x, turning))
        else:
            gap = energy - float(system.potential(x))
        if gap <= 0.0:
            return 0.0
        return float(2.0 * t * np.exp(system.F(x)) / np.sqrt(gap))

    out = quad(
        integrand,
        0.0,
        np.sqrt(span),
        full_output=1,
        epsabs=settings.quad_abs_tol,
        epsrel=settings.quad_rel_tol,
        limit=200,
    )
    if len(out) > 3:
        raise QuadratureNonConvergence(f"T_x(E={energy:g}) near x = {turning:g}: {out[3]}", out[1])
    return float(out[0]), float(out[1])


def period_x_quadrature(system: LienardSystem, energy: float) -> PeriodSample:
    """T(E) = √2 ∫ √μ dx/√(E − V) over [x1*, x2*].

    Split at the midpoint; near each turning point E − V is integrated
    directly from V′ over the short gap instead of subtracting two nearly
    equal values.

    Raises:
        EnergyOutOfRange: E is not in (0, E_star)
        QuadratureNonConvergence: Tolerance not met within the subdivision limit
    """
    window = system.turning_points(energy)
    middle = 0.5 * (window.x1 + window.x2)
    left, left_err = _half_orbit(system, energy, window.x1, middle)
    right, right_err = _half_orbit(system, energy, window.x2, middle)
    return _record(
        PeriodSample(
            energy=energy,
            period=SQRT2 * (left + right),
            derivative=None,
            method=PeriodMethod.X_QUADRATURE,
            est_error=SQRT2 * (left_err + right_err),
        )
    )


class _MomentumCrossing:
    """Event p = 0 crossed in a given direction; solve_ivp reads the attributes."""

    terminal = True

    def __init__(self, direction: float) -> None:
        self.direction = direction

    def __call__(self, _t: float, y: FloatArray) -> float:
        return float(y[1])


def period_ode_return(system: LienardSystem, energy: float) -> PeriodSample:
    """Return time of ẋ = p/μ, ṗ = f p²/μ − μg to the section p = 0, x > 0.

    Starts at (x2*, 0); the first stage stops at the upward crossing near x1*,
    the second at the downward crossing back near x2*. est_error is the
    largest energy drift |H − E| along both stages.

    Raises:
        EnergyOutOfRange: E is not in (0, E_star)
        IntegrationFailure: Integrator failure or no return before t_max
    """
    settings = get_settings()
    window = system.turning_points(energy)
    dg0 = float(system.g.jet(np.float64(0.0), 1).coefficients[1])
    t_max = 100.0 * 2.0 * np.pi / np.sqrt(dg0)

    def rhs(_t: float, y: FloatArray) -> FloatArray:
        x, p = y
        mu = float(system.mass(x))
        return np.array([p / mu, float(system.f(x)) * p * p / mu - mu * float(system.g(x))])

    t_total = 0.0
    state = np.array([window.x2, 0.0])
    drift = 0.0
    for stage, direction in enumerate((1.0, -1.0), start=1):
        sol = solve_ivp(
            rhs,
            (0.0, t_max),
            state,
            method="DOP853",
            rtol=settings.ode_rtol,
            atol=settings.ode_atol,
            events=_MomentumCrossing(direction),
        )
        if sol.status == -1:
            raise IntegrationFailure(f"stage {stage}: {sol.message}")
        if sol.t_events[0].size == 0:
            raise IntegrationFailure(f"stage {stage}: no return to p = 0 before t = {t_max:g}")
        xs, ps = sol.y
        hamiltonian = ps**2 / (2.0 * system.mass(xs)) + system.potential(xs)
        drift = max(drift, float(np.max(np.abs(hamiltonian - energy))))
        t_total += float(sol.t_events[0][0])
        state = np.asarray(sol.y_events[0][0], dtype=np.float64)

    logger.debug("ode_return_finished", energy=energy, x_end=float(state[0]), drift=drift)
    return _record(
        PeriodSample(
            energy=energy,
            period=t_total,
            derivative=None,
            method=PeriodMethod.ODE_RETURN,
            est_error=drift,
        )
    )


# =============================================================================
# dT/dE
# =============================================================================


def s_function(system: LienardSystem, x: ArrayLike) -> FloatArray:
    """S = [h″μ − ½μ′h′]/(h′³√μ) = √μ h″/h′³ − (√μ)′/h′²."""
    xs = np.asarray(x, dtype=np.float64)
    _, dh, d2h = system.branch_function(xs)
    s = system.sqrt_mass_jet(xs, 1).coefficients
    return s[0] * d2h / dh**3 - s[1] / dh**2


def g_function(system: LienardSystem, x: ArrayLike) -> FloatArray:
    """G = (2/h′)N, regular through the origin."""
    xs = np.asarray(x, dtype=np.float64)
    return 2.0 * n_function(system, xs) / system.branch_function(xs)[1]


def period_derivative(system: LienardSystem, energy: float) -> PeriodSample:
    """dT/dE = (1/√2) ∫ G(x) cos²θ dθ, with T from the θ-quadrature.

    Raises:
        EnergyOutOfRange: E is not in (0, E_star)
        InversionFailure: h⁻¹ did not converge at some node
    """
    window = system.turning_points(energy)

    def integrand(theta: FloatArray, x: FloatArray) -> FloatArray:
        return g_function(system, x) * np.cos(theta) ** 2 / SQRT2

    result = _theta_quadrature(system, window, integrand, f"dT_dE(E={energy:g})")
    period = period_theta_quadrature(system, energy)
    return _record(
        PeriodSample(
            energy=energy,
            period=period.period,
            derivative=result.value,
            method=PeriodMethod.DERIVATIVE_QUADRATURE,
            est_error=result.error,
        )
    )


def period_derivative_sine_form(system: LienardSystem, energy: float) -> PeriodSample:
    """dT/dE = −(1/√(2E)) ∫ S(x) sin θ dθ, before integration by parts."""
    window = system.turning_points(energy)
    factor = -1.0 / np.sqrt(2.0 * energy)

    def integrand(theta: FloatArray, x: FloatArray) -> FloatArray:
        return factor * s_function(system, x) * np.sin(theta)

    result = _theta_quadrature(system, window, integrand, f"dT_dE_sine(E={energy:g})")
    period = period_theta_quadrature(system, energy)
    return _record(
        PeriodSample(
            energy=energy,
            period=period.period,
            derivative=result.value,
            method=PeriodMethod.SINE_QUADRATURE,
            est_error=result.error,
        )
    )


def period_derivative_finite_difference(
    system: LienardSystem, energy: float, relative_step: float = 1e-4
) -> PeriodSample:
    """(T(E + δ) − T(E − δ))/(2δ) with δ = relative_step·E, T by θ-quadrature."""
    delta = relative_step * energy
    upper = period_theta_quadrature(system, energy + delta)
    lower = period_theta_quadrature(system, energy - delta)
    centre = period_theta_quadrature(system, energy)
    return _record(
        PeriodSample(
            energy=energy,
            period=centre.period,
            derivative=(upper.period - lower.period) / (2.0 * delta),
            method=PeriodMethod.FINITE_DIFFERENCE,
            est_error=(upper.est_error + lower.est_error) / (2.0 * delta),
        )
    )


# =============================================================================
# Sweeps
# =============================================================================


@dataclass(frozen=True)
class PeriodComparison:
    """The three period evaluations and dT/dE at one energy."""

    energy: float
    x_quadrature: PeriodSample
    theta_quadrature: PeriodSample
    ode_return: PeriodSample
    derivative: PeriodSample

    @property
    def max_pairwise_rel_diff(self) -> float:
        periods = (self.x_quadrature.period, self.theta_quadrature.period, self.ode_return.period)
        return max(abs(a - b) / max(abs(a), abs(b)) for a, b in combinations(periods, 2))


def compare_methods(system: LienardSystem, energy: float) -> PeriodComparison:
    """All three period methods and the derivative quadrature at one energy."""
    return PeriodComparison(
        energy=energy,
        x_quadrature=period_x_quadrature(system, energy),
        theta_quadrature=period_theta_quadrature(system, energy),
        ode_return=period_ode_return(system, energy),
        derivative=period_derivative(system, energy),
    )


def period_sweep(
    system: LienardSystem, energies: Sequence[float], workers: int | None = None
) -> list[PeriodComparison]:
    """compare_methods over several energies on a thread pool, in input order."""
    n_workers = workers if workers is not None else get_settings().workers
    with ThreadPoolExecutor(max_workers=max(1, n_workers)) as pool:
        return list(pool.map(lambda e: compare_methods(system, e), energies))
