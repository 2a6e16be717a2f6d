"""Monotonicity and isochronicity criteria for the period function.

* N(x) = (u√μ)″ + (u(√μ)′)′ = u″√μ + 3u′(√μ)′ + 2u(√μ)″ with u = V/V′²;
  a uniform sign of N on K(E) makes T increasing or decreasing on (0, E).
* G(x) = (2/h′)N, also available in expanded A/B/C form.
* R(x) = 3P²P′f + 5PP′² − 3P²P″ with P = g′ + gf, the isochronicity
  residual, together with the guards W = 3P² − gP′ and g e^F + 2P∫e^F and
  the constants C, D that must not vary along an isochronous system.
* 5g′g″² − 3g′²g‴ for conservative systems.

Zero tests are relative to the magnitudes of the individual terms, since
each of these quantities is a cancellation of large contributions.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
import structlog
from numpy.typing import ArrayLike

from periodscope.config import get_settings
from periodscope.core.exceptions import DegenerateCritical, GuardViolation, NotConservative
from periodscope.services.expr.jet import FloatArray
from periodscope.services.liesys import LienardSystem, OrbitWindow
from periodscope.services.quadrature import chebyshev_nodes

logger = structlog.get_logger(__name__)


# =============================================================================
# Reports
# =============================================================================


class MonotonicityVerdict(str, Enum):
    """Classification of the period function from the sign of N."""

    INCREASING = "Increasing"
    DECREASING = "Decreasing"
    ISOCHRONOUS = "Isochronous"
    INDEFINITE = "Indefinite"


@dataclass(frozen=True)
class MonotonicityReport:
    """Sampled N on the orbit window and the resulting verdict."""

    energy: float
    window: OrbitWindow
    verdict: MonotonicityVerdict
    samples: tuple[tuple[float, float], ...]
    min_n: float
    max_n: float
    argmin_x: float
    argmax_x: float
    scale: float
    tol_iso: float


@dataclass(frozen=True)
class IsochronyReport:
    """Residual, guard and C/D samples on the orbit window with the verdict."""

    energy: float
    window: OrbitWindow
    verdict: bool
    residual_samples: tuple[tuple[float, float], ...]
    guard_w_samples: tuple[tuple[float, float], ...]
    guard2_samples: tuple[tuple[float, float], ...]
    c_samples: tuple[tuple[float, float], ...]
    d_samples: tuple[tuple[float, float], ...]
    diagnostics: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Terms:
    """A cancelling combination with the magnitude of its individual terms."""

    value: FloatArray
    scale: FloatArray


def _pairs(x: FloatArray, values: FloatArray) -> tuple[tuple[float, float], ...]:
    return tuple((float(a), float(b)) for a, b in zip(x, values, strict=True))


def orbit_samples(
    system: LienardSystem, energy: float, n_samples: int
) -> tuple[OrbitWindow, FloatArray]:
    """Chebyshev nodes on [x1*, x2*]."""
    window = system.turning_points(energy)
    return window, chebyshev_nodes(window.x1, window.x2, n_samples)


# =============================================================================
# N and G
# =============================================================================


def n_terms(system: LienardSystem, x: ArrayLike) -> Terms:
    """N(x) with the magnitude of its individual terms.

    Direct evaluation from V, V′, V″, V‴ away from the origin; inside the
    series radius u, u′, u″ come from the expansion of V at 0.

    Raises:
        DegenerateCritical: V′ vanishes at a sample away from 0
    """
    settings = get_settings()
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    value = np.empty(xs.shape)
    scale = np.empty(xs.shape)

    near = np.abs(xs) < settings.series_radius
    if np.any(near):
        series = system.origin_series()
        xn = xs[near]
        u1 = series.u.differentiate()
        s1 = series.sqrt_mass.differentiate()
        u_, du, d2u = series.u.evaluate(xn), u1.evaluate(xn), u1.differentiate().evaluate(xn)
        s_, ds, d2s = (
            series.sqrt_mass.evaluate(xn),
            s1.evaluate(xn),
            s1.differentiate().evaluate(xn),
        )
        t1, t2, t3 = d2u * s_, 3.0 * du * ds, 2.0 * u_ * d2s
        value[near] = t1 + t2 + t3
        scale[near] = np.abs(t1) + np.abs(t2) + np.abs(t3)

    far = ~near
    if np.any(far):
        xf = xs[far]
        v = system.potential_jet(xf, 3).derivatives()
        s = system.sqrt_mass_jet(xf, 2).derivatives()
        fj = system.f.jet(xf, 1).derivatives()
        V, V1, V2, V3 = v
        if np.any(V1 == 0.0):
            raise DegenerateCritical(float(xf[np.flatnonzero(V1 == 0.0)[0]]))
        a1, a2, a3 = 3.0 * V2 / V1**2, 2.0 * V * V3 / V1**3, 6.0 * V * V2**2 / V1**4
        b1, b2 = 1.0 / V1, 2.0 * V * V2 / V1**3
        u = V / V1**2
        d2u = -a1 - a2 + a3
        du = b1 - b2
        value[far] = d2u * s[0] + 3.0 * du * s[1] + 2.0 * u * s[2]
        s2_magnitude = np.abs(s[0]) * (fj[0] ** 2 + np.abs(fj[1]))
        scale[far] = (
            np.abs(s[0]) * (np.abs(a1) + np.abs(a2) + np.abs(a3))
            + 3.0 * np.abs(s[1]) * (np.abs(b1) + np.abs(b2))
            + 2.0 * np.abs(u) * s2_magnitude
        )

    if not np.all(np.isfinite(value)):
        raise DegenerateCritical(float(xs[np.flatnonzero(~np.isfinite(value))[0]]))
    shape = np.shape(x)
    return Terms(value=value.reshape(shape), scale=scale.reshape(shape))


def n_function(system: LienardSystem, x: ArrayLike) -> FloatArray:
    """Monotonicity function N(x)."""
    return n_terms(system, x).value


def g_two_ways(system: LienardSystem, x: ArrayLike) -> tuple[FloatArray, FloatArray]:
    """G from the A/B/C expansion and from (2/h′)N.

    Both forms are singular-looking at 0; x should satisfy |x| >= ε₀.
    """
    xs = np.asarray(x, dtype=np.float64)
    V, V1, V2, V3 = system.potential_jet(xs, 3).derivatives()
    s0, s1, s2 = system.sqrt_mass_jet(xs, 2).derivatives()
    a = 6.0 * V * V2**2 - 3.0 * V1**2 * V2 - 2.0 * V * V1 * V3
    b = 6.0 * V * V1 * V2 - 3.0 * V1**3
    c = 2.0 * V * V1**2
    dh = np.abs(V1) / (2.0 * np.sqrt(V))
    expanded = (a * s0 - b * s1 + c * s2) / (8.0 * V**2 * dh**5)
    succinct = 2.0 * n_function(system, xs) / system.branch_function(xs)[1]
    return expanded, succinct


def classify_monotonicity(
    system: LienardSystem,
    energy: float,
    n_samples: int | None = None,
    tol_iso: float | None = None,
) -> MonotonicityReport:
    """Sample N on Chebyshev nodes of the orbit window and classify T.

    Isochronous when every |N| is below ``tol_iso * scale``, Increasing or
    Decreasing for a uniform sign beyond it, Indefinite otherwise.
    """
    settings = get_settings()
    n = n_samples if n_samples is not None else settings.samples
    tol = tol_iso if tol_iso is not None else settings.tol_iso
    if n < 16:
        raise ValueError("classify_monotonicity needs at least 16 samples")

    window, xs = orbit_samples(system, energy, n)
    terms = n_terms(system, xs)
    scale = float(np.max(terms.scale))
    threshold = tol * scale
    values = terms.value
    min_n, max_n = float(values.min()), float(values.max())

    if max(abs(min_n), abs(max_n)) <= threshold:
        verdict = MonotonicityVerdict.ISOCHRONOUS
    elif min_n >= -threshold and max_n > threshold:
        verdict = MonotonicityVerdict.INCREASING
    elif max_n <= threshold and min_n < -threshold:
        verdict = MonotonicityVerdict.DECREASING
    else:
        verdict = MonotonicityVerdict.INDEFINITE

    logger.info(
        "monotonicity_classified",
        energy=energy,
        verdict=verdict.value,
        min_n=min_n,
        max_n=max_n,
        scale=scale,
    )
    return MonotonicityReport(
        energy=energy,
        window=window,
        verdict=verdict,
        samples=_pairs(xs, values),
        min_n=min_n,
        max_n=max_n,
        argmin_x=float(xs[int(np.argmin(values))]),
        argmax_x=float(xs[int(np.argmax(values))]),
        scale=scale,
        tol_iso=tol,
    )


# =============================================================================
# Isochronicity residual and guards
# =============================================================================


@dataclass(frozen=True)
class _PTerms:
    g: FloatArray
    f: FloatArray
    p: FloatArray
    dp: FloatArray
    d2p: FloatArray
    p_mag: FloatArray
    dp_mag: FloatArray
    d2p_mag: FloatArray


def _p_terms(system: LienardSystem, xs: FloatArray) -> _PTerms:
    g, g1, g2, g3 = system.g.jet(xs, 3).derivatives()
    f, f1, f2 = system.f.jet(xs, 2).derivatives()
    return _PTerms(
        g=g,
        f=f,
        p=g1 + g * f,
        dp=g2 + g1 * f + g * f1,
        d2p=g3 + g2 * f + 2.0 * g1 * f1 + g * f2,
        p_mag=np.abs(g1) + np.abs(g * f),
        dp_mag=np.abs(g2) + np.abs(g1 * f) + np.abs(g * f1),
        d2p_mag=np.abs(g3) + np.abs(g2 * f) + 2.0 * np.abs(g1 * f1) + np.abs(g * f2),
    )


def residual_terms(system: LienardSystem, x: ArrayLike) -> Terms:
    """R(x) = 3P²P′f + 5PP′² − 3P²P″ with the magnitude of its terms."""
    t = _p_terms(system, np.asarray(x, dtype=np.float64))
    value = 3.0 * t.p**2 * t.dp * t.f + 5.0 * t.p * t.dp**2 - 3.0 * t.p**2 * t.d2p
    scale = (
        3.0 * t.p_mag**2 * t.dp_mag * np.abs(t.f)
        + 5.0 * t.p_mag * t.dp_mag**2
        + 3.0 * t.p_mag**2 * t.d2p_mag
    )
    return Terms(value=value, scale=scale)


def isochrony_residual(system: LienardSystem, x: ArrayLike) -> FloatArray:
    """Isochronicity residual R(x); zero along an isochronous system."""
    return residual_terms(system, x).value


@dataclass(frozen=True)
class Guards:
    """W, the second guard, and the constants C and D at sample points."""

    w: FloatArray
    guard2: FloatArray
    c: FloatArray
    d: FloatArray
    w_margin: FloatArray
    guard2_margin: FloatArray


def isochrony_guards(system: LienardSystem, x: ArrayLike, tol: float | None = None) -> Guards:
    """W = 3P² − gP′, g e^F + 2P∫₀ˣe^F, C = P′e^{−F}/W and D.

    D is returned itself (2D = [3P + 2P′e^{−F}∫₀ˣe^F]/W), so the harmonic
    oscillator has D = 1/2.

    Raises:
        GuardViolation: W vanishes within tolerance at some sample
    """
    tol = tol if tol is not None else get_settings().tol_iso
    xs = np.asarray(x, dtype=np.float64)
    t = _p_terms(system, xs)
    w = 3.0 * t.p**2 - t.g * t.dp
    w_margin = np.abs(w) / np.maximum(3.0 * t.p_mag**2 + np.abs(t.g * t.dp), np.finfo(float).tiny)
    bad = np.atleast_1d(w_margin <= tol)
    if np.any(bad):
        raise GuardViolation([float(v) for v in np.atleast_1d(xs)[bad]])

    big_f = system.F(xs)
    e_f = np.exp(big_f)
    integral = system.exp_f_integral(xs)
    guard2 = t.g * e_f + 2.0 * t.p * integral
    guard2_margin = np.abs(guard2) / np.maximum(
        np.abs(t.g * e_f) + 2.0 * np.abs(t.p * integral), np.finfo(float).tiny
    )
    c = t.dp * np.exp(-big_f) / w
    d = (3.0 * t.p + 2.0 * t.dp * np.exp(-big_f) * integral) / (2.0 * w)
    return Guards(w=w, guard2=guard2, c=c, d=d, w_margin=w_margin, guard2_margin=guard2_margin)


def _spread(values: FloatArray) -> float:
    """Spread of a sample, relative to its magnitude and at least absolute."""
    return float((values.max() - values.min()) / max(1.0, float(np.max(np.abs(values)))))


def assess_isochrony(
    system: LienardSystem,
    energy: float,
    n_samples: int | None = None,
    tol: float | None = None,
) -> IsochronyReport:
    """Residual and guards on the orbit window at energy E.

    The verdict requires max|R| <= tol * scale with both guards bounded away
    from zero on every sample. C and D count as constant when their relative
    spread is within the tol_constancy setting.
    Samples with |x| < ε₀ are dropped since guard (ii) vanishes at 0.
    """
    settings = get_settings()
    n = n_samples if n_samples is not None else settings.samples
    tol = tol if tol is not None else settings.tol_iso

    window, xs = orbit_samples(system, energy, n)
    xs = xs[np.abs(xs) >= settings.origin_epsilon]
    residual = residual_terms(system, xs)
    scale = float(np.max(residual.scale))
    max_abs_r = float(np.max(np.abs(residual.value)))
    residual_ok = max_abs_r <= tol * scale

    diagnostics: dict[str, Any] = {
        "max_abs_residual": max_abs_r,
        "residual_scale": scale,
        "residual_ok": residual_ok,
    }
    empty: tuple[tuple[float, float], ...] = ()
    try:
        guards = isochrony_guards(system, xs, tol)
    except GuardViolation as exc:
        diagnostics.update(guard_w_ok=False, guard_violations=exc.locations)
        logger.warning("isochrony_guard_violation", energy=energy, locations=exc.locations)
        return IsochronyReport(
            energy=energy,
            window=window,
            verdict=False,
            residual_samples=_pairs(xs, residual.value),
            guard_w_samples=empty,
            guard2_samples=empty,
            c_samples=empty,
            d_samples=empty,
            diagnostics=diagnostics,
        )

    min_w = float(np.min(guards.w_margin))
    min_guard2 = float(np.min(guards.guard2_margin))
    c_spread, d_spread = _spread(guards.c), _spread(guards.d)
    guard2_ok = min_guard2 > tol
    diagnostics.update(
        guard_w_ok=True,
        min_w_margin=min_w,
        guard2_ok=guard2_ok,
        min_guard2_margin=min_guard2,
        c_spread=c_spread,
        d_spread=d_spread,
        c_constant=c_spread <= settings.tol_constancy,
        d_constant=d_spread <= settings.tol_constancy,
    )
    verdict = residual_ok and guard2_ok
    logger.info("isochrony_assessed", energy=energy, verdict=verdict, max_abs_residual=max_abs_r)
    return IsochronyReport(
        energy=energy,
        window=window,
        verdict=verdict,
        residual_samples=_pairs(xs, residual.value),
        guard_w_samples=_pairs(xs, guards.w),
        guard2_samples=_pairs(xs, guards.guard2),
        c_samples=_pairs(xs, guards.c),
        d_samples=_pairs(xs, guards.d),
        diagnostics=diagnostics,
    )


# =============================================================================
# Conservative systems
# =============================================================================


def ensure_conservative(system: LienardSystem, points: int = 33) -> None:
    """Raise NotConservative unless f vanishes on a grid over the domain."""
    grid = np.linspace(system.domain[0], system.domain[1], points)
    values = np.asarray(system.f(grid)) * np.ones_like(grid)
    nonzero = np.flatnonzero(np.abs(values) > 0.0)
    if nonzero.size:
        i = int(nonzero[0])
        raise NotConservative(float(grid[i]), float(values[i]))


def schaaf_value(system: LienardSystem, x: ArrayLike) -> FloatArray:
    """5g′g″² − 3g′²g‴ for a conservative system (f ≡ 0)."""
    ensure_conservative(system)
    _, g1, g2, g3 = system.g.jet(np.asarray(x, dtype=np.float64), 3).derivatives()
    return 5.0 * g1 * g2**2 - 3.0 * g1**2 * g3


def schaaf_sign(system: LienardSystem, energy: float, n_samples: int | None = None) -> int:
    """Uniform sign of the Schaaf expression on K(E): 1, -1, or 0 when mixed."""
    n = n_samples if n_samples is not None else get_settings().samples
    _, xs = orbit_samples(system, energy, n)
    values = schaaf_value(system, xs)
    if np.all(values > 0.0):
        return 1
    if np.all(values < 0.0):
        return -1
    return 0
