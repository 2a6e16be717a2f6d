"""Gauss–Legendre quadrature: fixed rules, adaptive panels and cached antiderivatives."""

import threading
from collections.abc import Callable
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import structlog
from numpy.typing import ArrayLike

from periodscope.core.exceptions import DomainError, QuadratureNonConvergence
from periodscope.services.expr.jet import FloatArray

logger = structlog.get_logger(__name__)

Integrand = Callable[[FloatArray], FloatArray]

CHECKPOINT_ORDER = 16
CHECKPOINT_REL_TOL = 1e-12


@lru_cache(maxsize=16)
def gauss_legendre(order: int) -> tuple[FloatArray, FloatArray]:
    """Nodes and weights of the Gauss–Legendre rule on [-1, 1]."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def fixed_gauss_legendre(fn: Integrand, a: ArrayLike, b: ArrayLike, order: int) -> FloatArray:
    """Integrate fn over [a, b] with one Gauss–Legendre panel.

    a and b may be arrays; the integrand is called once with nodes of shape
    ``broadcast(a, b).shape + (order,)``. Reversed bounds give the negated
    integral.
    """
    nodes, weights = gauss_legendre(order)
    lo = np.asarray(a, dtype=np.float64)[..., None]
    hi = np.asarray(b, dtype=np.float64)[..., None]
    mid = 0.5 * (hi + lo)
    half = 0.5 * (hi - lo)
    values = np.asarray(fn(mid + half * nodes))
    return np.sum(weights * values * half, axis=-1)


@dataclass(frozen=True)
class QuadratureResult:
    """Integral value with its self-reported error estimate."""

    value: float
    error: float
    panels: int


def adaptive_gauss_legendre(
    fn: Integrand,
    a: float,
    b: float,
    order: int = 64,
    abs_tol: float = 1e-10,
    rel_tol: float = 1e-9,
    max_depth: int = 12,
    label: str = "integral",
) -> QuadratureResult:
    """Adaptive panel bisection with a fixed Gauss–Legendre rule.

    A panel is accepted when the sum over its two halves changes the panel
    value by less than its share of ``max(abs_tol, rel_tol * |total|)``.
    All panels of one refinement level are evaluated in a single call of fn.

    Raises:
        QuadratureNonConvergence: Panels still rejected after max_depth bisections
    """
    length = b - a
    lo = np.array([a])
    hi = np.array([b])
    coarse = fixed_gauss_legendre(fn, lo, hi, order)
    total_estimate = float(abs(coarse[0]))
    value = 0.0
    error = 0.0
    accepted = 0

    for depth in range(max_depth + 1):
        mid = 0.5 * (lo + hi)
        halves = fixed_gauss_legendre(
            fn, np.concatenate([lo, mid]), np.concatenate([mid, hi]), order
        )
        left, right = np.split(halves, 2)
        fine = left + right
        diff = np.abs(fine - coarse)
        budget = max(abs_tol, rel_tol * total_estimate)
        ok = diff <= budget * np.abs(hi - lo) / abs(length)

        value += float(np.sum(fine[ok]))
        error += float(np.sum(diff[ok]))
        accepted += int(np.count_nonzero(ok))
        if np.all(ok):
            return QuadratureResult(value=value, error=error, panels=accepted)

        bad = ~ok
        logger.debug("quadrature_panel_split", label=label, depth=depth, rejected=int(bad.sum()))
        lo = np.concatenate([lo[bad], mid[bad]])
        hi = np.concatenate([mid[bad], hi[bad]])
        coarse = np.concatenate([left[bad], right[bad]])
        total_estimate = max(total_estimate, abs(value + float(np.sum(coarse))))

    raise QuadratureNonConvergence(label, error=float(np.sum(diff[~ok])) + error)


def chebyshev_nodes(a: float, b: float, n: int) -> FloatArray:
    """Chebyshev points of the first kind on [a, b], ascending."""
    k = np.arange(n)
    t = -np.cos((2 * k + 1) * np.pi / (2 * n))
    return 0.5 * (a + b) + 0.5 * (b - a) * t


class CheckpointedAntiderivative:
    """x ↦ ∫₀ˣ integrand, cached at checkpoints.

    Checkpoints are laid out outward from 0 on demand. Each panel is at most
    ``panel_width`` wide and is halved until a 16-point rule over the panel
    agrees with the sum over its two halves to ``max(tol / 10, rel_tol * |panel|)``.
    A panel whose integrand overflows is halved the same way, so checkpoints
    can approach the point where the integrand stops being finite. A value
    between checkpoints integrates from the nearest checkpoint with one
    16-point panel, so evaluation is vectorised and costs O(1) per point.

    Checkpoint extension is serialised by a lock; readers work from an
    immutable snapshot, so concurrent callers see identical values.
    """

    def __init__(
        self,
        integrand: Integrand,
        domain: tuple[float, float],
        tol: float,
        panel_width: float = 0.25,
        label: str = "antiderivative",
        rel_tol: float = CHECKPOINT_REL_TOL,
    ) -> None:
        self.integrand = integrand
        self.domain = domain
        self.tol = tol
        self.rel_tol = rel_tol
        self.panel_width = panel_width
        self.label = label
        self._lock = threading.Lock()
        self._right: list[tuple[float, float]] = [(0.0, 0.0)]
        self._left: list[tuple[float, float]] = [(0.0, 0.0)]
        self._snapshot = self._build_snapshot()

    def _build_snapshot(self) -> tuple[FloatArray, FloatArray]:
        points = self._left[:0:-1] + self._right
        knots = np.array([p[0] for p in points])
        values = np.array([p[1] for p in points])
        knots.setflags(write=False)
        values.setflags(write=False)
        return knots, values

    @property
    def checkpoints(self) -> int:
        return len(self._snapshot[0])

    def _panel(self, start: float, width: float) -> tuple[float, float]:
        """Largest converged panel from start, width halved as needed.

        Raises:
            DomainError: The integrand overflows arbitrarily close to start
            QuadratureNonConvergence: No panel wider than the rounding floor converges
        """
        min_width = 1e-9 * max(1.0, abs(start))
        while True:
            end = start + width
            mid = 0.5 * (start + end)
            with np.errstate(over="ignore", invalid="ignore"):
                full = float(fixed_gauss_legendre(self.integrand, start, end, CHECKPOINT_ORDER))
                halves = fixed_gauss_legendre(
                    self.integrand, np.array([start, mid]), np.array([mid, end]), CHECKPOINT_ORDER
                )
                fine = float(np.sum(halves))
            finite = np.isfinite(full) and np.isfinite(fine)
            if finite and abs(fine - full) <= max(self.tol / 10, self.rel_tol * abs(fine)):
                return end, fine
            width /= 2
            if abs(width) < min_width:
                if not finite:
                    raise DomainError(self.label, f"integrand not finite near x = {start:g}")
                raise QuadratureNonConvergence(f"{self.label} near x = {start:g}")

    def _extend(self, target: float) -> None:
        side = self._right if target > 0 else self._left
        direction = 1.0 if target > 0 else -1.0
        edge = self.domain[1] if target > 0 else self.domain[0]
        while direction * (target - side[-1][0]) > 0:
            start, value = side[-1]
            width = direction * min(self.panel_width, abs(edge - start))
            end, increment = self._panel(start, width)
            if abs(end - edge) < 1e-12 * max(1.0, abs(edge)):
                end = edge
            side.append((end, value + increment))

    def _ensure(self, lo: float, hi: float) -> tuple[FloatArray, FloatArray]:
        knots, values = self._snapshot
        if knots[0] <= lo and hi <= knots[-1]:
            return knots, values
        x_lo, x_hi = self.domain
        slack = 1e-12 * max(1.0, abs(x_lo), abs(x_hi))
        if lo < x_lo - slack or hi > x_hi + slack:
            raise DomainError(
                self.label, f"x outside domain [{x_lo:g}, {x_hi:g}] (requested [{lo:g}, {hi:g}])"
            )
        with self._lock:
            before = self.checkpoints
            self._extend(max(min(hi, x_hi), 0.0))
            self._extend(min(max(lo, x_lo), 0.0))
            self._snapshot = self._build_snapshot()
            logger.debug(
                "checkpoints_extended",
                label=self.label,
                added=self.checkpoints - before,
                span=[float(self._snapshot[0][0]), float(self._snapshot[0][-1])],
            )
            return self._snapshot

    def __call__(self, x: ArrayLike) -> FloatArray:
        xs = np.asarray(x, dtype=np.float64)
        if xs.size == 0:
            return np.zeros(xs.shape)
        knots, values = self._ensure(float(xs.min()), float(xs.max()))
        clipped = np.clip(xs, knots[0], knots[-1])
        pos = np.clip(np.searchsorted(knots, clipped), 1, len(knots) - 1) if len(knots) > 1 else 0
        if len(knots) > 1:
            left_closer = (clipped - knots[pos - 1]) <= (knots[pos] - clipped)
            idx = np.where(left_closer, pos - 1, pos)
        else:
            idx = np.zeros(xs.shape, dtype=int)
        base = knots[idx]
        return values[idx] + fixed_gauss_legendre(self.integrand, base, xs, CHECKPOINT_ORDER)

    def segment(self, a: ArrayLike, b: ArrayLike) -> FloatArray:
        """∫ₐᵇ integrand with one 16-point panel; for short segments only."""
        return fixed_gauss_legendre(self.integrand, a, b, CHECKPOINT_ORDER)
