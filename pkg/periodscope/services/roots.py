"""Root finding: bracketing scans, Brent refinement and safeguarded Newton."""

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import brentq

from periodscope.services.expr.jet import FloatArray

ValueAndSlope = Callable[[FloatArray], tuple[FloatArray, FloatArray]]


def refine_root(fn: Callable[[float], float], a: float, b: float) -> float:
    """Root of fn in a sign-changing bracket with endpoints a, b, by Brent's method."""
    a, b = min(a, b), max(a, b)
    fa = fn(a)
    if fa == 0.0:
        return a
    fb = fn(b)
    if fb == 0.0:
        return b
    root: float = brentq(fn, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return root


@dataclass(frozen=True)
class NewtonResult:
    """Roots with their final residuals and convergence mask."""

    x: FloatArray
    residual: FloatArray
    converged: FloatArray
    iterations: int


def newton_bisection(
    fn: ValueAndSlope,
    target: ArrayLike,
    lo: ArrayLike,
    hi: ArrayLike,
    x0: ArrayLike,
    tol: ArrayLike,
    max_iter: int = 100,
) -> NewtonResult:
    """Solve fn(x) = target for increasing fn on [lo, hi], elementwise.

    Newton steps are taken when they stay strictly inside the current
    bracket; otherwise the bracket is bisected. Iteration stops for each
    element once ``|fn(x) - target| <= tol`` or its bracket has collapsed to
    floating-point resolution.

    Args:
        fn: Returns (value, derivative) for an array of points
        target: Right-hand sides
        lo, hi: Brackets with fn(lo) <= target <= fn(hi)
        x0: Initial guesses inside the brackets
        tol: Absolute residual tolerances
        max_iter: Iteration cap
    """
    r = np.asarray(target, dtype=np.float64)
    a = np.broadcast_to(np.asarray(lo, dtype=np.float64), r.shape).copy()
    b = np.broadcast_to(np.asarray(hi, dtype=np.float64), r.shape).copy()
    x = np.clip(np.broadcast_to(np.asarray(x0, dtype=np.float64), r.shape), a, b).copy()
    tols = np.broadcast_to(np.asarray(tol, dtype=np.float64), r.shape)
    residual = np.full(r.shape, np.inf)
    done = np.zeros(r.shape, dtype=bool)

    iterations = 0
    for iterations in range(1, max_iter + 1):
        active = ~done
        value, slope = fn(x[active])
        res = value - r[active]
        residual[active] = res
        converged = np.abs(res) <= tols[active]
        collapsed = (b[active] - a[active]) <= 4 * np.finfo(float).eps * np.maximum(
            1.0, np.abs(x[active])
        )
        idx = np.flatnonzero(active)
        done[idx[converged | collapsed]] = True
        if np.all(done):
            break

        keep = ~(converged | collapsed)
        idx = idx[keep]
        xa, res, slope = x[idx], res[keep], slope[keep]
        below = res < 0
        a[idx] = np.where(below, xa, a[idx])
        b[idx] = np.where(below, b[idx], xa)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = xa - res / slope
        inside = np.isfinite(step) & (step > a[idx]) & (step < b[idx])
        x[idx] = np.where(inside, step, 0.5 * (a[idx] + b[idx]))

    converged_mask = np.abs(residual) <= tols
    collapsed_mask = (b - a) <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(x))
    return NewtonResult(
        x=x,
        residual=residual,
        converged=converged_mask | collapsed_mask,
        iterations=iterations,
    )
