"""Truncated Taylor jets.

A jet of order K at base point x stores the normalised Taylor coefficients
``c[k] = u^(k)(x) / k!`` for k = 0..K. Arithmetic on jets is exact truncated
power-series arithmetic, so derivatives of compositions come out without
any numerical differentiation.

Coefficients are numpy arrays of shape ``(K + 1, *batch)``: a jet may carry
many base points at once and every recurrence below is elementwise.
"""

from collections.abc import Callable
from math import factorial
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

FloatArray = NDArray[np.float64]
JetLike = Union["Jet", float, int]


class Jet:
    """Immutable truncated Taylor expansion of a function at a point."""

    __slots__ = ("_x", "_c")

    # numpy defers mixed arithmetic to the Jet operators
    __array_ufunc__ = None

    def __init__(self, x: ArrayLike, coefficients: ArrayLike) -> None:
        c = np.array(coefficients, dtype=np.float64)
        if c.ndim == 0:
            c = c.reshape(1)
        c.setflags(write=False)
        xs = np.array(x, dtype=np.float64)
        xs.setflags(write=False)
        self._x = xs
        self._c = c

    # -------------------------------------------------------------------------
    # Construction
    # -------------------------------------------------------------------------

    @classmethod
    def variable(cls, x: ArrayLike, order: int) -> "Jet":
        """Jet of the identity function at x."""
        xs = np.asarray(x, dtype=np.float64)
        c = np.zeros((order + 1, *xs.shape))
        c[0] = xs
        if order >= 1:
            c[1] = 1.0
        return cls(xs, c)

    @classmethod
    def constant(cls, value: ArrayLike, x: ArrayLike, order: int) -> "Jet":
        """Jet of a constant function."""
        xs = np.asarray(x, dtype=np.float64)
        v = np.broadcast_to(np.asarray(value, dtype=np.float64), xs.shape)
        c = np.zeros((order + 1, *xs.shape))
        c[0] = v
        return cls(xs, c)

    # -------------------------------------------------------------------------
    # Accessors
    # -------------------------------------------------------------------------

    @property
    def x(self) -> FloatArray:
        return self._x

    @property
    def coefficients(self) -> FloatArray:
        return self._c

    @property
    def order(self) -> int:
        return self._c.shape[0] - 1

    @property
    def value(self) -> FloatArray:
        return self._c[0]

    def derivative(self, k: int) -> FloatArray:
        """k-th derivative at the base point."""
        if k > self.order:
            raise ValueError(f"Jet of order {self.order} has no derivative {k}")
        return self._c[k] * factorial(k)

    def derivatives(self) -> FloatArray:
        """All derivatives 0..K stacked along the first axis."""
        scale = np.array([factorial(k) for k in range(self.order + 1)], dtype=np.float64)
        return self._c * scale.reshape((-1,) + (1,) * (self._c.ndim - 1))

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError(f"Cannot raise jet order from {self.order} to {order}")
        return Jet(self._x, self._c[: order + 1])

    def differentiate(self) -> "Jet":
        """Jet of u' at the same point, one order lower."""
        k = np.arange(1, self.order + 1, dtype=np.float64)
        scale = k.reshape((-1,) + (1,) * (self._c.ndim - 1))
        return Jet(self._x, self._c[1:] * scale)

    def integrate(self, value: ArrayLike) -> "Jet":
        """Jet of the antiderivative taking ``value`` at the base point."""
        k = np.arange(1, self.order + 2, dtype=np.float64)
        scale = k.reshape((-1,) + (1,) * (self._c.ndim - 1))
        head = np.broadcast_to(np.asarray(value, dtype=np.float64), self._c.shape[1:])
        return Jet(self._x, np.concatenate([head[None], self._c / scale]))

    def evaluate(self, dx: ArrayLike) -> FloatArray:
        """Sum the truncated series at offset dx from the base point (Horner)."""
        d = np.asarray(dx, dtype=np.float64)
        acc = np.zeros(np.broadcast_shapes(d.shape, self._c.shape[1:]))
        for k in range(self.order, -1, -1):
            acc = acc * d + self._c[k]
        return acc

    def __repr__(self) -> str:
        return f"Jet(x={self._x.tolist()!r}, coefficients={self._c.tolist()!r})"

    # -------------------------------------------------------------------------
    # Arithmetic
    # -------------------------------------------------------------------------

    def _lift(self, other: JetLike) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self._x, self.order)

    def _pair(self, other: JetLike) -> tuple[FloatArray, FloatArray, int]:
        o = self._lift(other)
        k = min(self.order, o.order)
        return self._c[: k + 1], o._c[: k + 1], k

    def __add__(self, other: JetLike) -> "Jet":
        a, b, _ = self._pair(other)
        return Jet(self._x, a + b)

    __radd__ = __add__

    def __sub__(self, other: JetLike) -> "Jet":
        a, b, _ = self._pair(other)
        return Jet(self._x, a - b)

    def __rsub__(self, other: JetLike) -> "Jet":
        return self._lift(other) - self

    def __neg__(self) -> "Jet":
        return Jet(self._x, -self._c)

    def __mul__(self, other: JetLike) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self._x, self._c * np.asarray(other, dtype=np.float64))
        a, b, k = self._pair(other)
        out = np.zeros_like(a)
        for n in range(k + 1):
            out[n] = sum(a[j] * b[n - j] for j in range(n + 1))
        return Jet(self._x, out)

    __rmul__ = __mul__

    def __truediv__(self, other: JetLike) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self._x, self._c / np.asarray(other, dtype=np.float64))
        a, b, k = self._pair(other)
        q = np.zeros_like(a)
        for n in range(k + 1):
            acc = a[n] - sum((q[j] * b[n - j] for j in range(n)), np.zeros_like(a[0]))
            q[n] = acc / b[0]
        return Jet(self._x, q)

    def __rtruediv__(self, other: JetLike) -> "Jet":
        return self._lift(other) / self

    def __pow__(self, exponent: float) -> "Jet":
        return power(self, exponent)


# =============================================================================
# Elementary functions
# =============================================================================


def _first_order_rule(u: Jet, w: Callable[[FloatArray, int], FloatArray], v0: FloatArray) -> Jet:
    """Solve v' = w * u' coefficient by coefficient.

    ``w(v, n)`` returns coefficient n of the factor w, given v's
    coefficients up to n.
    """
    c = u.coefficients
    v = np.zeros_like(c)
    v[0] = v0
    for k in range(1, u.order + 1):
        v[k] = sum(j * c[j] * w(v, k - j) for j in range(1, k + 1)) / k
    return Jet(u.x, v)


def exp(u: Jet) -> Jet:
    return _first_order_rule(u, lambda v, n: v[n], np.exp(u.value))


def log(u: Jet) -> Jet:
    c = u.coefficients
    v = np.zeros_like(c)
    v[0] = np.log(c[0])
    for k in range(1, u.order + 1):
        acc = sum((j * v[j] * c[k - j] for j in range(1, k)), np.zeros_like(c[0]))
        v[k] = (c[k] - acc / k) / c[0]
    return Jet(u.x, v)


def sin_cos(u: Jet) -> tuple[Jet, Jet]:
    c = u.coefficients
    s = np.zeros_like(c)
    co = np.zeros_like(c)
    s[0] = np.sin(c[0])
    co[0] = np.cos(c[0])
    for k in range(1, u.order + 1):
        s[k] = sum(j * c[j] * co[k - j] for j in range(1, k + 1)) / k
        co[k] = -sum(j * c[j] * s[k - j] for j in range(1, k + 1)) / k
    return Jet(u.x, s), Jet(u.x, co)


def sinh_cosh(u: Jet) -> tuple[Jet, Jet]:
    c = u.coefficients
    s = np.zeros_like(c)
    ch = np.zeros_like(c)
    s[0] = np.sinh(c[0])
    ch[0] = np.cosh(c[0])
    for k in range(1, u.order + 1):
        s[k] = sum(j * c[j] * ch[k - j] for j in range(1, k + 1)) / k
        ch[k] = sum(j * c[j] * s[k - j] for j in range(1, k + 1)) / k
    return Jet(u.x, s), Jet(u.x, ch)


def _square_shifted(t: FloatArray, n: int, sign: float) -> FloatArray:
    """Coefficient n of 1 + sign * t^2."""
    acc = sum(t[i] * t[n - i] for i in range(n + 1))
    return (1.0 if n == 0 else 0.0) + sign * acc


def tan(u: Jet) -> Jet:
    # t' = (1 + t^2) u'
    return _first_order_rule(u, lambda t, n: _square_shifted(t, n, 1.0), np.tan(u.value))


def tanh(u: Jet) -> Jet:
    # t' = (1 - t^2) u'
    return _first_order_rule(u, lambda t, n: _square_shifted(t, n, -1.0), np.tanh(u.value))


def atan(u: Jet) -> Jet:
    q = 1.0 / (1.0 + u * u)
    qc = q.coefficients
    return _first_order_rule(u, lambda _v, n: qc[n], np.arctan(u.value))


def integer_power(u: Jet, n: int) -> Jet:
    """u**n by repeated squaring; exact for polynomial inputs."""
    if n < 0:
        return 1.0 / integer_power(u, -n)
    result = Jet.constant(1.0, u.x, u.order)
    base = u
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


def power(u: Jet, a: float) -> Jet:
    """u**a for a constant real exponent.

    Integer exponents use repeated multiplication and accept any base;
    other exponents need a positive base.
    """
    if float(a).is_integer():
        return integer_power(u, int(a))
    c = u.coefficients
    v = np.zeros_like(c)
    v[0] = np.power(c[0], a)
    for k in range(1, u.order + 1):
        acc = sum(((a + 1.0) * j - k) * c[j] * v[k - j] for j in range(1, k + 1))
        v[k] = acc / (k * c[0])
    return Jet(u.x, v)


def sqrt(u: Jet) -> Jet:
    return power(u, 0.5)


# =============================================================================
# Finite differences for self-checks
# =============================================================================

# 4th-order central stencils: offsets in units of h and weights
_STENCILS: dict[int, tuple[tuple[int, ...], tuple[float, ...], float]] = {
    1: ((-2, -1, 1, 2), (1.0, -8.0, 8.0, -1.0), 12.0),
    2: ((-2, -1, 0, 1, 2), (-1.0, 16.0, -30.0, 16.0, -1.0), 12.0),
    3: ((-3, -2, -1, 1, 2, 3), (1.0, -8.0, 13.0, -13.0, 8.0, -1.0), 8.0),
}

DEFAULT_STEPS = {1: 1e-3, 2: 2e-3, 3: 7e-3}


def finite_difference(
    fn: Callable[[FloatArray], FloatArray],
    x: ArrayLike,
    k: int,
    h: float | None = None,
) -> FloatArray:
    """Fourth-order central finite-difference estimate of the k-th derivative.

    Args:
        fn: Vectorised scalar function
        x: Evaluation point(s)
        k: Derivative order, 1 to 3
        h: Step; defaults to a per-order step balancing truncation and rounding

    Returns:
        Estimated derivative with the shape of x
    """
    offsets, weights, denom = _STENCILS[k]
    step = DEFAULT_STEPS[k] if h is None else h
    xs = np.asarray(x, dtype=np.float64)
    total = np.zeros(xs.shape)
    for offset, weight in zip(offsets, weights, strict=True):
        total = total + weight * np.asarray(fn(xs + offset * step))
    return total / (denom * step**k)


def extrapolated_difference(
    fn: Callable[[FloatArray], FloatArray],
    x: ArrayLike,
    k: int,
    h: float = 1e-2,
) -> FloatArray:
    """Richardson-extrapolated k-th derivative from the fourth-order stencils at h and 2h.

    The h⁴ error terms cancel, leaving O(h⁶), so a step large enough to keep
    rounding near 1e-9 |f| still resolves third derivatives to about 1e-9.
    """
    fine = finite_difference(fn, x, k, h)
    coarse = finite_difference(fn, x, k, 2.0 * h)
    return (16.0 * fine - coarse) / 15.0
