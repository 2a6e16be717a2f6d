"""Vectorised evaluation and Taylor-jet evaluation of expression trees."""

import numpy as np
from numpy.typing import ArrayLike

from periodscope.config import get_settings
from periodscope.core.exceptions import DomainError
from periodscope.services.expr import jet as jets
from periodscope.services.expr.jet import FloatArray, Jet
from periodscope.services.expr.nodes import (
    BinaryOp,
    BinaryOperator,
    Call,
    Constant,
    Expr,
    Function,
    Negate,
    Number,
    Variable,
    to_text,
)

_CONSTANT_VALUES = {"pi": np.pi}

_VALUE_FUNCTIONS = {
    Function.SIN: np.sin,
    Function.COS: np.cos,
    Function.TAN: np.tan,
    Function.ATAN: np.arctan,
    Function.EXP: np.exp,
    Function.LN: np.log,
    Function.SQRT: np.sqrt,
    Function.SINH: np.sinh,
    Function.COSH: np.cosh,
    Function.TANH: np.tanh,
}


def _finite(node: Expr, values: FloatArray) -> FloatArray:
    if not np.all(np.isfinite(values)):
        raise DomainError(to_text(node), "non-finite result")
    return values


def _constant_exponent(node: BinaryOp) -> float | None:
    if node.right.depends_on_x():
        return None
    return float(evaluate(node.right, 0.0))


def _check_power_base(
    node: BinaryOp, base: FloatArray, exponent: float | None, strict: bool
) -> None:
    """Reject bases where the power is undefined (or not smooth when ``strict``)."""
    if exponent is not None and exponent.is_integer():
        if exponent < 0 and np.any(base == 0.0):
            raise DomainError(to_text(node), "zero base with negative exponent")
        return
    if np.any(base < 0.0):
        raise DomainError(to_text(node), "negative base with non-integer exponent")
    if (strict or exponent is None or exponent < 0) and np.any(base == 0.0):
        raise DomainError(to_text(node), "zero base with non-integer exponent")


def _check_argument(node: Call, arg: FloatArray, strict: bool) -> None:
    if node.func is Function.LN and np.any(arg <= 0.0):
        raise DomainError(to_text(node), "logarithm of non-positive argument")
    if node.func is Function.SQRT:
        if np.any(arg < 0.0):
            raise DomainError(to_text(node), "square root of negative argument")
        if strict and np.any(arg == 0.0):
            raise DomainError(to_text(node), "square root is not differentiable at 0")
    if node.func is Function.TAN and np.any(np.cos(arg) == 0.0):
        raise DomainError(to_text(node), "tangent at a pole")


def evaluate(e: Expr, x: ArrayLike) -> FloatArray:
    """Evaluate an expression at x (scalar or array).

    Raises:
        DomainError: Some subexpression is undefined at x
    """
    xs = np.asarray(x, dtype=np.float64)
    with np.errstate(all="ignore"):
        return _evaluate(e, xs)


def _evaluate(e: Expr, x: FloatArray) -> FloatArray:
    match e:
        case Number(value=value):
            return np.full(x.shape, value)
        case Variable():
            return x
        case Constant(name=name):
            return np.full(x.shape, _CONSTANT_VALUES[name])
        case Negate(operand=operand):
            return -_evaluate(operand, x)
        case BinaryOp(op=op, left=left, right=right):
            a = _evaluate(left, x)
            if op is BinaryOperator.POW:
                exponent = _constant_exponent(e)
                _check_power_base(e, a, exponent, strict=False)
                b = _evaluate(right, x) if exponent is None else np.float64(exponent)
                return _finite(e, np.power(a, b))
            b = _evaluate(right, x)
            if op is BinaryOperator.ADD:
                return _finite(e, a + b)
            if op is BinaryOperator.SUB:
                return _finite(e, a - b)
            if op is BinaryOperator.MUL:
                return _finite(e, a * b)
            if np.any(b == 0.0):
                raise DomainError(to_text(e), "division by zero")
            return _finite(e, a / b)
        case Call(func=func, argument=argument):
            arg = _evaluate(argument, x)
            _check_argument(e, arg, strict=False)
            return _finite(e, _VALUE_FUNCTIONS[func](arg))
    raise TypeError(f"Not an expression node: {e!r}")


def eval_jet(e: Expr, x: ArrayLike, order: int | None = None) -> Jet:
    """Taylor jet of an expression at x.

    Args:
        e: Expression tree
        x: Base point (scalar or array of points)
        order: Highest derivative order carried; defaults to the jet_order setting

    Returns:
        Jet whose coefficient 0 equals plain evaluation

    Raises:
        DomainError: Some subexpression is undefined, or not smooth, at x
    """
    if order is None:
        order = get_settings().jet_order
    if order < 0:
        raise ValueError("Jet order must be non-negative")
    xs = np.asarray(x, dtype=np.float64)
    with np.errstate(all="ignore"):
        return _eval_jet(e, xs, order)


def _checked(node: Expr, j: Jet) -> Jet:
    _finite(node, j.coefficients)
    return j


def _eval_jet(e: Expr, x: FloatArray, order: int) -> Jet:
    strict = order >= 1
    match e:
        case Number(value=value):
            return Jet.constant(value, x, order)
        case Variable():
            return Jet.variable(x, order)
        case Constant(name=name):
            return Jet.constant(_CONSTANT_VALUES[name], x, order)
        case Negate(operand=operand):
            return -_eval_jet(operand, x, order)
        case BinaryOp(op=op, left=left, right=right):
            a = _eval_jet(left, x, order)
            if op is BinaryOperator.POW:
                exponent = _constant_exponent(e)
                _check_power_base(e, a.value, exponent, strict=strict)
                if exponent is not None:
                    return _checked(e, jets.power(a, exponent))
                return _checked(e, jets.exp(_eval_jet(right, x, order) * jets.log(a)))
            b = _eval_jet(right, x, order)
            if op is BinaryOperator.ADD:
                return _checked(e, a + b)
            if op is BinaryOperator.SUB:
                return _checked(e, a - b)
            if op is BinaryOperator.MUL:
                return _checked(e, a * b)
            if np.any(b.value == 0.0):
                raise DomainError(to_text(e), "division by zero")
            return _checked(e, a / b)
        case Call(func=func, argument=argument):
            u = _eval_jet(argument, x, order)
            _check_argument(e, u.value, strict=strict)
            return _checked(e, _apply(func, u))
    raise TypeError(f"Not an expression node: {e!r}")


def _apply(func: Function, u: Jet) -> Jet:
    match func:
        case Function.SIN:
            return jets.sin_cos(u)[0]
        case Function.COS:
            return jets.sin_cos(u)[1]
        case Function.TAN:
            return jets.tan(u)
        case Function.ATAN:
            return jets.atan(u)
        case Function.EXP:
            return jets.exp(u)
        case Function.LN:
            return jets.log(u)
        case Function.SQRT:
            return jets.sqrt(u)
        case Function.SINH:
            return jets.sinh_cosh(u)[0]
        case Function.COSH:
            return jets.sinh_cosh(u)[1]
        case Function.TANH:
            return jets.tanh(u)
