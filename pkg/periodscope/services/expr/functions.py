"""Smooth one-variable functions usable as f and g of a system."""

from typing import Protocol, runtime_checkable

from numpy.typing import ArrayLike

from periodscope.services.expr.evaluate import eval_jet, evaluate
from periodscope.services.expr.jet import FloatArray, Jet
from periodscope.services.expr.nodes import Expr, to_text
from periodscope.services.expr.parser import parse


@runtime_checkable
class SmoothFunction(Protocol):
    """A vectorised function that can also produce Taylor jets."""

    @property
    def text(self) -> str: ...

    def __call__(self, x: ArrayLike) -> FloatArray: ...

    def jet(self, x: ArrayLike, order: int) -> Jet: ...


class ExprFunction:
    """SmoothFunction backed by a parsed expression."""

    __slots__ = ("expr",)

    def __init__(self, expr: Expr) -> None:
        self.expr = expr

    @classmethod
    def from_text(cls, text: str) -> "ExprFunction":
        return cls(parse(text))

    @property
    def text(self) -> str:
        return to_text(self.expr)

    def __call__(self, x: ArrayLike) -> FloatArray:
        return evaluate(self.expr, x)

    def jet(self, x: ArrayLike, order: int | None = None) -> Jet:
        return eval_jet(self.expr, x, order)

    def __repr__(self) -> str:
        return f"ExprFunction({self.text!r})"


def as_function(value: "Expr | SmoothFunction | str") -> SmoothFunction:
    """Coerce text, an expression tree or a SmoothFunction to a SmoothFunction."""
    if isinstance(value, str):
        return ExprFunction.from_text(value)
    if isinstance(value, Expr):
        return ExprFunction(value)
    return value
