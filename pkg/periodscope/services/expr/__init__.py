"""Expression language: parsing, printing, evaluation and Taylor jets."""

from periodscope.services.expr.evaluate import eval_jet, evaluate
from periodscope.services.expr.functions import ExprFunction, SmoothFunction, as_function
from periodscope.services.expr.jet import Jet, extrapolated_difference, finite_difference
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
from periodscope.services.expr.parser import parse

__all__ = [
    "BinaryOp",
    "BinaryOperator",
    "Call",
    "Constant",
    "Expr",
    "ExprFunction",
    "Function",
    "Jet",
    "Negate",
    "Number",
    "SmoothFunction",
    "Variable",
    "as_function",
    "eval_jet",
    "evaluate",
    "extrapolated_difference",
    "finite_difference",
    "parse",
    "to_text",
]
