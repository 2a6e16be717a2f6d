"""AST node types for the one-variable expression language."""

from dataclasses import dataclass
from enum import Enum


class BinaryOperator(str, Enum):
    """Binary arithmetic operators."""

    ADD = "+"
    SUB = "-"
    MUL = "*"
    DIV = "/"
    POW = "^"


class Function(str, Enum):
    """Supported smooth unary functions."""

    SIN = "sin"
    COS = "cos"
    TAN = "tan"
    ATAN = "atan"
    EXP = "exp"
    LN = "ln"
    SQRT = "sqrt"
    SINH = "sinh"
    COSH = "cosh"
    TANH = "tanh"


CONSTANTS = {"pi"}


@dataclass(frozen=True)
class Expr:
    """Base class of all expression nodes.

    Nodes are immutable and compare structurally.
    """

    def __str__(self) -> str:
        return to_text(self)

    def depends_on_x(self) -> bool:
        """Whether the expression contains the variable."""
        raise NotImplementedError


@dataclass(frozen=True)
class Number(Expr):
    value: float

    def depends_on_x(self) -> bool:
        return False


@dataclass(frozen=True)
class Variable(Expr):
    name: str = "x"

    def depends_on_x(self) -> bool:
        return True


@dataclass(frozen=True)
class Constant(Expr):
    name: str = "pi"

    def depends_on_x(self) -> bool:
        return False


@dataclass(frozen=True)
class Negate(Expr):
    operand: Expr

    def depends_on_x(self) -> bool:
        return self.operand.depends_on_x()


@dataclass(frozen=True)
class BinaryOp(Expr):
    op: BinaryOperator
    left: Expr
    right: Expr

    def depends_on_x(self) -> bool:
        return self.left.depends_on_x() or self.right.depends_on_x()


@dataclass(frozen=True)
class Call(Expr):
    func: Function
    argument: Expr

    def depends_on_x(self) -> bool:
        return self.argument.depends_on_x()


def _atomic(e: Expr) -> str:
    text = to_text(e)
    if isinstance(e, Number | Variable | Constant | Call):
        return text
    return f"({text})" if not text.startswith("(") else text


def to_text(e: Expr) -> str:
    """Print an expression so that parsing the result reproduces the same tree.

    Binary operations are fully parenthesised; numbers use the shortest
    round-trip representation.
    """
    match e:
        case Number(value=value):
            return repr(float(value))
        case Variable(name=name) | Constant(name=name):
            return name
        case Negate(operand=operand):
            return f"-{_atomic(operand)}"
        case BinaryOp(op=op, left=left, right=right):
            return f"({to_text(left)} {op.value} {to_text(right)})"
        case Call(func=func, argument=argument):
            return f"{func.value}({to_text(argument)})"
    raise TypeError(f"Not an expression node: {e!r}")
