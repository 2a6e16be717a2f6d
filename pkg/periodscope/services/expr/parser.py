"""Recursive-descent parser for the expression language.

Grammar::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := unary ("^" factor)?
    unary  := "-" unary | atom
    atom   := NUMBER | "x" | "pi" | IDENT "(" expr ")" | "(" expr ")"

``^`` is right-associative and unary minus binds tighter than the base of
``^``, so ``-x^2`` is ``(-x)^2``.
"""

import math
import re
from dataclasses import dataclass
from enum import Enum

from periodscope.core.exceptions import (
    ExpressionSyntaxError,
    NumberOutOfRange,
    UnknownIdentifierError,
)
from periodscope.services.expr.nodes import (
    CONSTANTS,
    BinaryOp,
    BinaryOperator,
    Call,
    Constant,
    Expr,
    Function,
    Negate,
    Number,
    Variable,
)


class TokenKind(str, Enum):
    NUMBER = "NUMBER"
    IDENT = "IDENT"
    OP = "OP"
    END = "END"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    offset: int  # byte offset into the UTF-8 encoded input


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)

_ATOM_START = frozenset({"NUMBER", "x", "pi", "FUNCTION", "(", "-"})
_AFTER_OPERAND = frozenset({"+", "-", "*", "/", "^"})


def tokenize(text: str) -> list[Token]:
    """Split text into tokens, recording byte offsets."""
    tokens: list[Token] = []
    pos = 0
    while True:
        match = _TOKEN_RE.match(text, pos)
        if match is None or match.end() == match.start() or match.lastgroup is None:
            rest = text[pos:]
            stripped = rest.lstrip()
            at = pos + (len(rest) - len(stripped))
            if not stripped:
                tokens.append(Token(TokenKind.END, "", _byte_offset(text, len(text))))
                return tokens
            raise ExpressionSyntaxError(
                offset=_byte_offset(text, at),
                expected=_ATOM_START | _AFTER_OPERAND | {")"},
                found=repr(stripped[0]),
            )
        kind = {
            "number": TokenKind.NUMBER,
            "ident": TokenKind.IDENT,
            "op": TokenKind.OP,
        }[match.lastgroup]
        start = match.start(match.lastgroup)
        tokens.append(Token(kind, match.group(match.lastgroup), _byte_offset(text, start)))
        pos = match.end()


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


class Parser:
    """Recursive-descent parser over a token list."""

    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        if token.kind is not TokenKind.END:
            self.pos += 1
        return token

    def at_op(self, *ops: str) -> bool:
        token = self.peek()
        return token.kind is TokenKind.OP and token.text in ops

    def fail(self, expected: frozenset[str]) -> ExpressionSyntaxError:
        token = self.peek()
        found = "end of input" if token.kind is TokenKind.END else repr(token.text)
        return ExpressionSyntaxError(offset=token.offset, expected=expected, found=found)

    def expect_op(self, op: str, expected: frozenset[str]) -> None:
        if not self.at_op(op):
            raise self.fail(expected)
        self.advance()

    def parse(self) -> Expr:
        expr = self.parse_expr()
        if self.peek().kind is not TokenKind.END:
            raise self.fail(_AFTER_OPERAND | {"END"})
        return expr

    def parse_expr(self) -> Expr:
        left = self.parse_term()
        while self.at_op("+", "-"):
            op = BinaryOperator(self.advance().text)
            left = BinaryOp(op, left, self.parse_term())
        return left

    def parse_term(self) -> Expr:
        left = self.parse_factor()
        while self.at_op("*", "/"):
            op = BinaryOperator(self.advance().text)
            left = BinaryOp(op, left, self.parse_factor())
        return left

    def parse_factor(self) -> Expr:
        base = self.parse_unary()
        if self.at_op("^"):
            self.advance()
            return BinaryOp(BinaryOperator.POW, base, self.parse_factor())
        return base

    def parse_unary(self) -> Expr:
        if self.at_op("-"):
            self.advance()
            return Negate(self.parse_unary())
        return self.parse_atom()

    def parse_atom(self) -> Expr:
        token = self.peek()
        if token.kind is TokenKind.NUMBER:
            self.advance()
            value = float(token.text)
            if not math.isfinite(value):
                raise NumberOutOfRange(token.text, token.offset)
            return Number(value)
        if token.kind is TokenKind.IDENT:
            return self.parse_identifier()
        if self.at_op("("):
            self.advance()
            inner = self.parse_expr()
            self.expect_op(")", _AFTER_OPERAND | {")"})
            return inner
        raise self.fail(_ATOM_START)

    def parse_identifier(self) -> Expr:
        token = self.advance()
        if token.text == "x":
            return Variable()
        if token.text in CONSTANTS:
            return Constant(token.text)
        try:
            func = Function(token.text)
        except ValueError:
            raise UnknownIdentifierError(token.text, token.offset) from None
        self.expect_op("(", frozenset({"("}))
        argument = self.parse_expr()
        self.expect_op(")", _AFTER_OPERAND | {")"})
        return Call(func, argument)


def parse(text: str) -> Expr:
    """Parse expression text into an AST.

    Args:
        text: Expression in the variable ``x``

    Returns:
        The expression tree

    Raises:
        ExpressionSyntaxError: Text does not follow the grammar
        UnknownIdentifierError: Identifier is not a supported function or constant
    """
    return Parser(text).parse()
