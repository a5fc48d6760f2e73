"""A small arithmetic-expression language for coefficient functions.

Grammar (EBNF)::

    expr    = term , { ("+" | "-") , term } ;
    term    = unary , { ("*" | "/") , unary } ;
    unary   = "-" , unary | power ;
    power   = atom , [ "^" , unary ] ;
    atom    = number | name | call | "(" , expr , ")" ;
    call    = func , "(" , expr , { "," , expr } , ")" ;
    func    = "pow" | "qgamma" | "qsin" | "qcos" ;
    name    = "x" | "q" | "a" ;
    number  = digit , { digit } , [ "." , { digit } ] , [ exponent ]
            | "." , digit , { digit } , [ exponent ] ;
    exponent = ("e" | "E") , [ "+" | "-" ] , digit , { digit } ;

``^`` is right associative and binds tighter than unary minus, so ``-x^2``
means ``-(x^2)`` and ``2^-1`` is accepted.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Tuple, Union

import numpy as np

from .qcore import qgamma
from .qspecial import q_cos, q_sin


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class ExprEvalError(ArithmeticError):
    """Division by zero, a complex-valued power, or a function pole."""


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    args: Tuple["Expr", ...]


Expr = Union[Num, Var, Neg, BinOp, Call]

_ARITY = {"pow": 2, "qgamma": 1, "qsin": 1, "qcos": 1}
_NAMES = ("x", "q", "a")
_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(src: str):
    tokens, pos = [], 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if m is None:
            bad = pos + len(src[pos:]) - len(src[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {src[bad]!r}", bad)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, text=None):
        tok = self.tokens[self.i]
        if text is not None and tok[1] != text:
            what = "end of input" if tok[0] == "end" else repr(tok[1])
            raise ExprSyntaxError(f"expected {text!r}, found {what}", tok[2])
        self.i += 1
        return tok

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[1] == "-" and self.peek()[0] == "op":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, text, pos = self.peek()
        if kind == "num":
            self.take()
            return Num(float(text))
        if kind == "name":
            self.take()
            if text in _ARITY:
                self.take("(")
                args = [self.expr()]
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.expr())
                self.take(")")
                if len(args) != _ARITY[text]:
                    raise ExprSyntaxError(f"{text} takes {_ARITY[text]} argument(s)", pos)
                return Call(text, tuple(args))
            if text in _NAMES:
                return Var(text)
            raise ExprSyntaxError(f"unknown identifier {text!r}", pos)
        if text == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        what = "end of input" if kind == "end" else repr(text)
        raise ExprSyntaxError(f"unexpected {what}", pos)


def parse(src: str) -> Expr:
    """Parse ``src`` into an expression tree."""
    parser = _Parser(src)
    node = parser.expr()
    kind, text, pos = parser.peek()
    if kind != "end":
        raise ExprSyntaxError(f"unexpected {text!r}", pos)
    return node


def _power(base: float, expo: float) -> float:
    if base == 0.0 and expo < 0:
        raise ExprEvalError("zero raised to a negative power")
    if base < 0 and not float(expo).is_integer():
        raise ExprEvalError("negative base with non-integer exponent")
    try:
        return math.pow(base, expo)
    except OverflowError as exc:
        raise ExprEvalError("power overflow") from exc


def evaluate(e: Expr, x: float, env: Mapping[str, float]) -> float:
    """Evaluate ``e`` at ``x`` with ``env`` supplying ``q`` and ``a``."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        if e.name == "x":
            return float(x)
        try:
            return float(env[e.name])
        except KeyError:
            raise ExprEvalError(f"no value bound for {e.name!r}") from None
    if isinstance(e, Neg):
        return -evaluate(e.operand, x, env)
    if isinstance(e, BinOp):
        left, right = evaluate(e.left, x, env), evaluate(e.right, x, env)
        if e.op == "+":
            return left + right
        if e.op == "-":
            return left - right
        if e.op == "*":
            return left * right
        if e.op == "/":
            if right == 0.0:
                raise ExprEvalError("division by zero")
            return left / right
        return _power(left, right)
    args = [evaluate(arg, x, env) for arg in e.args]
    q = float(env.get("q", math.nan))
    if e.func == "pow":
        return _power(*args)
    if e.func == "qgamma":
        try:
            return qgamma(args[0], q)
        except (ValueError, ArithmeticError) as exc:
            raise ExprEvalError(str(exc)) from exc
    fn = q_sin if e.func == "qsin" else q_cos
    return float(fn(args[0], q))


# ``eval`` mirrors the operation name used in the documentation
eval = evaluate  # noqa: A001


def evaluate_array(e: Expr, xs, env: Mapping[str, float]) -> np.ndarray:
    return np.array([evaluate(e, float(t), env) for t in np.ravel(xs)]).reshape(np.shape(xs))


def is_constant(e: Expr) -> bool:
    """True if ``e`` does not mention ``x``."""
    if isinstance(e, Num):
        return True
    if isinstance(e, Var):
        return e.name != "x"
    if isinstance(e, Neg):
        return is_constant(e.operand)
    if isinstance(e, BinOp):
        return is_constant(e.left) and is_constant(e.right)
    return all(is_constant(arg) for arg in e.args)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def to_source(e: Expr) -> str:
    """Print ``e`` so that ``parse(to_source(e))`` evaluates identically."""
    return _show(e, 0)


def _show(e: Expr, ctx: int) -> str:
    if isinstance(e, Num):
        text = repr(e.value)
        if text in ("inf", "nan", "-inf"):
            raise ValueError("non-finite literal cannot be printed")
        if e.value < 0:
            return f"({text})"
        return text
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({', '.join(_show(a, 0) for a in e.args)})"
    if isinstance(e, Neg):
        out = "-" + _show(e.operand, _PREC["neg"])
        return f"({out})" if ctx > _PREC["neg"] else out
    prec = _PREC[e.op]
    if e.op == "^":
        # left operand must bind tighter; right side is a unary expression
        out = f"{_show(e.left, prec + 1)}^{_show(e.right, _PREC['neg'])}"
    else:
        out = f"{_show(e.left, prec)} {e.op} {_show(e.right, prec + 1)}"
    return f"({out})" if ctx > prec else out
