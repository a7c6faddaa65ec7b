"""A small arithmetic expression language.

Formulas for the weight function, the nonlinearity, the boundary functional
and the bound functions are written as plain strings, e.g.::

    >>> e = parse("1 - exp(-t*sqrt(2))")
    >>> round(evaluate(e, {"t": 0.0}), 12)
    0.0

Grammar (Pratt parser, conventional precedence)::

    expr    := expr ('+'|'-') expr | expr ('*'|'/') expr
             | '-' expr | expr '^' expr | atom
    atom    := number | name | name '(' expr {',' expr} ')' | '(' expr ')'

``^`` is right-associative and binds tighter than unary minus, so ``-2^2``
is ``-(2^2)``. There is no implicit multiplication.

Evaluation works on floats and on numpy arrays alike. Domain violations
raise :class:`DomainError` instead of producing NaN.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

import numpy as np

from .errors import DomainError, ExprSyntaxError, UnboundVariable, UnknownIdentifier

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Const",
    "Neg",
    "BinOp",
    "Call",
    "parse",
    "evaluate",
    "to_source",
    "free_variables",
    "substitute",
    "FUNCTIONS",
    "CONSTANTS",
]

CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = {
    "exp": 1,
    "ln": 1,
    "sin": 1,
    "cos": 1,
    "tan": 1,
    "sqrt": 1,
    "abs": 1,
    "pow": 2,
}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
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
    name: str
    args: tuple["Expr", ...]


Expr = Union[Num, Var, Const, Neg, BinOp, Call]


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # 'num' | 'name' | 'op' | 'end'
    text: str
    offset: int  # byte offset into the UTF-8 source


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    byte_pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", byte_pos)
        text = m.group(0)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, text, byte_pos))
        pos = m.end()
        byte_pos += len(text.encode("utf-8"))
    tokens.append(_Token("end", "", byte_pos))
    return tokens


# ---------------------------------------------------------------------------
# parser

_INFIX_BP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_PREFIX_MINUS_BP = 25
_ATOM_START = frozenset({"number", "identifier", "(", "-"})


class _Parser:
    def __init__(self, source: str, variables: frozenset[str] | None):
        self.tokens = _tokenize(source)
        self.i = 0
        self.variables = variables

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> None:
        if self.tok.text != text or self.tok.kind == "end":
            raise ExprSyntaxError(f"unexpected {self._describe(self.tok)}", self.tok.offset, frozenset({text}))
        self.advance()

    @staticmethod
    def _describe(t: _Token) -> str:
        return "end of input" if t.kind == "end" else f"token {t.text!r}"

    def parse(self) -> Expr:
        node = self.expression(0)
        if self.tok.kind != "end":
            raise ExprSyntaxError(
                f"unexpected {self._describe(self.tok)}",
                self.tok.offset,
                frozenset({"operator", "end of input"}),
            )
        return node

    def expression(self, rbp: int) -> Expr:
        left = self.nud(self.advance())
        while self.tok.kind == "op" and _INFIX_BP.get(self.tok.text, 0) > rbp:
            op = self.advance().text
            bp = _INFIX_BP[op]
            # right-assoc power: parse the right side at a lower binding power
            right = self.expression(bp - 1 if op == "^" else bp)
            left = BinOp(op, left, right)
        return left

    def nud(self, t: _Token) -> Expr:
        if t.kind == "num":
            return Num(float(t.text))
        if t.kind == "op" and t.text == "-":
            return Neg(self.expression(_PREFIX_MINUS_BP))
        if t.kind == "op" and t.text == "(":
            inner = self.expression(0)
            self.expect(")")
            return inner
        if t.kind == "name":
            if self.tok.text == "(" and self.tok.kind == "op":
                if t.text not in FUNCTIONS:
                    raise UnknownIdentifier(t.text, t.offset)
                self.advance()
                args = [self.expression(0)]
                while self.tok.text == "," and self.tok.kind == "op":
                    self.advance()
                    args.append(self.expression(0))
                self.expect(")")
                if len(args) != FUNCTIONS[t.text]:
                    raise ExprSyntaxError(
                        f"{t.text} takes {FUNCTIONS[t.text]} argument(s), got {len(args)}", t.offset
                    )
                return Call(t.text, tuple(args))
            if t.text in CONSTANTS:
                return Const(t.text)
            if t.text in FUNCTIONS:
                raise ExprSyntaxError(f"function {t.text!r} used without arguments", t.offset, frozenset({"("}))
            if self.variables is not None and t.text not in self.variables:
                raise UnknownIdentifier(t.text, t.offset)
            return Var(t.text)
        raise ExprSyntaxError(f"unexpected {self._describe(t)}", t.offset, _ATOM_START)


def parse(source: str, variables: Iterable[str] | None = None) -> Expr:
    """Parse ``source`` into an expression tree.

    If ``variables`` is given, any other free identifier raises
    :class:`UnknownIdentifier`.
    """
    allowed = frozenset(variables) if variables is not None else None
    return _Parser(source, allowed).parse()


# ---------------------------------------------------------------------------
# printing

_ATOM_PREC = 100


def _prec(node: Expr) -> int:
    if isinstance(node, BinOp):
        return _INFIX_BP[node.op]
    if isinstance(node, Neg):
        return _PREFIX_MINUS_BP
    return _ATOM_PREC


def _fmt_num(x: float) -> str:
    if not math.isfinite(x) or x < 0:
        raise ValueError(f"literal {x!r} has no source form")
    if x.is_integer() and x < 1e15:
        return str(int(x))
    return repr(float(x))


def to_source(node: Expr, *, full_parens: bool = False) -> str:
    """Render ``node`` back to source text.

    By default only the parentheses required to reproduce the same tree are
    emitted; ``full_parens=True`` wraps every compound subexpression.
    """

    def wrap(child: Expr, needed: bool) -> str:
        s = to_source(child, full_parens=full_parens)
        return f"({s})" if needed or (full_parens and _prec(child) < _ATOM_PREC) else s

    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Neg):
        return "-" + wrap(node.operand, _prec(node.operand) <= _PREFIX_MINUS_BP)
    if isinstance(node, Call):
        return f"{node.name}(" + ", ".join(to_source(a, full_parens=full_parens) for a in node.args) + ")"
    p = _INFIX_BP[node.op]
    if node.op == "^":
        left = wrap(node.left, _prec(node.left) <= p)
        right = wrap(node.right, _prec(node.right) < p)
    else:
        left = wrap(node.left, _prec(node.left) < p)
        right = wrap(node.right, _prec(node.right) <= p)
    return f"{left} {node.op} {right}" if node.op in "+-" else f"{left}{node.op}{right}"


# ---------------------------------------------------------------------------
# analysis helpers


def free_variables(node: Expr) -> frozenset[str]:
    if isinstance(node, Var):
        return frozenset({node.name})
    if isinstance(node, Neg):
        return free_variables(node.operand)
    if isinstance(node, BinOp):
        return free_variables(node.left) | free_variables(node.right)
    if isinstance(node, Call):
        out: frozenset[str] = frozenset()
        for a in node.args:
            out |= free_variables(a)
        return out
    return frozenset()


def substitute(node: Expr, values: Mapping[str, float]) -> Expr:
    """Replace variables named in ``values`` by numeric literals."""
    if isinstance(node, Var):
        if node.name in values:
            v = float(values[node.name])
            return Num(v) if v >= 0 else Neg(Num(-v))
        return node
    if isinstance(node, Neg):
        return Neg(substitute(node.operand, values))
    if isinstance(node, BinOp):
        return BinOp(node.op, substitute(node.left, values), substitute(node.right, values))
    if isinstance(node, Call):
        return Call(node.name, tuple(substitute(a, values) for a in node.args))
    return node


# ---------------------------------------------------------------------------
# evaluation


def _first_bad(x, mask):
    arr = np.asarray(x)
    if arr.ndim == 0:
        return float(arr)
    return float(arr[np.asarray(mask)].flat[0])


def _check_finite(op: str, result, argument):
    if not np.all(np.isfinite(result)):
        raise DomainError(op, _first_bad(argument, ~np.isfinite(result)) if np.ndim(argument) else argument)
    return result


def _power(base, expo):
    b, x = np.broadcast_arrays(np.asarray(base, dtype=float), np.asarray(expo, dtype=float))
    bad = ((b < 0) & (x != np.round(x))) | ((b == 0) & (x < 0))
    if np.any(bad):
        raise DomainError("^", _first_bad(b, bad))
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        out = np.power(b, x)
    return _check_finite("^", out, b)


def _apply_call(name: str, args: list):
    x = args[0]
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if name == "exp":
            return _check_finite("exp", np.exp(x), x)
        if name == "ln":
            if np.any(np.asarray(x) <= 0):
                raise DomainError("ln", _first_bad(x, np.asarray(x) <= 0))
            return np.log(x)
        if name == "sqrt":
            if np.any(np.asarray(x) < 0):
                raise DomainError("sqrt", _first_bad(x, np.asarray(x) < 0))
            return np.sqrt(x)
        if name == "sin":
            return _check_finite("sin", np.sin(x), x)
        if name == "cos":
            return _check_finite("cos", np.cos(x), x)
        if name == "tan":
            return _check_finite("tan", np.tan(x), x)
        if name == "abs":
            return np.abs(x)
        if name == "pow":
            return _power(args[0], args[1])
    raise UnknownIdentifier(name)


def _eval(node: Expr, env: Mapping[str, object]):
    if isinstance(node, Num):
        return np.float64(node.value)
    if isinstance(node, Const):
        return np.float64(CONSTANTS[node.name])
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise UnboundVariable(node.name) from None
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, Call):
        return _apply_call(node.name, [_eval(a, env) for a in node.args])
    left = _eval(node.left, env)
    right = _eval(node.right, env)
    if node.op == "+":
        return _check_finite("+", np.add(left, right), left)
    if node.op == "-":
        return _check_finite("-", np.subtract(left, right), left)
    if node.op == "*":
        with np.errstate(over="ignore", invalid="ignore"):
            return _check_finite("*", np.multiply(left, right), left)
    if node.op == "/":
        if np.any(np.asarray(right) == 0):
            raise DomainError("/", 0.0)
        with np.errstate(over="ignore"):
            return _check_finite("/", np.divide(left, right), left)
    return _power(left, right)


def evaluate(node: Expr, env: Mapping[str, object] | None = None):
    """Evaluate ``node`` with variables taken from ``env``.

    Scalars in, ``float`` out; arrays in, broadcast ``ndarray`` out.
    """
    env = {} if env is None else env
    converted = {k: (np.asarray(v, dtype=float) if np.ndim(v) else np.float64(v)) for k, v in env.items()}
    out = _eval(node, converted)
    if np.ndim(out) == 0:
        return float(out)
    return np.asarray(out, dtype=float)
