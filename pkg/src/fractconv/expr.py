"""A small expression language for the seed, base and scale functions.

Grammar (lowest to highest precedence)::

    expr   := expr ('+' | '-') expr
            | expr ('*' | '/') expr
            | '-' expr
            | expr '^' expr          (right associative)
            | number | 'x' | 'pi' | 'e' | name '(' expr ')' | '(' expr ')'

Implicit multiplication is not supported, so ``3x`` is a syntax error.
Evaluation is IEEE double arithmetic; any operation whose result would be
non-finite or mathematically undefined raises :class:`DomainError`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import FractConvError

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "abs", "sqrt")
CONSTANTS = {"pi": math.pi, "e": math.e}

# integer exponents up to this magnitude are evaluated by repeated multiplication
MAX_INT_POWER = 64


class ExprSyntaxError(FractConvError, ValueError):
    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        self.offset = offset
        self.expected = expected
        detail = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class DomainError(FractConvError, ArithmeticError):
    def __init__(self, message: str, subexpression: str, x: float):
        self.subexpression = subexpression
        self.x = x
        super().__init__(f"{message} in '{subexpression}' at x={x!r}")


# --------------------------------------------------------------------- AST


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Expression"


Expression = Union[Num, Var, Const, Neg, BinOp, Call]


# ----------------------------------------------------------------- lexing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # number | ident | op | end
    text: str
    offset: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


# ---------------------------------------------------------------- parsing

_INFIX_POWER = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_PREFIX_POWER = 30
_OPERAND_START = ("number", "identifier", "'('", "'-'")


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> None:
        tok = self.peek()
        if tok.text != text or tok.kind == "end":
            raise ExprSyntaxError(f"unexpected {_describe(tok)}", tok.offset, (f"'{text}'",))
        self.advance()

    def expression(self, rbp: int = 0) -> Expression:
        left = self.prefix()
        while True:
            tok = self.peek()
            lbp = _INFIX_POWER.get(tok.text, 0) if tok.kind == "op" else 0
            if lbp <= rbp:
                break
            self.advance()
            # right associativity for '^' via a lowered binding power
            right = self.expression(lbp - 1 if tok.text == "^" else lbp)
            left = BinOp(tok.text, left, right)
        return left

    def prefix(self) -> Expression:
        tok = self.advance()
        if tok.kind == "number":
            value = float(tok.text)
            if not math.isfinite(value):
                raise ExprSyntaxError(f"numeric literal {tok.text!r} overflows", tok.offset)
            return Num(value)
        if tok.kind == "ident":
            name = tok.text
            if name == "x":
                return Var()
            if name in CONSTANTS:
                return Const(name)
            if name in FUNCTIONS:
                self.expect("(")
                arg = self.expression()
                self.expect(")")
                return Call(name, arg)
            raise ExprSyntaxError(f"unknown identifier {name!r}", tok.offset)
        if tok.text == "-" and tok.kind == "op":
            return Neg(self.expression(_PREFIX_POWER))
        if tok.text == "(" and tok.kind == "op":
            inner = self.expression()
            self.expect(")")
            return inner
        raise ExprSyntaxError(f"unexpected {_describe(tok)}", tok.offset, _OPERAND_START)


def _describe(tok: _Token) -> str:
    return "end of input" if tok.kind == "end" else repr(tok.text)


def parse(text: str) -> Expression:
    """Parse ``text`` into an expression tree.

    Raises ExprSyntaxError carrying the offset of the offending token and
    the set of tokens that would have been accepted there.
    """
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0, _OPERAND_START)
    parser = _Parser(text)
    tree = parser.expression()
    tok = parser.peek()
    if tok.kind != "end":
        raise ExprSyntaxError(
            f"unexpected {_describe(tok)}", tok.offset, ("operator", "')'", "end of input")
        )
    return tree


# --------------------------------------------------------------- printing

_ATOM = 100


def _precedence(e: Expression) -> int:
    if isinstance(e, BinOp):
        return _INFIX_POWER[e.op]
    if isinstance(e, Neg):
        return _PREFIX_POWER
    return _ATOM


def to_text(e: Expression) -> str:
    """Canonical text form; ``parse(to_text(e)) == e`` for parsed trees."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Const):
        return e.name
    if isinstance(e, Call):
        return f"{e.name}({to_text(e.arg)})"
    if isinstance(e, Neg):
        inner = to_text(e.operand)
        if _precedence(e.operand) < _PREFIX_POWER:
            inner = f"({inner})"
        return f"-{inner}"
    prec = _INFIX_POWER[e.op]
    left, right = to_text(e.left), to_text(e.right)
    lp, rp = _precedence(e.left), _precedence(e.right)
    if lp < prec or (e.op == "^" and lp == prec):
        left = f"({left})"
    if rp < prec or (e.op != "^" and rp == prec):
        right = f"({right})"
    return f"{left} {e.op} {right}"


# ------------------------------------------------------------- evaluation


def _int_power(a, k: int):
    r = a
    for _ in range(k - 1):
        r = r * a
    return r


def _scalar_power(a: float, y: float, node: Expression, x: float) -> float:
    if y.is_integer() and abs(y) <= MAX_INT_POWER:
        k = int(y)
        if k == 0:
            return 1.0
        r = _int_power(a, abs(k))
        if k < 0:
            if r == 0.0:
                raise DomainError("zero raised to a negative power", to_text(node), x)
            r = 1.0 / r
        return r
    if a < 0.0:
        raise DomainError("negative base with non-integer exponent", to_text(node), x)
    if a == 0.0:
        if y > 0.0:
            return 0.0
        raise DomainError("zero raised to a non-positive power", to_text(node), x)
    return math.exp(y * math.log(a))


_SCALAR_FUNCS: dict[str, Callable[[float], float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "log": math.log,
    "abs": abs,
    "sqrt": math.sqrt,
}


def _finite(value: float, node: Expression, x: float) -> float:
    if not math.isfinite(value):
        raise DomainError("non-finite result", to_text(node), x)
    return value


def _eval(e: Expression, x: float) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return x
    if isinstance(e, Const):
        return CONSTANTS[e.name]
    if isinstance(e, Neg):
        return -_eval(e.operand, x)
    if isinstance(e, Call):
        a = _eval(e.arg, x)
        if e.name == "log" and a <= 0.0:
            raise DomainError("log of non-positive argument", to_text(e), x)
        if e.name == "sqrt" and a < 0.0:
            raise DomainError("sqrt of negative argument", to_text(e), x)
        try:
            return _finite(_SCALAR_FUNCS[e.name](a), e, x)
        except OverflowError:
            raise DomainError("overflow", to_text(e), x) from None
    a = _eval(e.left, x)
    b = _eval(e.right, x)
    if e.op == "+":
        r = a + b
    elif e.op == "-":
        r = a - b
    elif e.op == "*":
        r = a * b
    elif e.op == "/":
        if b == 0.0:
            raise DomainError("division by zero", to_text(e), x)
        r = a / b
    else:
        try:
            r = _scalar_power(a, b, e, x)
        except OverflowError:
            raise DomainError("overflow", to_text(e), x) from None
    return _finite(r, e, x)


def evaluate(e: Expression, x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError("non-finite abscissa", to_text(e), x)
    return _eval(e, x)


# vectorized twin of _eval; kept operation-for-operation identical so that
# sample() and evaluate() agree bitwise

_ARRAY_FUNCS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "abs": np.abs,
    "sqrt": np.sqrt,
}


# numpy's SIMD transcendental kernels may differ from libm in the last ulp
_LIBM = ("sin", "cos", "tan", "exp", "log")


def _libm(name: str, a: np.ndarray) -> np.ndarray:
    fn = _SCALAR_FUNCS[name]
    out = np.empty_like(a)
    for i, v in enumerate(a.tolist()):
        try:
            out[i] = fn(v)
        except (OverflowError, ValueError):
            out[i] = np.inf
    return out


def _raise_at(mask: np.ndarray, xs: np.ndarray, message: str, node: Expression) -> None:
    if np.any(mask):
        i = int(np.argmax(mask))
        raise DomainError(message, to_text(node), float(xs[i]))


def _eval_array(e: Expression, xs: np.ndarray) -> np.ndarray:
    if isinstance(e, Num):
        return np.full(xs.shape, e.value)
    if isinstance(e, Var):
        return xs.copy()
    if isinstance(e, Const):
        return np.full(xs.shape, CONSTANTS[e.name])
    if isinstance(e, Neg):
        return -_eval_array(e.operand, xs)
    with np.errstate(all="ignore"):
        if isinstance(e, Call):
            a = _eval_array(e.arg, xs)
            if e.name == "log":
                _raise_at(a <= 0.0, xs, "log of non-positive argument", e)
            if e.name == "sqrt":
                _raise_at(a < 0.0, xs, "sqrt of negative argument", e)
            r = _libm(e.name, a) if e.name in _LIBM else _ARRAY_FUNCS[e.name](a)
        else:
            a = _eval_array(e.left, xs)
            b = _eval_array(e.right, xs)
            if e.op == "+":
                r = a + b
            elif e.op == "-":
                r = a - b
            elif e.op == "*":
                r = a * b
            elif e.op == "/":
                _raise_at(b == 0.0, xs, "division by zero", e)
                r = a / b
            else:
                r = _array_power(a, b, e, xs)
    _raise_at(~np.isfinite(r), xs, "non-finite result", e)
    return r


def _array_power(a: np.ndarray, b: np.ndarray, node: Expression, xs: np.ndarray) -> np.ndarray:
    if b.size and np.all(b == b.flat[0]):
        y = float(b.flat[0])
        if y.is_integer() and abs(y) <= MAX_INT_POWER:
            k = int(y)
            if k == 0:
                return np.ones_like(a)
            r = _int_power(a, abs(k))
            if k < 0:
                _raise_at(r == 0.0, xs, "zero raised to a negative power", node)
                r = 1.0 / r
            return r
    out = np.empty_like(a)
    for i, (ai, bi) in enumerate(zip(a.tolist(), b.tolist())):
        try:
            out[i] = _scalar_power(ai, bi, node, float(xs[i]))
        except OverflowError:
            out[i] = np.inf
    return out


def sample(e: Expression, grid) -> np.ndarray:
    """Evaluate ``e`` at every grid point; the first domain error propagates."""
    xs = np.asarray(grid, dtype=float).reshape(-1)
    _raise_at(~np.isfinite(xs), xs, "non-finite abscissa", e)
    return _eval_array(e, xs)


def compile_expression(text: str) -> Callable[[np.ndarray], np.ndarray]:
    """Parse once and return a vectorized callable ``xs -> values``."""
    tree = parse(text)

    def fn(xs):
        return sample(tree, xs)

    fn.expression = tree  # type: ignore[attr-defined]
    fn.text = text  # type: ignore[attr-defined]
    return fn
