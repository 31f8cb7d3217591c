"""Expression language for psi(x, y, z, p, q) and initial-curve components.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | atom ('^' digits)?
    atom   := number | ident | ident '(' expr ')' | '(' expr ')'

Identifiers are the declared variables and the functions sin, cos, exp,
sqrt, ln. Expressions evaluate over floats or :class:`~charpit.weil.WeilElement`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from charpit import weil
from charpit.errors import EvalError, ParseError
from charpit.weil import WeilElement

FUNCTIONS = ("sin", "cos", "exp", "sqrt", "ln")
PDE_VARIABLES = ("x", "y", "z", "p", "q")


class Expr:
    """Base class of AST nodes. Nodes are frozen dataclasses."""

    precedence = 5

    def __str__(self) -> str:
        return to_source(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    @property
    def precedence(self) -> int:  # type: ignore[override]
        return 1 if self.op in "+-" else 2


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr
    precedence = 3


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int
    precedence = 4


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr


# lexer

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


@dataclass
class _Token:
    kind: str
    text: str
    offset: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        if source[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(source, pos)
        if m is None or m.lastgroup is None:
            raise ParseError(f"unexpected character {source[pos]!r}", _byte_offset(source, pos))
        start = m.start(m.lastgroup)
        tokens.append(_Token(m.lastgroup, m.group(m.lastgroup), _byte_offset(source, start)))
        pos = m.end()
    tokens.append(_Token("end", "", _byte_offset(source, n)))
    return tokens


def _byte_offset(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


class _Parser:
    def __init__(self, source: str, variables: frozenset[str]):
        self.tokens = _tokenize(source)
        self.pos = 0
        self.variables = variables

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str) -> None:
        if self.tok.text != text:
            what = "end of input" if self.tok.kind == "end" else repr(self.tok.text)
            raise ParseError(f"expected {text!r}, found {what}", self.tok.offset)
        self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            raise ParseError(f"trailing input {self.tok.text!r}", self.tok.offset)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.advance().text
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.tok.text in ("*", "/") and self.tok.kind == "op":
            op = self.advance().text
            e = BinOp(op, e, self.factor())
        return e

    def factor(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            operand = self.factor()
            # only literals fold, so to_source round-trips every other tree
            return Num(-operand.value) if isinstance(operand, Num) else Neg(operand)
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            t = self.tok
            if t.kind != "num" or not t.text.isdigit():
                raise ParseError("exponent must be a nonnegative integer literal", t.offset)
            self.advance()
            return Pow(base, int(t.text))
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(float(t.text))
        if t.kind == "ident":
            self.advance()
            if t.text in FUNCTIONS:
                if self.tok.text != "(":
                    raise ParseError(f"function {t.text!r} takes exactly one argument", self.tok.offset)
                self.advance()
                arg = self.expr()
                if self.tok.text != ")":
                    raise ParseError(f"function {t.text!r} takes exactly one argument", self.tok.offset)
                self.advance()
                return Call(t.text, arg)
            if t.text not in self.variables:
                raise ParseError(f"unknown identifier {t.text!r}", t.offset)
            if self.tok.text == "(":
                raise ParseError(f"{t.text!r} is a variable, not a function", self.tok.offset)
            return Var(t.text)
        if t.kind == "op" and t.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        what = "end of input" if t.kind == "end" else repr(t.text)
        raise ParseError(f"unexpected {what}", t.offset)


def parse(source: str, variables: Iterable[str] = PDE_VARIABLES) -> Expr:
    """Parse ``source`` into an :class:`Expr` over the declared ``variables``."""
    variables = frozenset(variables)
    clash = variables & set(FUNCTIONS)
    if clash:
        raise ValueError(f"variable names collide with functions: {sorted(clash)}")
    return _Parser(source, variables).parse()


# printing


def to_source(e: Expr) -> str:
    """Render ``e`` so that ``parse(to_source(e))`` rebuilds the same tree."""
    if isinstance(e, Num):
        return repr(e.value) if math.isfinite(e.value) else str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({to_source(e.arg)})"
    if isinstance(e, Neg):
        inner = to_source(e.operand)
        if _prec(e.operand) < Neg.precedence or inner.startswith("-"):
            inner = f"({inner})"
        return "-" + inner
    if isinstance(e, Pow):
        base = to_source(e.base)
        if _prec(e.base) < 5:
            base = f"({base})"
        return f"{base}^{e.exponent}"
    if isinstance(e, BinOp):
        left = to_source(e.left)
        right = to_source(e.right)
        if _prec(e.left) < e.precedence:
            left = f"({left})"
        if _prec(e.right) <= e.precedence:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an expression node: {e!r}")


def _prec(e: Expr) -> int:
    if isinstance(e, Num) and (e.value < 0 or math.copysign(1.0, e.value) < 0):
        # a negative literal prints with a leading '-', i.e. as a unary minus
        return Neg.precedence
    return e.precedence


# smart constructors: constant folding and zero/one elimination


def _is_num(e: Expr, v: float | None = None) -> bool:
    return isinstance(e, Num) and (v is None or e.value == v)


def neg(a: Expr) -> Expr:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def add(a: Expr, b: Expr) -> Expr:
    if _is_num(a) and _is_num(b):
        return Num(a.value + b.value)
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    return BinOp("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is_num(a) and _is_num(b):
        return Num(a.value - b.value)
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return neg(b)
    return BinOp("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _is_num(a) and _is_num(b):
        return Num(a.value * b.value)
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return Num(0.0)
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    return BinOp("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is_num(a) and _is_num(b) and b.value != 0.0:
        return Num(a.value / b.value)
    if _is_num(a, 0.0):
        return Num(0.0)
    if _is_num(b, 1.0):
        return a
    return BinOp("/", a, b)


def power(a: Expr, n: int) -> Expr:
    if n == 0:
        return Num(1.0)
    if n == 1:
        return a
    if isinstance(a, Num):
        return Num(weil.ipow(a.value, n))
    return Pow(a, n)


def call(func: str, a: Expr) -> Expr:
    return Call(func, a)


# evaluation

Scalar = Union[float, WeilElement]

_REAL_FUNCS = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
    "sqrt": math.sqrt,
    "ln": math.log,
}


def _apply(func: str, v: Scalar) -> Scalar:
    if isinstance(v, WeilElement):
        return weil.evaluate_smooth(func, v)
    if func in ("sqrt", "ln") and v <= 0.0 and not (func == "sqrt" and v == 0.0):
        raise EvalError(f"{func} undefined at {v!r}")
    try:
        return _REAL_FUNCS[func](v)
    except (ValueError, OverflowError) as exc:
        raise EvalError(f"{func}({v!r}) failed: {exc}") from None


def _divide(a: Scalar, b: Scalar, inv_tol: float) -> Scalar:
    if isinstance(b, WeilElement):
        if abs(b.constant_part) <= inv_tol:
            raise EvalError(f"division by non-invertible element (constant part {b.constant_part!r})")
        return a / b
    if b == 0.0:
        raise EvalError("division by zero")
    return a / b


def evaluate(e: Expr, env: Mapping[str, Scalar], inv_tol: float = weil.INV_TOL) -> Scalar:
    """Value of ``e`` with variables bound by ``env``."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise EvalError(f"no value bound for variable {e.name!r}") from None
    if isinstance(e, BinOp):
        a = evaluate(e.left, env, inv_tol)
        b = evaluate(e.right, env, inv_tol)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        return _divide(a, b, inv_tol)
    if isinstance(e, Neg):
        return -evaluate(e.operand, env, inv_tol)
    if isinstance(e, Pow):
        return weil.ipow(evaluate(e.base, env, inv_tol), e.exponent)
    if isinstance(e, Call):
        return _apply(e.func, evaluate(e.arg, env, inv_tol))
    raise TypeError(f"not an expression node: {e!r}")


def differentiate(e: Expr, v: str) -> Expr:
    """Symbolic partial derivative of ``e`` with respect to variable ``v``."""
    if isinstance(e, Num):
        return Num(0.0)
    if isinstance(e, Var):
        return Num(1.0 if e.name == v else 0.0)
    if isinstance(e, Neg):
        return neg(differentiate(e.operand, v))
    if isinstance(e, BinOp):
        da = differentiate(e.left, v)
        db = differentiate(e.right, v)
        if e.op == "+":
            return add(da, db)
        if e.op == "-":
            return sub(da, db)
        if e.op == "*":
            return add(mul(da, e.right), mul(e.left, db))
        # (a/b)' = a'/b - a b'/b^2
        return sub(div(da, e.right), div(mul(e.left, db), power(e.right, 2)))
    if isinstance(e, Pow):
        du = differentiate(e.base, v)
        return mul(mul(Num(float(e.exponent)), power(e.base, e.exponent - 1)), du)
    if isinstance(e, Call):
        du = differentiate(e.arg, v)
        u = e.arg
        if e.func == "sin":
            outer = call("cos", u)
        elif e.func == "cos":
            outer = neg(call("sin", u))
        elif e.func == "exp":
            outer = call("exp", u)
        elif e.func == "sqrt":
            return div(du, mul(Num(2.0), call("sqrt", u)))
        elif e.func == "ln":
            return div(du, u)
        else:
            raise ValueError(f"unknown function {e.func!r}")
        return mul(outer, du)
    raise TypeError(f"not an expression node: {e!r}")


def variables_of(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, BinOp):
        return variables_of(e.left) | variables_of(e.right)
    if isinstance(e, Neg):
        return variables_of(e.operand)
    if isinstance(e, Pow):
        return variables_of(e.base)
    if isinstance(e, Call):
        return variables_of(e.arg)
    return set()


def taylor_function(e: Expr, v: str) -> weil.TaylorFunction:
    """Taylor coefficients of the one-variable expression ``e`` via repeated differentiation."""

    def coeffs(c: float, m: int) -> list[float]:
        out = []
        d = e
        for k in range(m + 1):
            out.append(float(evaluate(d, {v: c})) / math.factorial(k))
            d = differentiate(d, v)
        return out

    return coeffs


@dataclass(frozen=True)
class Pde:
    """psi over (x, y, z, p, q) together with its five symbolic partials."""

    psi: Expr
    psi_x: Expr
    psi_y: Expr
    psi_z: Expr
    psi_p: Expr
    psi_q: Expr
    source: str = field(default="", compare=False)

    @property
    def partials(self) -> tuple[Expr, Expr, Expr, Expr, Expr]:
        return (self.psi_x, self.psi_y, self.psi_z, self.psi_p, self.psi_q)

    def value(self, x, y, z, p, q, inv_tol: float = weil.INV_TOL) -> Scalar:
        return evaluate(self.psi, dict(x=x, y=y, z=z, p=p, q=q), inv_tol)

    def gradient(self, x, y, z, p, q, inv_tol: float = weil.INV_TOL) -> tuple[Scalar, ...]:
        env = dict(x=x, y=y, z=z, p=p, q=q)
        return tuple(evaluate(d, env, inv_tol) for d in self.partials)


def make_pde(source: str | Expr) -> Pde:
    """Parse ``source`` over (x, y, z, p, q) and precompute the five partials."""
    psi = parse(source) if isinstance(source, str) else source
    text = source if isinstance(source, str) else to_source(psi)
    parts = [differentiate(psi, v) for v in PDE_VARIABLES]
    return Pde(psi, *parts, source=text)


def weil_gradient(e: Expr, env: Mapping[str, float], variables: Iterable[str]) -> tuple[float, ...]:
    """Partials of ``e`` read off as the linear coefficients of ``e(v + d)``, d generic in D(n)."""
    variables = tuple(variables)
    spec = weil.BlockSpec.of((len(variables), 1))
    shifted = dict(env)
    for i, v in enumerate(variables):
        shifted[v] = env[v] + weil.generator(spec, 0, i)
    value = weil.lift(evaluate(e, shifted), spec)
    return weil.kl_decompose(value).linear
