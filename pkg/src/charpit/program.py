"""Compiled form of a Pde for the strip kernels.

Six expressions (psi and its partials in x, y, z, p, q) are flattened into
one postfix tape that the Cython kernel interprets, and into Python closures
for the pure-Python fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from charpit.parser import BinOp, Call, Expr, Neg, Num, Pde, Pow, Var, PDE_VARIABLES

# opcodes shared with _ckernels.pyx
CONST, VAR, ADD, SUB, MUL, DIV, NEG, POW, SIN, COS, EXP, SQRT, LN = range(13)

_BINARY = {"+": ADD, "-": SUB, "*": MUL, "/": DIV}
_UNARY = {"sin": SIN, "cos": COS, "exp": EXP, "sqrt": SQRT, "ln": LN}
_PY_FUNCS = {"sin": "sin", "cos": "cos", "exp": "exp", "sqrt": "sqrt", "ln": "log"}


def _emit(e: Expr, ops: list[int], args: list[float]) -> int:
    """Append postfix code for ``e``; return the stack depth it needs."""
    if isinstance(e, Num):
        ops.append(CONST)
        args.append(e.value)
        return 1
    if isinstance(e, Var):
        ops.append(VAR)
        args.append(float(PDE_VARIABLES.index(e.name)))
        return 1
    if isinstance(e, BinOp):
        dl = _emit(e.left, ops, args)
        dr = _emit(e.right, ops, args)
        ops.append(_BINARY[e.op])
        args.append(0.0)
        return max(dl, dr + 1)
    if isinstance(e, Neg):
        d = _emit(e.operand, ops, args)
        ops.append(NEG)
        args.append(0.0)
        return d
    if isinstance(e, Pow):
        d = _emit(e.base, ops, args)
        ops.append(POW)
        args.append(float(e.exponent))
        return d
    if isinstance(e, Call):
        d = _emit(e.arg, ops, args)
        ops.append(_UNARY[e.func])
        args.append(0.0)
        return d
    raise TypeError(f"not an expression node: {e!r}")


def to_python(e: Expr) -> str:
    """Python source for ``e`` using ``m`` as the math module."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, BinOp):
        return f"({to_python(e.left)} {e.op} {to_python(e.right)})"
    if isinstance(e, Neg):
        return f"(-{to_python(e.operand)})"
    if isinstance(e, Pow):
        return f"({to_python(e.base)} ** {e.exponent})"
    if isinstance(e, Call):
        return f"m.{_PY_FUNCS[e.func]}({to_python(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


def _closure(e: Expr) -> Callable[..., float]:
    src = f"lambda x, y, z, p, q: {to_python(e)}"
    return eval(src, {"m": math, "__builtins__": {}})  # noqa: S307 - source built from a validated AST


@dataclass(frozen=True)
class FieldProgram:
    """psi and its five partials, as one tape plus Python closures.

    Tape ``j`` (0 = psi, 1..5 = partials in x, y, z, p, q) occupies
    ``ops[starts[j]:starts[j + 1]]``.
    """

    ops: np.ndarray
    args: np.ndarray
    starts: np.ndarray
    stack_size: int
    funcs: tuple[Callable[..., float], ...]


def compile_pde(pde: Pde) -> FieldProgram:
    exprs = (pde.psi,) + pde.partials
    ops: list[int] = []
    args: list[float] = []
    starts = [0]
    depth = 1
    for e in exprs:
        depth = max(depth, _emit(e, ops, args))
        starts.append(len(ops))
    return FieldProgram(
        ops=np.asarray(ops, dtype=np.int32),
        args=np.asarray(args, dtype=np.float64),
        starts=np.asarray(starts, dtype=np.intp),
        stack_size=depth,
        funcs=tuple(_closure(e) for e in exprs),
    )
