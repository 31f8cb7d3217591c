"""Truncated polynomial rings R[e_1..e_n] / (monomials over a block's degree cap).

Generators are grouped in blocks. Within one block the total degree of a
monomial may not exceed the block's cap, so a block of ``count`` generators
with cap 1 models the first-order neighbourhood D(count), cap k models
D_k(count), and several blocks model independent infinitesimals (products
across blocks survive).

Truncation is structural: a monomial that violates a cap is never stored.
Coefficients are floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence, Union

from charpit.errors import EvalError

Scalar = Union[float, "WeilElement"]
Exponent = tuple[int, ...]

#: default threshold for "invertible" constant parts
INV_TOL = 1e-9


@dataclass(frozen=True)
class BlockSpec:
    """Generator blocks as ``(generator_count, degree_cap)`` pairs."""

    blocks: tuple[tuple[int, int], ...]

    def __post_init__(self):
        blocks = tuple((int(n), int(c)) for n, c in self.blocks)
        if not blocks:
            raise ValueError("BlockSpec needs at least one block")
        for n, c in blocks:
            if n < 1 or c < 1:
                raise ValueError(f"invalid block ({n}, {c}): counts and caps must be >= 1")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def of(cls, *blocks: tuple[int, int]) -> "BlockSpec":
        return cls(tuple(blocks))

    @property
    def ngens(self) -> int:
        return sum(n for n, _ in self.blocks)

    @property
    def max_degree(self) -> int:
        """Largest total degree a nonzero monomial can have."""
        return sum(c for _, c in self.blocks)

    def offset(self, block: int) -> int:
        return sum(n for n, _ in self.blocks[:block])

    def index(self, block: int, i: int) -> int:
        """Flat generator index of generator ``i`` in ``block``."""
        if not 0 <= block < len(self.blocks):
            raise IndexError(f"block {block} out of range")
        if not 0 <= i < self.blocks[block][0]:
            raise IndexError(f"generator {i} out of range for block {block}")
        return self.offset(block) + i

    def admissible(self, exps: Exponent) -> bool:
        start = 0
        for n, cap in self.blocks:
            if sum(exps[start:start + n]) > cap:
                return False
            start += n
        return True

    def zero_exponent(self) -> Exponent:
        return (0,) * self.ngens


class WeilElement:
    """Immutable element of the truncated ring described by a :class:`BlockSpec`.

    The term map is canonical: every exponent respects the caps and no
    coefficient is exactly zero.
    """

    __slots__ = ("_spec", "_terms")

    def __init__(self, spec: BlockSpec, terms: Mapping[Exponent, float] | None = None):
        clean: dict[Exponent, float] = {}
        if terms:
            n = spec.ngens
            for exps, c in terms.items():
                exps = tuple(int(e) for e in exps)
                if len(exps) != n:
                    raise ValueError(f"exponent {exps} has wrong length for {n} generators")
                if any(e < 0 for e in exps):
                    raise ValueError(f"negative exponent in {exps}")
                c = float(c)
                if c != 0.0 and spec.admissible(exps):
                    clean[exps] = clean.get(exps, 0.0) + c
            clean = {k: v for k, v in clean.items() if v != 0.0}
        self._spec = spec
        self._terms = clean

    @classmethod
    def _raw(cls, spec: BlockSpec, terms: dict[Exponent, float]) -> "WeilElement":
        # trusted path: terms already admissible; only zero stripping needed
        obj = cls.__new__(cls)
        obj._spec = spec
        obj._terms = {k: v for k, v in terms.items() if v != 0.0}
        return obj

    @classmethod
    def constant(cls, spec: BlockSpec, value: float) -> "WeilElement":
        return cls._raw(spec, {spec.zero_exponent(): float(value)})

    @property
    def spec(self) -> BlockSpec:
        return self._spec

    @property
    def terms(self) -> Mapping[Exponent, float]:
        return dict(self._terms)

    @property
    def constant_part(self) -> float:
        return self._terms.get(self._spec.zero_exponent(), 0.0)

    @property
    def nilpotent_part(self) -> "WeilElement":
        zero = self._spec.zero_exponent()
        return WeilElement._raw(self._spec, {k: v for k, v in self._terms.items() if k != zero})

    def coefficient(self, exps: Exponent) -> float:
        return self._terms.get(tuple(exps), 0.0)

    def max_abs_coefficient(self) -> float:
        return max((abs(v) for v in self._terms.values()), default=0.0)

    # ring structure

    def _coerce(self, other) -> "WeilElement":
        if isinstance(other, WeilElement):
            if other._spec != self._spec:
                raise ValueError("mismatched BlockSpecs")
            return other
        if isinstance(other, (int, float)):
            return WeilElement.constant(self._spec, float(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self._terms)
        for k, v in other._terms.items():
            terms[k] = terms.get(k, 0.0) + v
        return WeilElement._raw(self._spec, terms)

    __radd__ = __add__

    def __neg__(self):
        return WeilElement._raw(self._spec, {k: -v for k, v in self._terms.items()})

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self._terms)
        for k, v in other._terms.items():
            terms[k] = terms.get(k, 0.0) - v
        return WeilElement._raw(self._spec, terms)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return scale(self, other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        spec = self._spec
        terms: dict[Exponent, float] = {}
        for ka, va in self._terms.items():
            for kb, vb in other._terms.items():
                k = tuple(a + b for a, b in zip(ka, kb))
                if spec.admissible(k):
                    terms[k] = terms.get(k, 0.0) + va * vb
        return WeilElement._raw(spec, terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            if other == 0:
                raise EvalError("division by zero")
            return WeilElement._raw(self._spec, {k: v / other for k, v in self._terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.nilpotent_part._terms:
            return self / other.constant_part
        return self * reciprocal(other)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise EvalError("only nonnegative integer powers are supported")
        return ipow(self, n)

    def __eq__(self, other):
        if isinstance(other, WeilElement):
            return self._spec == other._spec and self._terms == other._terms
        if isinstance(other, (int, float)):
            return self._terms == WeilElement.constant(self._spec, other)._terms
        return NotImplemented

    def __hash__(self):
        return hash((self._spec, frozenset(self._terms.items())))

    def __repr__(self):
        if not self._terms:
            return "WeilElement(0)"
        parts = []
        for k, v in sorted(self._terms.items()):
            mono = "*".join(
                f"e{i}" if e == 1 else f"e{i}^{e}" for i, e in enumerate(k) if e
            )
            parts.append(f"{v!r}" if not mono else f"{v!r}*{mono}")
        return "WeilElement(" + " + ".join(parts) + ")"


def generator(spec: BlockSpec, block: int, i: int) -> WeilElement:
    """The ``i``-th generator of ``block``."""
    idx = spec.index(block, i)
    exps = [0] * spec.ngens
    exps[idx] = 1
    return WeilElement._raw(spec, {tuple(exps): 1.0})


def generators(spec: BlockSpec, block: int) -> list[WeilElement]:
    return [generator(spec, block, i) for i in range(spec.blocks[block][0])]


def add(a: Scalar, b: Scalar) -> Scalar:
    return a + b


def mul(a: Scalar, b: Scalar) -> Scalar:
    return a * b


def scale(a: WeilElement, c: float) -> WeilElement:
    c = float(c)
    return WeilElement._raw(a.spec, {k: v * c for k, v in a.terms.items()})


def ipow(a: Scalar, n: int) -> Scalar:
    """Nonnegative integer power by repeated squaring; same op order for floats and Weil."""
    if n < 0:
        raise EvalError("negative integer power")
    if isinstance(a, WeilElement):
        result: Scalar = WeilElement.constant(a.spec, 1.0)
    else:
        result = 1.0
    if n == 0:
        return result
    base = a
    first = True
    while n:
        if n & 1:
            result = base if first else result * base
            first = False
        n >>= 1
        if n:
            base = base * base
    return result


def is_zero(a: Scalar, tol: float = 0.0) -> bool:
    """True iff every coefficient is within ``tol`` of zero (``tol=0``: exact emptiness)."""
    if isinstance(a, WeilElement):
        if tol == 0.0:
            return not a._terms
        return all(abs(v) <= tol for v in a._terms.values())
    return abs(a) <= tol


# Taylor coefficients f^(k)(c)/k!, k = 0..m

TaylorFunction = Callable[[float, int], Sequence[float]]


def _taylor_sin(c: float, m: int) -> list[float]:
    cycle = (math.sin(c), math.cos(c), -math.sin(c), -math.cos(c))
    return [cycle[k % 4] / math.factorial(k) for k in range(m + 1)]


def _taylor_cos(c: float, m: int) -> list[float]:
    cycle = (math.cos(c), -math.sin(c), -math.cos(c), math.sin(c))
    return [cycle[k % 4] / math.factorial(k) for k in range(m + 1)]


def _taylor_exp(c: float, m: int) -> list[float]:
    e = math.exp(c)
    return [e / math.factorial(k) for k in range(m + 1)]


def _taylor_sqrt(c: float, m: int) -> list[float]:
    if c <= 0.0:
        raise EvalError(f"sqrt needs a positive constant part, got {c!r}")
    out = [math.sqrt(c)]
    binom = 1.0
    for k in range(1, m + 1):
        binom *= (0.5 - (k - 1)) / k
        out.append(binom * c ** (0.5 - k))
    return out


def _taylor_ln(c: float, m: int) -> list[float]:
    if c <= 0.0:
        raise EvalError(f"ln needs a positive constant part, got {c!r}")
    return [math.log(c)] + [(-1) ** (k + 1) / (k * c ** k) for k in range(1, m + 1)]


def taylor_power(n: int) -> TaylorFunction:
    """Taylor coefficients of ``u -> u**n`` (binomial expansion)."""

    def coeffs(c: float, m: int) -> list[float]:
        return [math.comb(n, k) * c ** (n - k) if k <= n else 0.0 for k in range(m + 1)]

    return coeffs


TAYLOR: dict[str, TaylorFunction] = {
    "sin": _taylor_sin,
    "cos": _taylor_cos,
    "exp": _taylor_exp,
    "sqrt": _taylor_sqrt,
    "ln": _taylor_ln,
}


def evaluate_smooth(f: TaylorFunction | str, a: WeilElement, order: int | None = None) -> WeilElement:
    """Apply a smooth function to ``a`` by Taylor expansion about its constant part.

    Exact: powers of the nilpotent part vanish beyond ``spec.max_degree``.
    ``order`` defaults to that degree; a smaller order is rejected.
    """
    if isinstance(f, str):
        f = TAYLOR[f]
    m = a.spec.max_degree if order is None else order
    if m < a.spec.max_degree:
        raise ValueError(f"Taylor order {m} below nilpotency degree {a.spec.max_degree}")
    c = a.constant_part
    coeffs = f(c, m)
    nil = a.nilpotent_part
    result = WeilElement.constant(a.spec, coeffs[0])
    power = WeilElement.constant(a.spec, 1.0)
    for k in range(1, m + 1):
        power = power * nil
        if not power._terms:
            break
        if coeffs[k] != 0.0:
            result = result + scale(power, coeffs[k])
    return result


def reciprocal(a: WeilElement, inv_tol: float = INV_TOL) -> WeilElement:
    c = a.constant_part
    if abs(c) <= inv_tol:
        raise EvalError(f"element with constant part {c!r} is not invertible")
    # 1/(c + n) = (1/c) * sum (-n/c)^k
    m = a.spec.max_degree
    coeffs = [(-1) ** k / c ** (k + 1) for k in range(m + 1)]
    return evaluate_smooth(lambda _c, _m: coeffs, a)


def lift(value: Scalar, spec: BlockSpec) -> WeilElement:
    if isinstance(value, WeilElement):
        if value.spec != spec:
            raise ValueError("mismatched BlockSpecs")
        return value
    return WeilElement.constant(spec, value)


@dataclass(frozen=True)
class KlDecomposition:
    """``a = constant + sum(linear[i] * e_i) + rest``."""

    constant: float
    linear: tuple[float, ...]
    rest: WeilElement

    def reassemble(self) -> WeilElement:
        spec = self.rest.spec
        out = self.rest + self.constant
        for i, c in enumerate(self.linear):
            exps = [0] * spec.ngens
            exps[i] = 1
            out = out + WeilElement._raw(spec, {tuple(exps): c})
        return out


def kl_decompose(a: WeilElement) -> KlDecomposition:
    """Split ``a`` into its constant, first-degree and higher-degree parts."""
    n = a.spec.ngens
    linear = [0.0] * n
    rest: dict[Exponent, float] = {}
    constant = 0.0
    for k, v in a._terms.items():
        deg = sum(k)
        if deg == 0:
            constant = v
        elif deg == 1:
            linear[k.index(1)] = v
        else:
            rest[k] = v
    return KlDecomposition(constant, tuple(linear), WeilElement._raw(a.spec, rest))


def coefficient_of(a: WeilElement, block: int, i: int) -> WeilElement:
    """Coefficient of the first power of one generator, as an element in the others."""
    idx = a.spec.index(block, i)
    out: dict[Exponent, float] = {}
    for k, v in a._terms.items():
        if k[idx] == 1:
            out[k[:idx] + (0,) + k[idx + 1:]] = v
    return WeilElement._raw(a.spec, out)


def dot(a: Iterable[Scalar], b: Iterable[Scalar]) -> Scalar:
    total: Scalar = 0.0
    for x, y in zip(a, b):
        total = total + x * y
    return total
