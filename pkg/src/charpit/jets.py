"""Surface elements (1-jets) and calottes (2-jets) of graph surfaces in R^3.

Scalars may be floats or Weil elements. Zero tests on Weil scalars are
structural (or coefficient-wise within ``weil_tol``); on floats they are
relative to the magnitude of the terms being compared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from charpit import parser, weil
from charpit.weil import WeilElement

Scalar = Union[float, WeilElement]

#: relative tolerance for real-valued zero tests
REL_TOL = 1e-9


@dataclass(frozen=True)
class SurfaceElement:
    x: Scalar
    y: Scalar
    z: Scalar
    p: Scalar
    q: Scalar

    @property
    def base_point(self) -> tuple[Scalar, Scalar, Scalar]:
        return (self.x, self.y, self.z)

    def as_tuple(self) -> tuple[Scalar, ...]:
        return (self.x, self.y, self.z, self.p, self.q)

    def displaced(self, d: "Displacement") -> "SurfaceElement":
        return SurfaceElement(self.x + d.dx, self.y + d.dy, self.z + d.dz, self.p + d.dp, self.q + d.dq)


@dataclass(frozen=True)
class Calotte:
    x: Scalar
    y: Scalar
    z: Scalar
    p: Scalar
    q: Scalar
    r: Scalar
    s: Scalar
    t: Scalar

    def as_tuple(self) -> tuple[Scalar, ...]:
        return (self.x, self.y, self.z, self.p, self.q, self.r, self.s, self.t)

    @classmethod
    def extending(cls, P: SurfaceElement, r: Scalar, s: Scalar, t: Scalar) -> "Calotte":
        return cls(P.x, P.y, P.z, P.p, P.q, r, s, t)


@dataclass(frozen=True)
class Displacement:
    """Difference ``P' - P`` of two neighbouring surface elements."""

    dx: Scalar
    dy: Scalar
    dz: Scalar
    dp: Scalar
    dq: Scalar

    def as_tuple(self) -> tuple[Scalar, ...]:
        return (self.dx, self.dy, self.dz, self.dp, self.dq)

    @classmethod
    def united(cls, P: SurfaceElement, dx: Scalar, dy: Scalar, dp: Scalar, dq: Scalar) -> "Displacement":
        """Displacement with ``dz`` chosen so that the neighbour lies in P's plane."""
        return cls(dx, dy, P.p * dx + P.q * dy, dp, dq)


def vanishes(value: Scalar, *terms: Scalar, tol: float = REL_TOL, weil_tol: float = 0.0) -> bool:
    """Zero test for ``value``; ``terms`` set the magnitude scale for floats."""
    if isinstance(value, WeilElement):
        return weil.is_zero(value, weil_tol)
    scale = max((abs(t) for t in terms if not isinstance(t, WeilElement)), default=0.0)
    return abs(value) <= tol * scale


def restrict(K: Calotte) -> SurfaceElement:
    return SurfaceElement(K.x, K.y, K.z, K.p, K.q)


def element_point(P: SurfaceElement, dx: Scalar, dy: Scalar) -> tuple[Scalar, Scalar, Scalar]:
    return (P.x + dx, P.y + dy, P.z + P.p * dx + P.q * dy)


def calotte_point(K: Calotte, dx: Scalar, dy: Scalar) -> tuple[Scalar, Scalar, Scalar]:
    z = K.z + K.p * dx + K.q * dy + 0.5 * K.r * dx * dx + K.s * dx * dy + 0.5 * K.t * dy * dy
    return (K.x + dx, K.y + dy, z)


def united_position(P: SurfaceElement, d: Displacement, tol: float = REL_TOL, weil_tol: float = 0.0) -> bool:
    """``P`` and ``P + d`` are in united position: dz = p dx + q dy."""
    pdx = P.p * d.dx
    qdy = P.q * d.dy
    return vanishes(d.dz - pdx - qdy, d.dz, pdx, qdy, tol=tol, weil_tol=weil_tol)


def _same(a: Scalar, b: Scalar) -> bool:
    if isinstance(a, WeilElement) or isinstance(b, WeilElement):
        return a == b
    return math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-300)


def belongs_to(
    P: SurfaceElement,
    dx: Scalar,
    dy: Scalar,
    dp: Scalar,
    dq: Scalar,
    K: Calotte,
    tol: float = REL_TOL,
    weil_tol: float = 0.0,
) -> bool:
    """Whether the neighbour (x+dx, y+dy, z+p dx+q dy, p+dp, q+dq) of ``P`` lies on ``K``.

    Raises ValueError if ``K`` does not extend ``P``.
    """
    if not all(_same(a, b) for a, b in zip(restrict(K).as_tuple(), P.as_tuple())):
        raise ValueError("calotte does not restrict to the given surface element")
    rdx, sdy = K.r * dx, K.s * dy
    sdx, tdy = K.s * dx, K.t * dy
    row1 = vanishes(rdx + sdy - dp, rdx, sdy, dp, tol=tol, weil_tol=weil_tol)
    row2 = vanishes(sdx + tdy - dq, sdx, tdy, dq, tol=tol, weil_tol=weil_tol)
    return row1 and row2


def jet_of_graph(f: parser.Expr | str, x0: float, y0: float, order: int = 1) -> SurfaceElement | Calotte:
    """1-jet or 2-jet of the graph z = f(x, y) at (x0, y0), from symbolic partials."""
    if isinstance(f, str):
        f = parser.parse(f, ("x", "y"))
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    env = {"x": float(x0), "y": float(y0)}
    fx = parser.differentiate(f, "x")
    fy = parser.differentiate(f, "y")
    vals = [parser.evaluate(e, env) for e in (f, fx, fy)]
    if order == 1:
        return SurfaceElement(float(x0), float(y0), *vals)
    second = [
        parser.evaluate(parser.differentiate(fx, "x"), env),
        parser.evaluate(parser.differentiate(fx, "y"), env),
        parser.evaluate(parser.differentiate(fy, "y"), env),
    ]
    return Calotte(float(x0), float(y0), *vals, *second)


def reversed_united_residual(p: float, q: float) -> WeilElement:
    """``(p + dp)(-dx) + (q + dq)(-dy) + dz`` with ``dz := p dx + q dy`` and generic first-order d.

    Vanishes identically: the products dp*dx and dq*dy are truncated, which is
    what makes united position a symmetric relation.
    """
    spec = weil.BlockSpec.of((5, 1))
    dx, dy, _, dp, dq = weil.generators(spec, 0)
    dz = p * dx + q * dy
    return (p + dp) * (-dx) + (q + dq) * (-dy) + dz
