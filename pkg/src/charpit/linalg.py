"""Proportionality and containment of linear systems over the scalars.

Only the instances needed for first-order PDEs in R^3 are covered: vectors
in R^n (n <= 5) and the 2x3 staircase systems::

    [ p1  p2  0  | r1 ]
    [ 0   p1  p2 | r2 ]

"Invertible" means absolute value above ``inv_tol``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from charpit import weil
from charpit.errors import DegenerateError
from charpit.weil import BlockSpec, WeilElement

INV_TOL = 1e-9
REL_TOL = 1e-9


def _check_proper(a: Sequence[float], inv_tol: float) -> int:
    """Index of the dominant component of ``a`` (first on ties)."""
    if len(a) == 0:
        raise DegenerateError("empty vector is not proper")
    k = max(range(len(a)), key=lambda i: (abs(a[i]), -i))
    if abs(a[k]) <= inv_tol:
        raise DegenerateError(f"vector {tuple(a)} is not proper (no invertible component)")
    return k


def proportionality_factor(
    a: Sequence[float], b: Sequence[float], tol: float = REL_TOL, inv_tol: float = INV_TOL
) -> float | None:
    """The unique ``lam`` with ``b == lam * a``, or None if no such scalar fits."""
    if len(a) != len(b):
        raise ValueError("vectors of different length")
    k = _check_proper(a, inv_tol)
    lam = float(b[k] / a[k])
    scale = max(max(abs(v) for v in b), abs(lam) * max(abs(v) for v in a))
    if all(abs(bj - lam * aj) <= tol * scale for aj, bj in zip(a, b)):
        return lam
    return None


def kernel_containment_weil(a: Sequence[float], b: Sequence[float], tol: float = REL_TOL,
                            inv_tol: float = INV_TOL) -> bool:
    """``a . d = 0  =>  b . d = 0`` for generic ``d`` in D(n), checked in the Weil ring.

    Solutions of ``a . d = 0`` in D(n) are parametrized by n-1 generators of a
    cap-1 block, eliminating the dominant coordinate of ``a``.
    """
    n = len(a)
    k = _check_proper(a, inv_tol)
    if n == 1:
        # only d = 0 solves a.d = 0, so the implication is vacuous
        return True
    spec = BlockSpec.of((n - 1, 1))
    taus = weil.generators(spec, 0)
    free = [j for j in range(n) if j != k]
    d: list[WeilElement] = [WeilElement.constant(spec, 0.0)] * n
    for j, tau in zip(free, taus):
        d[j] = tau
    d[k] = -weil.dot((a[j] for j in free), taus) / a[k]
    residual = weil.dot(b, d)
    # |a_j / a_k| <= 1 at the dominant pivot
    scale = max(abs(v) for v in b)
    return weil.is_zero(residual, tol * scale)


def kernel_containment_generic(a: Sequence[float], b: Sequence[float], tol: float = REL_TOL,
                               inv_tol: float = INV_TOL) -> bool:
    """True iff ``b`` is a multiple of ``a``; cross-checked against the Weil route."""
    direct = proportionality_factor(a, b, tol, inv_tol) is not None
    generic = kernel_containment_weil(a, b, tol, inv_tol)
    if direct != generic:
        raise ArithmeticError(
            f"kernel containment routes disagree for a={tuple(a)}, b={tuple(b)}: "
            f"proportionality={direct}, weil={generic}"
        )
    return direct


@dataclass(frozen=True)
class AugmentedSystem:
    """The staircase system ``[[p1, p2, 0 | r1], [0, p1, p2 | r2]]``."""

    p1: float
    p2: float
    r1: float
    r2: float

    def is_proper(self, inv_tol: float = INV_TOL) -> bool:
        return max(abs(self.p1), abs(self.p2)) > inv_tol

    def as_vector(self) -> tuple[float, float, float, float]:
        return (self.p1, self.p2, self.r1, self.r2)

    def residuals(self, rst: Sequence[float]) -> tuple[float, float]:
        r, s, t = rst
        return (self.p1 * r + self.p2 * s - self.r1, self.p1 * s + self.p2 * t - self.r2)

    def row_scales(self, rst: Sequence[float]) -> tuple[float, float]:
        r, s, t = rst
        return (
            max(abs(self.p1 * r), abs(self.p2 * s), abs(self.r1)),
            max(abs(self.p1 * s), abs(self.p2 * t), abs(self.r2)),
        )

    def satisfied_by(self, rst: Sequence[float], tol: float = REL_TOL) -> bool:
        res = self.residuals(rst)
        scales = self.row_scales(rst)
        return all(abs(e) <= tol * s for e, s in zip(res, scales))


def neighbour_system(dx: float, dy: float, dp: float, dq: float) -> AugmentedSystem:
    """Conditions on (r, s, t) for a united-position neighbour to lie on a calotte."""
    return AugmentedSystem(dx, dy, dp, dq)


def system_containment_factor(A: AugmentedSystem, B: AugmentedSystem, tol: float = REL_TOL,
                              inv_tol: float = INV_TOL) -> float | None:
    """``lam`` with ``B == lam * A`` when the solutions of ``A`` all solve ``B``, else None."""
    if not A.is_proper(inv_tol):
        raise DegenerateError(f"system {A} is not proper")
    return proportionality_factor(A.as_vector(), B.as_vector(), tol, inv_tol)


def solve_staircase(A: AugmentedSystem, inv_tol: float = INV_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Particular solution and unit kernel vector of a proper staircase system.

    Pivots on the larger of ``|p1|``, ``|p2|`` (``p1`` on ties) and sets the
    opposite end unknown to zero.
    """
    if not A.is_proper(inv_tol):
        raise DegenerateError(f"system {A} is not proper")
    p1, p2, r1, r2 = (float(v) for v in A.as_vector())
    if abs(p1) >= abs(p2):
        t = 0.0
        s = r2 / p1
        r = (r1 - p2 * s) / p1
    else:
        r = 0.0
        s = r1 / p2
        t = (r2 - p1 * s) / p2
    kernel = np.array([p2 * p2, -p1 * p2, p1 * p1])
    kernel /= np.linalg.norm(kernel)
    return np.array([r, s, t]), kernel


def base_point_accepts(z: Sequence[WeilElement], u_block: int) -> bool:
    """Whether ``z + u`` stays first-order infinitesimal for generic ``u``.

    ``z[i]`` lives in a BlockSpec whose ``u_block`` holds one cap-1 generator per
    coordinate. For each i the coefficient of ``u_i`` in ``(z_i + u_i)^2`` must
    vanish; it equals ``2 z_i`` exactly, so only ``z = 0`` is accepted.
    """
    spec = z[0].spec
    ok = True
    for i, zi in enumerate(z):
        ui = weil.generator(spec, u_block, i)
        square = (zi + ui) * (zi + ui)
        coeff = weil.coefficient_of(square, u_block, i)
        if coeff != weil.scale(zi, 2.0):
            raise ArithmeticError(f"u-linear coefficient of (z_{i} + u_{i})^2 is not 2 z_{i}")
        ok = ok and weil.is_zero(coeff)
    return ok


def is_base_point_only_zero(n: int, trials: int = 10, seed: int = 0) -> bool:
    """The base point of D(n) is the only point whose neighbours all lie in D(n).

    ``z`` ranges over generic elements of D(n) (a cap-1 block of n generators)
    and ``u`` over an independent cap-1 block. Checks that ``z = 0`` is
    accepted and ``trials`` random nonzero coefficient patterns are rejected.
    """
    spec = BlockSpec.of((n, 1), (n, 1))
    zeta = weil.generators(spec, 0)
    zero = [WeilElement.constant(spec, 0.0)] * n
    if not base_point_accepts(zero, 1):
        return False
    rng = random.Random(seed)
    for _ in range(trials):
        coeffs = [[rng.choice((0.0, rng.uniform(-2.0, 2.0))) for _ in range(n)] for _ in range(n)]
        if not any(any(row) for row in coeffs):
            coeffs[rng.randrange(n)][rng.randrange(n)] = 1.0
        z = [weil.dot(row, zeta) for row in coeffs]
        if base_point_accepts(z, 1):
            return False
    return True
