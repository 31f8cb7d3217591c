"""Geometry of a first-order PDE psi(x, y, z, p, q) = 0 at a surface element.

Covers solution calottes, the characteristic direction field, the
characteristic-neighbour test, Monge directions and the infinitesimal
Monge cone. Membership and invertibility are judged against ``on_tol`` and
``inv_tol`` (both 1e-9 by default).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from charpit import jets, linalg, parser, weil
from charpit.errors import DegenerateError, NumericError, OffSurfaceError
from charpit.jets import Calotte, Displacement, SurfaceElement
from charpit.linalg import AugmentedSystem
from charpit.parser import Pde
from charpit.weil import BlockSpec, WeilElement

ON_TOL = 1e-9
INV_TOL = 1e-9


@dataclass(frozen=True)
class PdePoint:
    """A surface element together with psi and its five partials there."""

    pde: Pde = field(repr=False)
    element: SurfaceElement
    value: float
    psi_x: float
    psi_y: float
    psi_z: float
    psi_p: float
    psi_q: float
    on_tol: float = ON_TOL
    inv_tol: float = INV_TOL

    @property
    def partials(self) -> tuple[float, float, float, float, float]:
        return (self.psi_x, self.psi_y, self.psi_z, self.psi_p, self.psi_q)

    @property
    def on_surface(self) -> bool:
        return abs(self.value) <= self.on_tol

    @property
    def margin(self) -> float:
        """Nondegeneracy margin max(|psi_p|, |psi_q|)."""
        return max(abs(self.psi_p), abs(self.psi_q))

    def require_on_surface(self) -> None:
        if not self.on_surface:
            raise OffSurfaceError(
                f"surface element {self.element.as_tuple()} is off the PDE: |psi| = {abs(self.value):.3g}",
                abs(self.value),
            )


@dataclass(frozen=True)
class CalotteFamily:
    """Solution calottes ``particular + c * kernel`` through a point of the PDE."""

    particular: np.ndarray
    kernel: np.ndarray

    def member(self, c: float) -> np.ndarray:
        return self.particular + c * self.kernel


@dataclass(frozen=True)
class CharDirection:
    dx: float
    dy: float
    dz: float
    dp: float
    dq: float
    element: SurfaceElement | None = field(default=None, compare=False)

    def as_array(self) -> np.ndarray:
        return np.array([self.dx, self.dy, self.dz, self.dp, self.dq])

    def scaled(self, lam: float) -> Displacement:
        return Displacement(*(lam * v for v in self.as_array()))


def at(pde: Pde, P: SurfaceElement, on_tol: float = ON_TOL, inv_tol: float = INV_TOL) -> PdePoint:
    """Evaluate psi and its partials at ``P``; raise DegenerateError if psi_p, psi_q both vanish."""
    args = tuple(float(v) for v in P.as_tuple())
    value = float(pde.value(*args))
    grads = [float(g) for g in pde.gradient(*args)]
    pt = PdePoint(pde, SurfaceElement(*args), value, *grads, on_tol=on_tol, inv_tol=inv_tol)
    if pt.margin <= inv_tol:
        raise DegenerateError(
            f"psi_p and psi_q both vanish at {args} (margin {pt.margin:.3g})"
        )
    return pt


def calotte_system(pt: PdePoint) -> AugmentedSystem:
    """Linear conditions on (r, s, t) for a calotte through ``pt`` to solve the PDE."""
    P = pt.element
    return AugmentedSystem(
        pt.psi_p,
        pt.psi_q,
        -pt.psi_x - P.p * pt.psi_z,
        -pt.psi_y - P.q * pt.psi_z,
    )


def solution_calotte_family(pt: PdePoint) -> CalotteFamily:
    pt.require_on_surface()
    particular, kernel = linalg.solve_staircase(calotte_system(pt), pt.inv_tol)
    return CalotteFamily(particular, kernel)


def _rmm_residual(pde: Pde, K: Calotte) -> WeilElement:
    # psi at the points of K reached by a generic first-order (dx, dy)
    spec = BlockSpec.of((2, 1))
    dx, dy = weil.generators(spec, 0)
    return pde.value(
        K.x + dx,
        K.y + dy,
        K.z + K.p * dx + K.q * dy,
        K.p + K.r * dx + K.s * dy,
        K.q + K.s * dx + K.t * dy,
    )


def is_solution_calotte(pde: Pde, K: Calotte, tol: float = linalg.REL_TOL,
                        on_tol: float = ON_TOL, inv_tol: float = INV_TOL) -> bool:
    """All surface elements of ``K`` lie on the PDE.

    Checked twice: through the linear system on (r, s, t), and by evaluating
    psi on the generic first-order neighbourhood in the Weil ring.
    """
    P = jets.restrict(K)
    try:
        pt = at(pde, P, on_tol, inv_tol)
    except DegenerateError:
        return False
    if not pt.on_surface:
        return False
    rst = (float(K.r), float(K.s), float(K.t))
    system = calotte_system(pt)
    rows_ok = system.satisfied_by(rst, tol)
    kl = weil.kl_decompose(_rmm_residual(pde, K))
    # the generic linear coefficients are the two row residuals again
    scales = system.row_scales(rst)
    generic_ok = (
        abs(kl.constant) <= on_tol
        and all(abs(c) <= tol * s + 1e-15 for c, s in zip(kl.linear, scales))
        and weil.is_zero(kl.rest)
    )
    return rows_ok and generic_ok


def characteristic_direction(pt: PdePoint) -> CharDirection:
    P = pt.element
    return CharDirection(
        pt.psi_p,
        pt.psi_q,
        P.p * pt.psi_p + P.q * pt.psi_q,
        -pt.psi_x - P.p * pt.psi_z,
        -pt.psi_y - P.q * pt.psi_z,
        element=P,
    )


def is_characteristic_neighbour(pt: PdePoint, d: Displacement, tol: float = linalg.REL_TOL) -> float | None:
    """The scalar ``lam`` with ``d == lam * characteristic_direction(pt)``, or None."""
    pt.require_on_surface()
    P = pt.element
    if not jets.united_position(P, d, tol):
        return None
    a = characteristic_direction(pt).as_array()
    b = [float(v) for v in d.as_tuple()]
    return linalg.proportionality_factor(a, b, tol, pt.inv_tol)


def monge_direction(pt: PdePoint) -> tuple[float, float]:
    """Unit (dx, dy) of the Monge-characteristic neighbour points."""
    pt.require_on_surface()
    n = math.hypot(pt.psi_p, pt.psi_q)
    return (pt.psi_p / n, pt.psi_q / n)


def monge_generic_check(pt: PdePoint, dx: float, dy: float, tol: float = 1e-12) -> bool:
    """Every first-order (dp, dq) keeping the element on the PDE also keeps ``P + (dx, dy)`` in it.

    (dx, dy) are scaled by a generator ``lam`` of one cap-1 block and the
    admissible (dp, dq) = tau * (-psi_q, psi_p) by a generator ``tau`` of an
    independent block, so ``lam * tau`` does not vanish; the incidence
    condition dx*dp + dy*dq must still be identically zero.
    """
    spec = BlockSpec.of((1, 1), (1, 1))
    lam = weil.generator(spec, 0, 0)
    tau = weil.generator(spec, 1, 0)
    dp = tau * (-pt.psi_q)
    dq = tau * pt.psi_p
    on_pde = pt.psi_p * dp + pt.psi_q * dq
    incidence = (lam * dx) * dp + (lam * dy) * dq
    scale = max(abs(dx), abs(dy)) * max(abs(pt.psi_p), abs(pt.psi_q))
    return weil.is_zero(on_pde, tol * scale) and weil.is_zero(incidence, tol * scale)


def symmetry_residual(pt: PdePoint) -> float:
    """Largest coefficient of ``lam * field(P + lam * field(P)) - lam * field(P)``, relative.

    ``lam`` is a cap-1 generator, so the difference vanishes structurally;
    floating evaluation of the partials is the only source of a nonzero value.
    Also folds in psi(P + dP) - psi(P), which the field keeps at zero to first order.
    """
    pt.require_on_surface()
    spec = BlockSpec.of((1, 1))
    lam = weil.generator(spec, 0, 0)
    field0 = characteristic_direction(pt).as_array()
    P = pt.element
    moved = [c + lam * f for c, f in zip(P.as_tuple(), field0)]
    x, y, z, p, q = moved
    gx, gy, gz, gp, gq = pt.pde.gradient(x, y, z, p, q, pt.inv_tol)
    field1 = [
        gp,
        gq,
        p * gp + q * gq,
        -gx - p * gz,
        -gy - q * gz,
    ]
    worst = 0.0
    for f0, f1 in zip(field0, field1):
        diff = lam * weil.lift(f1, spec) - lam * f0
        scale = max(abs(f0), 1.0)
        worst = max(worst, diff.max_abs_coefficient() / scale)
    drift = weil.lift(pt.pde.value(x, y, z, p, q, pt.inv_tol), spec) - pt.value
    grad_scale = max(1.0, max(abs(g) for g in pt.partials) * max(abs(f) for f in field0))
    worst = max(worst, drift.max_abs_coefficient() / grad_scale)
    return worst


def symmetry_check(pt: PdePoint, tol: float = 1e-12) -> bool:
    """Characteristic-neighbour symmetry holds identically at ``pt``."""
    return symmetry_residual(pt) <= tol


def _continuation_correct(pde: Pde, x: float, y: float, z: float, w: np.ndarray,
                          max_iter: int = 25) -> tuple[np.ndarray, float]:
    # minimum-norm Newton back onto psi(x, y, z, ., .) = 0
    for _ in range(max_iter):
        val = float(pde.value(x, y, z, *w))
        g = np.array([float(v) for v in pde.gradient(x, y, z, *w)[3:]])
        gg = float(g @ g)
        if abs(val) <= 1e-14 * max(1.0, math.sqrt(gg)) or gg == 0.0:
            return w, val
        w = w - val * g / gg
    return w, float(pde.value(x, y, z, *w))


def monge_cone_sample(
    pde: Pde,
    x: float,
    y: float,
    z: float,
    n: int,
    seed: tuple[float, float],
    step: float | None = None,
    on_tol: float = ON_TOL,
    inv_tol: float = INV_TOL,
    fail_tol: float = 1e-8,
) -> list[CharDirection]:
    """Characteristic directions over the base point (x, y, z), one per continuation step.

    Walks the curve psi(x, y, z, p, q) = 0 in the (p, q)-plane from ``seed`` by
    arc length ``step`` (default 2*pi/n) along (-psi_q, psi_p), correcting back
    with Newton. Returns ``n + 1`` directions, fewer if nondegeneracy is lost.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    pt = at(pde, SurfaceElement(x, y, z, *seed), on_tol, inv_tol)
    pt.require_on_surface()
    h = 2.0 * math.pi / n if (step is None and n > 0) else (step or 0.0)
    out = [characteristic_direction(pt)]
    w = np.array(seed, dtype=float)
    prev_tangent = None
    for k in range(1, n + 1):
        tangent = np.array([-pt.psi_q, pt.psi_p])
        tangent /= np.linalg.norm(tangent)
        if prev_tangent is not None and tangent @ prev_tangent < 0:
            tangent = -tangent
        prev_tangent = tangent
        w, val = _continuation_correct(pde, x, y, z, w + h * tangent)
        if not (np.all(np.isfinite(w)) and abs(val) <= fail_tol):
            raise NumericError(f"continuation diverged at step {k} of {n}: |psi| = {abs(val):.3g}")
        try:
            pt = at(pde, SurfaceElement(x, y, z, float(w[0]), float(w[1])), on_tol, inv_tol)
        except DegenerateError:
            break
        out.append(characteristic_direction(pt))
    return out
