"""Battery of generic checks of the characteristic theory at one surface element."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from charpit import jets, linalg, parser, pde as pdemod, weil
from charpit.jets import Calotte, Displacement, SurfaceElement
from charpit.parser import Pde


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    residual: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status}  {self.name:<34s} residual={self.residual:.3e}"
        return f"{text}  {self.detail}" if self.detail else text


def _united_symmetry(pt: pdemod.PdePoint) -> Check:
    res = jets.reversed_united_residual(pt.element.p, pt.element.q)
    return Check("united-position symmetry", weil.is_zero(res), res.max_abs_coefficient(),
                 "dp*dx and dq*dy truncated")


def _characteristic_symmetry(pt: pdemod.PdePoint) -> Check:
    r = pdemod.symmetry_residual(pt)
    return Check("characteristic-neighbour symmetry", r <= 1e-12, r)


def _monge_agreement(pt: pdemod.PdePoint) -> Check:
    mx, my = pdemod.monge_direction(pt)
    d = pdemod.characteristic_direction(pt)
    n = math.hypot(d.dx, d.dy)
    err = max(abs(mx - d.dx / n), abs(my - d.dy / n))
    generic = pdemod.monge_generic_check(pt, mx, my)
    ortho = not pdemod.monge_generic_check(pt, -my, mx)
    return Check("monge/calotte agreement", err <= 1e-10 and generic and ortho, err,
                 f"incidence identically zero: {generic}; orthogonal direction rejected: {ortho}")


def _calotte_family(pt: pdemod.PdePoint) -> Check:
    fam = pdemod.solution_calotte_family(pt)
    system = pdemod.calotte_system(pt)
    worst = 0.0
    ok = True
    P = pt.element
    for c in (-10.0, -1.0, 0.0, 1.0, 10.0):
        rst = fam.member(c)
        res = system.residuals(rst)
        scales = system.row_scales(rst)
        worst = max(worst, max(abs(e) / max(s, 1e-300) for e, s in zip(res, scales)))
        ok = ok and system.satisfied_by(rst, 1e-12)
        ok = ok and pdemod.is_solution_calotte(pt.pde, Calotte.extending(P, *rst), on_tol=pt.on_tol)
    hom = _kernel_residual(system, fam.kernel)
    worst = max(worst, hom)
    ok = ok and hom <= 1e-12
    # a calotte off the affine line is not a solution; (1, 2, 3) is never parallel to the kernel
    off = fam.particular + np.cross(fam.kernel, [1.0, 2.0, 3.0])
    rejects = not pdemod.is_solution_calotte(pt.pde, Calotte.extending(P, *off), on_tol=pt.on_tol)
    return Check("solution-calotte family (1-dim)", ok and rejects, worst,
                 f"kernel={np.array2string(fam.kernel, precision=6)}")


def _kernel_residual(system: linalg.AugmentedSystem, k) -> float:
    a, b = system.p1, system.p2
    scale = max(abs(a), abs(b)) * max(abs(v) for v in k)
    return max(abs(a * k[0] + b * k[1]), abs(a * k[1] + b * k[2])) / scale


def _criterion(pt: pdemod.PdePoint) -> Check:
    d = pdemod.characteristic_direction(pt)
    lam = 1e-2
    disp = d.scaled(lam)
    got = pdemod.is_characteristic_neighbour(pt, disp)
    cont = linalg.system_containment_factor(
        pdemod.calotte_system(pt), linalg.neighbour_system(disp.dx, disp.dy, disp.dp, disp.dq)
    )
    ok = got is not None and cont is not None and math.isclose(got, lam, rel_tol=1e-9) \
        and math.isclose(cont, lam, rel_tol=1e-9)
    # every solution calotte passes through the characteristic neighbour
    fam = pdemod.solution_calotte_family(pt)
    P = pt.element
    for c in (-1.0, 0.0, 1.0):
        K = Calotte.extending(P, *fam.member(c))
        ok = ok and jets.belongs_to(P, disp.dx, disp.dy, disp.dp, disp.dq, K)
    # a rotated (dx, dy) is not characteristic for either route
    bent = Displacement.united(P, disp.dx - disp.dy, disp.dy + disp.dx, disp.dp, disp.dq)
    got_bent = pdemod.is_characteristic_neighbour(pt, bent)
    cont_bent = linalg.system_containment_factor(
        pdemod.calotte_system(pt), linalg.neighbour_system(bent.dx, bent.dy, bent.dp, bent.dq)
    )
    ok = ok and got_bent is None and cont_bent is None
    err = abs((got or 0.0) - lam) / lam
    return Check("characteristic criterion", ok, err, f"lambda={got!r}")


def _derivatives(pt: pdemod.PdePoint) -> Check:
    env = dict(zip(parser.PDE_VARIABLES, pt.element.as_tuple()))
    generic = parser.weil_gradient(pt.pde.psi, env, parser.PDE_VARIABLES)
    worst = 0.0
    for s, g in zip(pt.partials, generic):
        worst = max(worst, abs(s - g) / max(1.0, abs(s)))
    return Check("derivative cross-check", worst <= 1e-12, worst, "symbolic vs Weil linear part")


def run_checks(pde: Pde, P: SurfaceElement, on_tol: float = pdemod.ON_TOL,
               inv_tol: float = pdemod.INV_TOL) -> list[Check]:
    """All checks at ``P``; raises DegenerateError / OffSurfaceError up front."""
    pt = pdemod.at(pde, P, on_tol, inv_tol)
    pt.require_on_surface()
    return [
        _united_symmetry(pt),
        _characteristic_symmetry(pt),
        _monge_agreement(pt),
        _calotte_family(pt),
        _criterion(pt),
        _derivatives(pt),
    ]
