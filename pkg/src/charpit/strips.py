"""Characteristic strips, initial strips and solution sheets (the Cauchy problem).

A strip is an integral curve of the characteristic field

    (psi_p, psi_q, p psi_p + q psi_q, -psi_x - p psi_z, -psi_y - q psi_z)

in (x, y, z, p, q)-space, integrated by fixed-step classical RK4 with the
compiled kernel when available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from charpit import jets, kernels, parser
from charpit.errors import (
    DegenerateError,
    IntegrationError,
    NumericError,
    OffSurfaceError,
    TransversalityError,
)
from charpit.jets import SurfaceElement
from charpit.parser import Expr, Pde
from charpit.pde import INV_TOL, ON_TOL, at
from charpit.program import FieldProgram, compile_pde

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 25

_programs: dict[int, tuple[Pde, FieldProgram]] = {}


def program_for(pde: Pde) -> FieldProgram:
    """Compiled kernel program for ``pde`` (cached per Pde object)."""
    hit = _programs.get(id(pde))
    if hit is not None and hit[0] is pde:
        return hit[1]
    prog = compile_pde(pde)
    _programs[id(pde)] = (pde, prog)
    return prog


@dataclass(frozen=True)
class Strip:
    """Samples ``states[i] = (x, y, z, p, q)`` at parameter ``t[i]``."""

    t: np.ndarray
    states: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def __getattr__(self, name):
        cols = ("x", "y", "z", "p", "q")
        if name in cols:
            return self.states[:, cols.index(name)]
        raise AttributeError(name)

    def element(self, i: int) -> SurfaceElement:
        return SurfaceElement(*(float(v) for v in self.states[i]))


@dataclass(frozen=True)
class InitialStrip:
    """Cauchy data: surface elements along an initial curve, parameter ``s``."""

    s: np.ndarray
    states: np.ndarray

    def __len__(self) -> int:
        return len(self.s)


@dataclass
class SolutionSheet:
    """``grid[i, j] = (x, y, z, p, q)`` at ``(s[i], t[j])``; NaN past a failed strip."""

    s: np.ndarray
    t: np.ndarray
    grid: np.ndarray
    failures: list[tuple[int, str]] = field(default_factory=list)

    @property
    def shape(self) -> tuple[int, int]:
        return self.grid.shape[:2]

    def row(self, i: int) -> Strip:
        ok = np.all(np.isfinite(self.grid[i]), axis=1)
        n = int(np.argmin(ok)) if not ok.all() else len(ok)
        return Strip(self.t[:n].copy(), self.grid[i, :n].copy())


def _step_count(t_end: float, h: float) -> int:
    if h <= 0:
        raise ValueError("step size h must be positive")
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    n = round(t_end / h)
    if abs(n * h - t_end) > 1e-9 * max(1.0, abs(t_end)):
        raise ValueError(f"t_end={t_end} is not a whole number of steps h={h}")
    return n


def integrate_strip(
    pde: Pde,
    P0: SurfaceElement,
    t_end: float,
    h: float,
    *,
    unit_speed: bool = False,
    on_tol: float = ON_TOL,
    inv_tol: float = INV_TOL,
    backend: str | None = None,
) -> Strip:
    """RK4 strip from ``P0`` with samples at t = 0, h, ..., t_end.

    Raises IntegrationError (with the partial strip) when nondegeneracy is
    lost or the state stops being finite.
    """
    nsteps = _step_count(t_end, h)
    pt = at(pde, P0, on_tol, inv_tol)
    pt.require_on_surface()
    kern = kernels.get(backend)
    states, status = kern.integrate(program_for(pde), pt.element.as_tuple(), h, nsteps, inv_tol, unit_speed)
    t = np.arange(len(states)) * h
    strip = Strip(t, states)
    if status != kernels.OK:
        what = "nondegeneracy lost" if status == kernels.DEGENERATE else "non-finite state"
        raise IntegrationError(
            f"{what} after t = {t[-1]:.17g}",
            partial=strip,
            t_last=float(t[-1]),
            degenerate=status == kernels.DEGENERATE,
        )
    return strip


def psi_along(pde: Pde, states: np.ndarray, backend: str | None = None) -> np.ndarray:
    """psi at each row of an (n, 5) state array."""
    states = np.asarray(states, dtype=float).reshape(-1, 5)
    return kernels.get(backend).eval_tape(program_for(pde), 0, states)


def _curve_exprs(curve: Sequence[Expr | str]) -> list[Expr]:
    if len(curve) != 3:
        raise ValueError("initial curve needs three components x(s), y(s), z(s)")
    return [parser.parse(c, ("s",)) if isinstance(c, str) else c for c in curve]


def complete_to_strip(
    pde: Pde,
    curve: Sequence[Expr | str],
    s_samples: Sequence[float],
    seed: tuple[float, float],
    *,
    tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
    inv_tol: float = INV_TOL,
) -> InitialStrip:
    """Attach (p, q) to each point of the curve so that psi = 0 and z' = p x' + q y'.

    Newton on the 2x2 system, warm-started from the previous sample. Raises
    TransversalityError where the Jacobian determinant psi_q x' - psi_p y'
    vanishes (the curve is characteristic there).
    """
    cx, cy, cz = _curve_exprs(curve)
    dcx, dcy, dcz = (parser.differentiate(c, "s") for c in (cx, cy, cz))
    s_arr = np.asarray(s_samples, dtype=float)
    states = np.empty((len(s_arr), 5))
    p, q = (float(v) for v in seed)
    for i, s in enumerate(s_arr):
        env = {"s": float(s)}
        x, y, z = (float(parser.evaluate(c, env)) for c in (cx, cy, cz))
        xs, ys, zs = (float(parser.evaluate(c, env)) for c in (dcx, dcy, dcz))
        converged = False
        for _ in range(max_iter + 1):
            f1 = float(pde.value(x, y, z, p, q, inv_tol))
            f2 = zs - p * xs - q * ys
            grads = pde.gradient(x, y, z, p, q, inv_tol)
            gp, gq = float(grads[3]), float(grads[4])
            det = gq * xs - gp * ys
            jscale = max(abs(gp), abs(gq)) * max(abs(xs), abs(ys))
            if abs(det) <= 1e-9 * jscale or jscale == 0.0:
                raise TransversalityError(
                    f"initial curve is characteristic at s = {s:.17g} (Jacobian determinant {det:.3g})",
                    float(s),
                )
            fscale = max(1.0, abs(zs), abs(p * xs), abs(q * ys))
            if abs(f1) <= tol and abs(f2) <= tol * fscale:
                converged = True
                break
            # Newton step for J = [[gp, gq], [-xs, -ys]], det(J) = det
            p += (ys * f1 + gq * f2) / det
            q -= (xs * f1 + gp * f2) / det
            if not (math.isfinite(p) and math.isfinite(q)):
                break
        if not converged:
            raise NumericError(f"Newton did not converge at s = {s:.17g} within {max_iter} iterations")
        states[i] = (x, y, z, p, q)
    return InitialStrip(s_arr, states)


def sweep(
    pde: Pde,
    init: InitialStrip,
    t_end: float,
    h: float,
    *,
    unit_speed: bool = False,
    on_tol: float = ON_TOL,
    inv_tol: float = INV_TOL,
    backend: str | None = None,
) -> SolutionSheet:
    """Integrate one strip per initial sample and assemble them into a sheet.

    Failed strips keep their partial samples (the rest of the row is NaN) and
    are listed in ``sheet.failures``.
    """
    nsteps = _step_count(t_end, h)
    t = np.arange(nsteps + 1) * h
    grid = np.full((len(init), nsteps + 1, 5), np.nan)
    sheet = SolutionSheet(init.s.copy(), t, grid)
    for i, row in enumerate(init.states):
        try:
            strip = integrate_strip(
                pde, SurfaceElement(*(float(v) for v in row)), t_end, h,
                unit_speed=unit_speed, on_tol=on_tol, inv_tol=inv_tol, backend=backend,
            )
        except IntegrationError as exc:
            grid[i, : len(exc.partial)] = exc.partial.states
            sheet.failures.append((i, str(exc)))
            continue
        except (DegenerateError, OffSurfaceError) as exc:
            sheet.failures.append((i, str(exc)))
            continue
        grid[i] = strip.states
    return sheet


@dataclass(frozen=True)
class SheetReport:
    max_psi: float
    max_strip: float
    max_gradient: float
    empty: bool
    gradient_nodes: int


def sheet_residuals(pde: Pde, sheet: SolutionSheet, backend: str | None = None) -> SheetReport:
    """Largest |psi|, strip-condition residual and gradient residual over the grid.

    The strip residual compares each z-increment with the trapezoidal p dx + q dy.
    The gradient residual recovers (dz/dx, dz/dy) from central differences in
    (s, t) at interior nodes where (x, y) is locally a graph over (s, t) and
    compares with the stored (p, q).
    """
    grid = sheet.grid
    if grid.size == 0:
        return SheetReport(0.0, 0.0, 0.0, True, 0)
    flat = grid.reshape(-1, 5)
    finite = np.all(np.isfinite(flat), axis=1)
    psi = psi_along(pde, flat[finite], backend)
    max_psi = float(np.max(np.abs(psi))) if psi.size else 0.0

    x, y, z, p, q = (grid[..., k] for k in range(5))
    max_strip = 0.0
    if grid.shape[1] > 1:
        dz = np.diff(z, axis=1)
        pm = 0.5 * (p[:, 1:] + p[:, :-1])
        qm = 0.5 * (q[:, 1:] + q[:, :-1])
        strip_res = np.abs(dz - pm * np.diff(x, axis=1) - qm * np.diff(y, axis=1))
        strip_res = strip_res[np.isfinite(strip_res)]
        max_strip = float(strip_res.max()) if strip_res.size else 0.0

    max_grad = 0.0
    nodes = 0
    ns, nt = grid.shape[:2]
    if ns >= 3 and nt >= 3:
        def central(a, axis):
            if axis == 0:
                return (a[2:, 1:-1] - a[:-2, 1:-1]) * 0.5
            return (a[1:-1, 2:] - a[1:-1, :-2]) * 0.5

        xs, ys, zs = central(x, 0), central(y, 0), central(z, 0)
        xt, yt, zt = central(x, 1), central(y, 1), central(z, 1)
        det = xs * yt - ys * xt
        jscale = np.abs(xs * yt) + np.abs(ys * xt)
        with np.errstate(invalid="ignore", divide="ignore"):
            ok = np.isfinite(det) & (np.abs(det) > 1e-9 * jscale) & (jscale > 0)
            ph = (zs * yt - ys * zt) / det
            qh = (xs * zt - zs * xt) / det
            res = np.maximum(np.abs(ph - p[1:-1, 1:-1]), np.abs(qh - q[1:-1, 1:-1]))
        ok &= np.isfinite(res)
        nodes = int(ok.sum())
        if nodes:
            max_grad = float(res[ok].max())
    return SheetReport(max_psi, max_strip, max_grad, False, nodes)


def tangency_along_strip(f1: Expr | str, f2: Expr | str, strip: Strip) -> float:
    """Largest difference of the (z, p, q) 1-jets of the graphs of f1, f2 along the strip."""
    f1, f2 = (parser.parse(f, ("x", "y")) if isinstance(f, str) else f for f in (f1, f2))
    worst = 0.0
    for x, y in zip(strip.x, strip.y):
        j1 = jets.jet_of_graph(f1, x, y)
        j2 = jets.jet_of_graph(f2, x, y)
        worst = max(worst, abs(j1.z - j2.z), abs(j1.p - j2.p), abs(j1.q - j2.q))
    return worst
