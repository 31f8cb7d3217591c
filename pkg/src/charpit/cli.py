"""Command-line interface: ``charpit verify | strip | solve | monge``.

Exit codes: 0 ok, 1 usage, 2 off the PDE, 3 degenerate, 4 transversality,
5 numeric failure. Numbers are written with 17 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from charpit import parser, pde as pdemod, strips, verify
from charpit.errors import (
    DegenerateError,
    EvalError,
    IntegrationError,
    NumericError,
    OffSurfaceError,
    ParseError,
    TransversalityError,
)
from charpit.jets import SurfaceElement

EXIT_OK, EXIT_USAGE, EXIT_OFF, EXIT_DEGENERATE, EXIT_TRANSVERSALITY, EXIT_NUMERIC = range(6)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    psi_source: str
    on_tol: float = pdemod.ON_TOL
    inv_tol: float = pdemod.INV_TOL
    conservation_tol: float = 1e-8
    h: float = 1e-3
    t_end: float = 1.0
    out: Path | None = None

    def __post_init__(self):
        if self.h <= 0:
            raise UsageError("--h must be positive")
        if min(self.on_tol, self.inv_tol, self.conservation_tol) <= 0:
            raise UsageError("tolerances must be positive")
        try:
            strips._step_count(self.t_end, self.h)
        except ValueError as exc:
            raise UsageError(str(exc)) from None


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _config(args) -> RunConfig:
    return RunConfig(
        psi_source=args.psi,
        on_tol=args.tol,
        inv_tol=args.inv_tol,
        conservation_tol=args.conservation_tol,
        h=getattr(args, "h", 1e-3),
        t_end=getattr(args, "t_end", 1.0),
        out=Path(args.out) if getattr(args, "out", None) else None,
    )


def cmd_verify(args, out) -> int:
    cfg = _config(args)
    pde = parser.make_pde(cfg.psi_source)
    P = SurfaceElement(*args.point)
    checks = verify.run_checks(pde, P, cfg.on_tol, cfg.inv_tol)
    print(f"psi = {cfg.psi_source} at {tuple(args.point)}", file=out)
    for c in checks:
        print(c.line(), file=out)
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed", file=out)
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_strip(args, out) -> int:
    cfg = _config(args)
    pde = parser.make_pde(cfg.psi_source)
    P = SurfaceElement(*args.point)
    error = None
    try:
        strip = strips.integrate_strip(pde, P, cfg.t_end, cfg.h, unit_speed=args.unit_speed,
                                       on_tol=cfg.on_tol, inv_tol=cfg.inv_tol)
    except IntegrationError as exc:
        strip, error = exc.partial, exc
    psi = strips.psi_along(pde, strip.states)
    with open(cfg.out, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["t", "x", "y", "z", "p", "q", "psi_residual"])
        for t, row, r in zip(strip.t, strip.states, psi):
            w.writerow([fmt(t), *(fmt(v) for v in row), fmt(r)])
        if error is not None:
            fh.write(f"# error: {error}\n")
    worst = float(np.max(np.abs(psi)))
    verdict = "ok" if worst <= cfg.conservation_tol else "exceeds conservation tolerance"
    print(f"{len(strip)} samples written to {cfg.out}; max |psi| = {worst:.3e} ({verdict})", file=out)
    if error is not None:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_DEGENERATE if error.degenerate else EXIT_NUMERIC
    return EXIT_OK


def _s_samples(a: float, b: float, n: int, endpoint: bool) -> np.ndarray:
    if n < 1:
        raise UsageError("--n-s must be at least 1")
    if n == 1:
        return np.array([a])
    return np.linspace(a, b, n, endpoint=endpoint)


def write_mesh(path: Path, sheet: strips.SolutionSheet) -> int:
    """Quad mesh: one vertex per grid node (row-major in s), faces between finite nodes."""
    ns, nt = sheet.shape
    faces = 0
    with open(path, "w", newline="") as fh:
        for i in range(ns):
            for j in range(nt):
                x, y, z = sheet.grid[i, j, :3]
                fh.write(f"v {fmt(x)} {fmt(y)} {fmt(z)}\n")
        finite = np.all(np.isfinite(sheet.grid), axis=2)
        for i in range(ns - 1):
            for j in range(nt - 1):
                if finite[i, j] and finite[i + 1, j] and finite[i + 1, j + 1] and finite[i, j + 1]:
                    a = i * nt + j + 1
                    fh.write(f"f {a} {a + nt} {a + nt + 1} {a + 1}\n")
                    faces += 1
    return faces


def write_sheet_csv(path: Path, sheet: strips.SolutionSheet) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["s", "t", "x", "y", "z", "p", "q"])
        for i, s in enumerate(sheet.s):
            for j, t in enumerate(sheet.t):
                w.writerow([fmt(s), fmt(t), *(fmt(v) for v in sheet.grid[i, j])])


def cmd_solve(args, out) -> int:
    cfg = _config(args)
    pde = parser.make_pde(cfg.psi_source)
    s = _s_samples(args.s_range[0], args.s_range[1], args.n_s, args.endpoint)
    init = strips.complete_to_strip(pde, args.curve, s, tuple(args.seed), inv_tol=cfg.inv_tol)
    sheet = strips.sweep(pde, init, cfg.t_end, cfg.h, unit_speed=args.unit_speed,
                         on_tol=cfg.on_tol, inv_tol=cfg.inv_tol)
    mesh_path = cfg.out
    csv_path = Path(args.csv) if args.csv else mesh_path.with_suffix(".csv")
    faces = write_mesh(mesh_path, sheet)
    write_sheet_csv(csv_path, sheet)
    rep = strips.sheet_residuals(pde, sheet)
    print(f"sheet {sheet.shape[0]} x {sheet.shape[1]} written to {mesh_path} ({faces} faces) and {csv_path}",
          file=out)
    print(f"max |psi|            = {rep.max_psi:.3e}", file=out)
    print(f"max strip residual   = {rep.max_strip:.3e}", file=out)
    print(f"max gradient residual= {rep.max_gradient:.3e} over {rep.gradient_nodes} interior nodes", file=out)
    if sheet.failures:
        for i, msg in sheet.failures:
            print(f"strip {i} (s = {fmt(sheet.s[i])}): {msg}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_monge(args, out) -> int:
    cfg = _config(args)
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    pde = parser.make_pde(cfg.psi_source)
    step = args.step if args.step is not None else 2.0 * math.pi / args.n
    x, y, z = args.base
    dirs = pdemod.monge_cone_sample(pde, x, y, z, args.n - 1, tuple(args.seed), step=step,
                                    on_tol=cfg.on_tol, inv_tol=cfg.inv_tol)
    with open(cfg.out, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["p", "q", "dx", "dy", "dz"])
        for d in dirs:
            w.writerow([fmt(d.element.p), fmt(d.element.q), fmt(d.dx), fmt(d.dy), fmt(d.dz)])
    print(f"{len(dirs)} cone directions written to {cfg.out}", file=out)
    if len(dirs) < args.n:
        print(f"warning: nondegeneracy lost after {len(dirs)} directions", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--psi", required=True, help="defining function psi(x, y, z, p, q)")
    common.add_argument("--tol", type=float, default=pdemod.ON_TOL, help="membership tolerance |psi| <= tol")
    common.add_argument("--inv-tol", type=float, default=pdemod.INV_TOL, help="invertibility threshold")
    common.add_argument("--conservation-tol", type=float, default=1e-8)

    integ = _Parser(add_help=False)
    integ.add_argument("--h", type=float, default=1e-3, help="RK4 step")
    integ.add_argument("--t-end", type=float, default=1.0)
    integ.add_argument("--unit-speed", action="store_true", help="unit speed in (x, y)")

    ap = _Parser(prog="charpit", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", parents=[common], help="run the generic checks at a surface element")
    v.add_argument("--point", type=float, nargs=5, required=True, metavar=("X", "Y", "Z", "P", "Q"))
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("strip", parents=[common, integ], help="integrate one characteristic strip to CSV")
    s.add_argument("--point", type=float, nargs=5, required=True, metavar=("X", "Y", "Z", "P", "Q"))
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_strip)

    c = sub.add_parser("solve", parents=[common, integ], help="solve a Cauchy problem to a quad mesh")
    c.add_argument("--curve", nargs=3, required=True, metavar=("X(s)", "Y(s)", "Z(s)"))
    c.add_argument("--s-range", type=float, nargs=2, required=True, metavar=("A", "B"))
    c.add_argument("--n-s", type=int, required=True)
    c.add_argument("--endpoint", action="store_true", help="include s = B")
    c.add_argument("--seed", type=float, nargs=2, required=True, metavar=("P", "Q"))
    c.add_argument("--out", required=True, help="mesh path; the grid CSV goes next to it")
    c.add_argument("--csv", help="grid CSV path (default: mesh path with .csv suffix)")
    c.set_defaults(func=cmd_solve)

    m = sub.add_parser("monge", parents=[common], help="sample the Monge cone at a base point")
    m.add_argument("--base", type=float, nargs=3, required=True, metavar=("X", "Y", "Z"))
    m.add_argument("--seed", type=float, nargs=2, required=True, metavar=("P", "Q"))
    m.add_argument("--n", type=int, required=True, help="number of rows")
    m.add_argument("--step", type=float, help="arc-length step in the (p, q)-plane (default 2*pi/n)")
    m.add_argument("--out", required=True)
    m.set_defaults(func=cmd_monge)
    return ap


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # --help, or a usage error already reported
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except (UsageError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OffSurfaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OFF
    except DegenerateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except TransversalityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRANSVERSALITY
    except (NumericError, EvalError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
