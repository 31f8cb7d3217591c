"""Acceptance suite: the eleven end-to-end criteria at their stated tolerances.

Each test prints one ``criterion N: PASS|FAIL`` line (also collected into the
terminal summary) before asserting.
"""

import csv
import io
import math

import numpy as np
import pytest

from charpit import SurfaceElement, cli, jets, linalg, make_pde, parser, weil
from charpit import pde as P
from charpit.jets import Displacement
from charpit.strips import SolutionSheet, integrate_strip, psi_along, sheet_residuals, tangency_along_strip
from conftest import EIKONAL, EXPONENTIAL, SAMPLE_PDES, sample_on

SEED = 7


@pytest.fixture
def report(acceptance_log):
    def emit(n, ok, detail):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        acceptance_log.append(line)
        assert ok, line

    return emit


def _points(source, count, seed=SEED):
    rng = np.random.default_rng(seed)
    pde = make_pde(source)
    return pde, [P.at(pde, sample_on(source, rng)) for _ in range(count)]


def test_criterion_01_united_position_symmetry(report):
    rng = np.random.default_rng(SEED)
    nonzero = 0
    for p, q in rng.uniform(-10, 10, (100, 2)):
        if not weil.is_zero(jets.reversed_united_residual(float(p), float(q)), 0.0):
            nonzero += 1
    report(1, nonzero == 0, f"reversed united position identically zero for {100 - nonzero}/100 (p, q)")


def test_criterion_02_characteristic_symmetry(report):
    worst, bad = 0.0, 0
    for src in SAMPLE_PDES:
        _, pts = _points(src, 50)
        for pt in pts:
            r = P.symmetry_residual(pt)
            worst = max(worst, r)
            bad += not P.symmetry_check(pt, 1e-12)
    report(2, bad == 0, f"200 points, max relative coefficient {worst:.3e} (tol 1e-12)")


def _homogeneous_residual(system, k):
    scale = max(abs(system.p1), abs(system.p2)) * max(abs(v) for v in k)
    return max(abs(system.p1 * k[0] + system.p2 * k[1]), abs(system.p1 * k[1] + system.p2 * k[2])) / scale


def test_criterion_03_solution_calotte_family(report):
    worst, bad = 0.0, 0
    for src in SAMPLE_PDES:
        _, pts = _points(src, 50)
        for pt in pts:
            system = P.calotte_system(pt)
            fam = P.solution_calotte_family(pt)
            for c in (-10.0, -1.0, 0.0, 1.0, 10.0):
                rst = fam.member(c)
                for e, s in zip(system.residuals(rst), system.row_scales(rst)):
                    rel = abs(e) / s if s else abs(e)
                    worst = max(worst, rel)
                    bad += rel > 1e-12
            px, py = pt.psi_p, pt.psi_q
            raw = (py * py, -px * py, px * px)
            hom = _homogeneous_residual(system, raw)
            worst = max(worst, hom)
            bad += hom > 1e-12
    eik = P.solution_calotte_family(P.at(make_pde(EIKONAL), SurfaceElement(0, 0, 0, 1, 0)))
    eik_ok = np.allclose(eik.member(0.0), 0.0, atol=1e-15) and np.allclose(np.abs(eik.kernel), [0, 0, 1])
    report(3, bad == 0 and eik_ok,
           f"max relative residual {worst:.3e}; eikonal at (0,0,0,1,0) family (0,0,t): {eik_ok}")


def test_criterion_04_characteristic_criterion(report):
    rng = np.random.default_rng(SEED + 1)
    disagree, wrong, cases, worst = 0, 0, 0, 0.0
    for k in range(20):
        src = SAMPLE_PDES[k % 4]
        pde = make_pde(src)
        pt = P.at(pde, sample_on(src, rng))
        el = pt.element
        direction = P.characteristic_direction(pt)
        A = P.calotte_system(pt)
        for j in range(10):
            lam = float(rng.choice([-1, 1]) * 10 ** rng.uniform(-4, 1))
            d = direction.scaled(lam)
            characteristic = j % 2 == 0
            if not characteristic:
                bump = rng.normal(size=4) * 0.05 * lam * max(1.0, np.max(np.abs(direction.as_array())))
                d = Displacement.united(el, d.dx + bump[0], d.dy + bump[1], d.dp + bump[2], d.dq + bump[3])
            got = P.is_characteristic_neighbour(pt, d)
            cont = linalg.system_containment_factor(A, linalg.neighbour_system(d.dx, d.dy, d.dp, d.dq))
            cases += 1
            if (got is None) != (cont is None):
                disagree += 1
            elif got is not None:
                rel = abs(got - cont) / abs(got)
                worst = max(worst, rel)
                disagree += rel > 1e-9
            wrong += (got is not None) != characteristic
    report(4, disagree == 0 and wrong == 0 and cases == 200,
           f"{cases} candidates at 20 points: {disagree} disagreements, {wrong} misclassified, "
           f"max lambda mismatch {worst:.3e}")


def test_criterion_05_monge_calotte_agreement(report):
    worst = 0.0
    for src in SAMPLE_PDES:
        _, pts = _points(src, 100)
        for pt in pts:
            mx, my = P.monge_direction(pt)
            d = P.characteristic_direction(pt)
            n = math.hypot(d.dx, d.dy)
            worst = max(worst, abs(mx - d.dx / n), abs(my - d.dy / n))
    report(5, worst <= 1e-10, f"400 points, max direction difference {worst:.3e} (tol 1e-10)")


def test_criterion_06_conservation_along_strips(report):
    rng = np.random.default_rng(SEED + 2)
    worst_psi = 0.0
    for src in SAMPLE_PDES:
        pde = make_pde(src)
        for _ in range(5):
            strip = integrate_strip(pde, sample_on(src, rng), 1.0, 1e-3)
            worst_psi = max(worst_psi, float(np.max(np.abs(psi_along(pde, strip.states)))))
    pde = make_pde(EIKONAL)
    drift = closed = 0.0
    for _ in range(5):
        P0 = sample_on(EIKONAL, rng)
        strip = integrate_strip(pde, P0, 1.0, 1e-3)
        t = strip.t
        drift = max(drift, float(np.max(np.abs(strip.p - P0.p))), float(np.max(np.abs(strip.q - P0.q))))
        exact = np.column_stack([P0.x + 2 * P0.p * t, P0.y + 2 * P0.q * t, P0.z + 2 * t])
        closed = max(closed, float(np.max(np.abs(strip.states[:, :3] - exact))))
    ok = worst_psi <= 1e-8 and drift <= 1e-12 and closed <= 1e-10
    report(6, ok, f"max |psi| {worst_psi:.3e}; eikonal (p,q) drift {drift:.3e}, closed-form error {closed:.3e}")


def test_criterion_07_rk4_order(report):
    pde = make_pde(EXPONENTIAL)
    z0, th = -1.5, 0.7
    P0 = SurfaceElement(0.3, -0.2, z0, math.exp(z0) * math.cos(th), math.exp(z0) * math.sin(th))
    h = 0.1
    ref = integrate_strip(pde, P0, 1.0, h / 64).states[-1]
    e1 = np.max(np.abs(integrate_strip(pde, P0, 1.0, h).states[-1] - ref))
    e2 = np.max(np.abs(integrate_strip(pde, P0, 1.0, h / 2).states[-1] - ref))
    ratio = e1 / e2
    report(7, 12 <= ratio <= 20, f"h={h}: errors {e1:.3e}, {e2:.3e}, ratio {ratio:.2f} (want [12, 20])")


def test_criterion_08_cauchy_cone(report, tmp_path, capsys):
    mesh = tmp_path / "cone.obj"
    argv = ["solve", "--psi", EIKONAL, "--curve", "cos(s)", "sin(s)", "0",
            "--s-range", "0", repr(2 * math.pi), "--n-s", "64", "--seed", "-1", "0",
            "--t-end", "0.4", "--h", "1e-3", "--out", str(mesh)]
    code = cli.main(argv, out=io.StringIO())
    with open(mesh.with_suffix(".csv")) as fh:
        rows = np.array([[float(v) for v in r] for r in list(csv.reader(fh))[1:]])
    x, y, z = rows[:, 2], rows[:, 3], rows[:, 4]
    zerr = float(np.max(np.abs(z - (1 - np.hypot(x, y)))))
    # rebuild the sheet from the written grid for the residual report
    s = np.unique(rows[:, 0])
    t = np.unique(rows[:, 1])
    sheet = SolutionSheet(s, t, rows[:, 2:].reshape(len(s), len(t), 5))
    rep = sheet_residuals(make_pde(EIKONAL), sheet)
    ok = code == 0 and zerr <= 1e-6 and rep.max_psi <= 1e-8 and rep.max_gradient <= 1e-4 and rep.gradient_nodes > 0
    report(8, ok, f"exit {code}; max |z error| {zerr:.3e}, max |psi| {rep.max_psi:.3e}, "
                  f"gradient residual {rep.max_gradient:.3e} over {rep.gradient_nodes} nodes")


def test_criterion_09_tangency_propagation(report):
    pde = make_pde(EIKONAL)
    strip = integrate_strip(pde, SurfaceElement(0, 0, 0, 1, 0), 0.4, 1e-3)
    cone = "1 - sqrt((x - 1)^2 + y^2)"
    same = tangency_along_strip("x", cone, strip)
    control = tangency_along_strip("x + 0.1*y", cone, strip)
    report(9, same <= 1e-8 and control >= 0.05,
           f"plane vs cone discrepancy {same:.3e} (tol 1e-8); control {control:.3e} (want >= 0.05)")


def test_criterion_10_base_point(report):
    results = {}
    for n in (1, 2, 3, 5):
        spec = weil.BlockSpec.of((n, 1), (n, 1))
        zeta = weil.generators(spec, 0)
        rng = np.random.default_rng(n)
        z = [weil.dot(rng.uniform(-1, 1, n), zeta) for _ in range(n)]
        exact = all(
            weil.coefficient_of((zi + weil.generator(spec, 1, i)) ** 2, 1, i) == 2.0 * zi
            for i, zi in enumerate(z)
        )
        results[n] = exact and linalg.is_base_point_only_zero(n, trials=10, seed=n)
    report(10, all(results.values()), f"n -> passed: {results}")


def test_criterion_11_derivative_cross_check(report):
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    for src in SAMPLE_PDES:
        pde = make_pde(src)
        for vals in rng.uniform(-2, 2, (1000, 5)):
            env = dict(zip(parser.PDE_VARIABLES, map(float, vals)))
            generic = parser.weil_gradient(pde.psi, env, parser.PDE_VARIABLES)
            symbolic = [parser.evaluate(e, env) for e in pde.partials]
            for s, g in zip(symbolic, generic):
                worst = max(worst, abs(s - g) / max(1.0, abs(s)))
    report(11, worst <= 1e-12, f"4000 points, max relative difference {worst:.3e} (tol 1e-12)")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
