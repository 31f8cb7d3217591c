"""Time the RK4 strip kernel and psi evaluation on each available backend.

    python3 benchmarks/bench_kernels.py [--steps N] [--repeat R]
"""

import argparse
import math
import time

import numpy as np

from charpit import kernels, make_pde
from charpit.strips import program_for

CASES = {
    "eikonal": ("p^2 + q^2 - 1", (0.0, 0.0, 0.0, 0.6, 0.8)),
    "exponential": ("p^2 + q^2 - exp(2*z)", (0.0, 0.0, -1.5, math.exp(-1.5), 0.0)),
    "trig": ("p^2 + q^2 - (2 + sin(x)*cos(y))^2", (0.0, 0.0, 0.0, 2.0, 0.0)),
}


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = kernels.available()
    print(f"backends: {', '.join(backends)}; {args.steps} RK4 steps, best of {args.repeat}")
    print(f"{'case':<12} {'kernel':<10} " + " ".join(f"{b:>12}" for b in backends) + "   speedup")
    states = np.random.default_rng(0).uniform(-1, 1, (args.steps, 5))
    for name, (src, start) in CASES.items():
        prog = program_for(make_pde(src))
        row = {}
        for b in backends:
            k = kernels.get(b)
            row[b] = best_of(lambda: k.integrate(prog, start, 1e-4, args.steps, 1e-9), args.repeat)
        tape = {}
        for b in backends:
            k = kernels.get(b)
            tape[b] = best_of(lambda: k.eval_tape(prog, 0, states), args.repeat)
        for label, res in (("integrate", row), ("eval_tape", tape)):
            cells = " ".join(f"{res[b] * 1e3:>10.2f}ms" for b in backends)
            speed = f"{res['python'] / res['cython']:8.1f}x" if "cython" in res else "       -"
            print(f"{name:<12} {label:<10} {cells} {speed}")


if __name__ == "__main__":
    main()
