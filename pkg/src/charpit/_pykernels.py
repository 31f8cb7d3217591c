"""Pure-Python strip kernels; the fallback when the compiled extension is absent."""

from __future__ import annotations

import math

import numpy as np

from charpit.program import FieldProgram

OK, DEGENERATE, NONFINITE = 0, 1, 2

NAME = "python"


def _field(funcs, s, unit_speed):
    x, y, z, p, q = s
    fx = funcs[1](x, y, z, p, q)
    fy = funcs[2](x, y, z, p, q)
    fz = funcs[3](x, y, z, p, q)
    fp = funcs[4](x, y, z, p, q)
    fq = funcs[5](x, y, z, p, q)
    margin = max(abs(fp), abs(fq))
    v = (fp, fq, p * fp + q * fq, -fx - p * fz, -fy - q * fz)
    speed = math.sqrt(fp * fp + fq * fq)
    if unit_speed and speed > 0.0:
        v = tuple(c / speed for c in v)
    return v, margin


def integrate(program: FieldProgram, state0, h: float, nsteps: int, inv_tol: float,
              unit_speed: bool = False) -> tuple[np.ndarray, int]:
    """Classical RK4 on the characteristic field; returns (samples, status)."""
    funcs = program.funcs
    out = np.empty((nsteps + 1, 5))
    s = tuple(float(v) for v in state0)
    out[0] = s
    half = 0.5 * h
    sixth = h / 6.0
    for i in range(nsteps):
        try:
            k1, margin = _field(funcs, s, unit_speed)
            if margin <= inv_tol:
                return out[: i + 1], DEGENERATE
            k2, _ = _field(funcs, tuple(a + half * b for a, b in zip(s, k1)), unit_speed)
            k3, _ = _field(funcs, tuple(a + half * b for a, b in zip(s, k2)), unit_speed)
            k4, _ = _field(funcs, tuple(a + h * b for a, b in zip(s, k3)), unit_speed)
        except (ValueError, ZeroDivisionError, OverflowError):
            return out[: i + 1], NONFINITE
        s = tuple(
            a + sixth * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
            for a, b1, b2, b3, b4 in zip(s, k1, k2, k3, k4)
        )
        if not all(math.isfinite(v) for v in s + k1 + k2 + k3 + k4):
            return out[: i + 1], NONFINITE
        out[i + 1] = s
    return out, OK


def eval_tape(program: FieldProgram, which: int, states: np.ndarray) -> np.ndarray:
    """Value of tape ``which`` (0 = psi) at each row of ``states``; NaN where undefined."""
    f = program.funcs[which]
    out = np.empty(len(states))
    for i, row in enumerate(states):
        try:
            out[i] = f(*(float(v) for v in row))
        except (ValueError, ZeroDivisionError, OverflowError):
            out[i] = math.nan
    return out
