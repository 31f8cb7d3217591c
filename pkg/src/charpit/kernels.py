"""Backend selection for the strip kernels.

The compiled extension is used when it imports; otherwise the pure-Python
implementation; ``CHARPIT_BACKEND=python`` forces the fallback. Both expose ``integrate(program, state0, h, nsteps, inv_tol,
unit_speed)`` and ``eval_tape(program, which, states)`` with identical
semantics.
"""

from __future__ import annotations

import os
from types import ModuleType

from charpit import _pykernels

OK, DEGENERATE, NONFINITE = _pykernels.OK, _pykernels.DEGENERATE, _pykernels.NONFINITE

BACKENDS: dict[str, ModuleType] = {"python": _pykernels}

try:
    from charpit import _ckernels
except ImportError:  # extension not built
    _ckernels = None
else:
    BACKENDS["cython"] = _ckernels

DEFAULT = os.environ.get("CHARPIT_BACKEND") or ("cython" if _ckernels is not None else "python")
if DEFAULT not in BACKENDS:
    raise ImportError(f"CHARPIT_BACKEND={DEFAULT!r} is not available; have {sorted(BACKENDS)}")


def available() -> list[str]:
    return sorted(BACKENDS)


def get(name: str | None = None) -> ModuleType:
    name = name or DEFAULT
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} unavailable; have {available()}") from None
