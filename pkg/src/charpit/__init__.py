"""First-order PDEs by characteristics, with Weil-algebra checks of the geometry."""

from charpit.errors import (
    CharpitError,
    DegenerateError,
    EvalError,
    IntegrationError,
    NumericError,
    OffSurfaceError,
    ParseError,
    TransversalityError,
)
from charpit.jets import Calotte, Displacement, SurfaceElement
from charpit.parser import Pde, make_pde, parse
from charpit.weil import BlockSpec, WeilElement

__version__ = "0.1.0"

__all__ = [
    "BlockSpec",
    "Calotte",
    "CharpitError",
    "DegenerateError",
    "Displacement",
    "EvalError",
    "IntegrationError",
    "NumericError",
    "OffSurfaceError",
    "ParseError",
    "Pde",
    "SurfaceElement",
    "TransversalityError",
    "WeilElement",
    "make_pde",
    "parse",
]
