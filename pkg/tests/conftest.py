import math

import numpy as np
import pytest

from charpit import SurfaceElement, make_pde

EIKONAL = "p^2 + q^2 - 1"
LINEAR = "p + 2*q - 3"
CLAIRAUT = "z - p*x - q*y"
EXPONENTIAL = "p^2 + q^2 - exp(2*z)"
SAMPLE_PDES = (EIKONAL, LINEAR, CLAIRAUT, EXPONENTIAL)


def sample_on(source: str, rng: np.random.Generator) -> SurfaceElement:
    """A random nondegenerate surface element on psi = 0."""
    if source == EIKONAL:
        th = rng.uniform(0, 2 * math.pi)
        x, y, z = rng.uniform(-2, 2, 3)
        return SurfaceElement(x, y, z, math.cos(th), math.sin(th))
    if source == LINEAR:
        x, y, z, p = rng.uniform(-2, 2, 4)
        return SurfaceElement(x, y, z, p, (3 - p) / 2)
    if source == CLAIRAUT:
        # psi_p = -x, psi_q = -y; keep (x, y) away from the origin
        while True:
            x, y = rng.uniform(-2, 2, 2)
            if math.hypot(x, y) > 0.2:
                break
        p, q = rng.uniform(-2, 2, 2)
        return SurfaceElement(x, y, p * x + q * y, p, q)
    if source == EXPONENTIAL:
        z = rng.uniform(-2, -1.2)
        th = rng.uniform(0, 2 * math.pi)
        x, y = rng.uniform(-2, 2, 2)
        r = math.exp(z)
        return SurfaceElement(x, y, z, r * math.cos(th), r * math.sin(th))
    raise KeyError(source)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=SAMPLE_PDES, ids=["eikonal", "linear", "clairaut", "exponential"])
def pde_source(request):
    return request.param


@pytest.fixture
def pde(pde_source):
    return make_pde(pde_source)


_acceptance_lines: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _acceptance_lines


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance_lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
