import math
from collections.abc import Callable
from typing import NamedTuple

import numpy as np
import pytest

from loopmaps.disk import branchpoints, calibrate_weights, critical_approach_at_nome
from loopmaps.errors import LoopmapsError
from loopmaps.geometry import EllipticFrame, build_parametrization
from loopmaps.model import ModelContext, Phase, critical_line, rho_bounds

# shifts of the cut [-1, 1] to the right; the symmetric cut needs a negative face weight g
_SHIFTS = (0.2, 0.3, 0.4, 0.5, 0.6)


class Setup(NamedTuple):
    ctx: ModelContext
    frame: EllipticFrame


def calibrated_setup(n: float, alpha: float, h: float, half_width: float = 1.0) -> Setup:
    """An exact model configuration: branch points chosen first, (u, g) calibrated to them."""
    for shift in _SHIFTS:
        try:
            bp = branchpoints(alpha, h, shift - half_width, shift + half_width)
            u, g = calibrate_weights(n, alpha, h, bp)
            ctx = ModelContext(n=n, alpha=alpha, g=g, h=h, u=u)
        except LoopmapsError:
            continue
        return Setup(ctx, build_parametrization(bp))
    pytest.skip(f'no admissible calibrated configuration for n={n}, alpha={alpha}, h={h}')


@pytest.fixture(scope='session')
def calibrated() -> Setup:
    return calibrated_setup(1.0, 1.0, 0.2)


@pytest.fixture(scope='session')
def calibrated_bent() -> Setup:
    return calibrated_setup(1.0, 0.8, 0.2)


# nomes targeted along the approach u -> 1
CRITICAL_NOMES = tuple(np.logspace(-3, -6, 6))
# a dense point strictly inside (rho_min, rho_max) for n = 1
CRITICAL_RHO = 1.6


def critical_rho(n: float, phase: Phase) -> float:
    bounds = rho_bounds(n)
    if phase == 'dilute':
        return bounds.rho_min
    return CRITICAL_RHO if n == 1 else (bounds.rho_min + bounds.rho_max) / 2


def approach_setup(n: float, phase: Phase, q: float) -> Setup:
    """Calibrated frame at nome close to q, on the line u -> 1 at fixed critical (g, h)."""
    rho = critical_rho(n, phase)
    point = critical_line(n, rho)
    h = math.sqrt(point.h_squared)
    approach = critical_approach_at_nome(n, rho, q)
    ctx = ModelContext(n=n, alpha=1.0, g=point.g_over_h * h, h=h, u=approach.u)
    return Setup(ctx, build_parametrization(approach.bp))


@pytest.fixture(scope='session')
def critical_approaches() -> Callable[[float, Phase], list[Setup]]:
    """Frames approaching the critical point of a phase, ordered by decreasing q."""
    cache: dict[tuple[float, Phase], list[Setup]] = {}

    def build(n: float, phase: Phase) -> list[Setup]:
        if (n, phase) not in cache:
            cache[n, phase] = [approach_setup(n, phase, q) for q in CRITICAL_NOMES]
        return cache[n, phase]

    return build


@pytest.fixture(scope='session')
def dense_approach(critical_approaches) -> list[Setup]:
    return critical_approaches(1.0, 'dense')
