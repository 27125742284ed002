"""
Pointed disks and cylinders with a weight s per loop separating the two boundaries,
their shifted versions and their limits at criticality.
"""

import cmath
import math

from loopmaps.errors import DomainError
from loopmaps.geometry import EllipticFrame, x_series
from loopmaps.model import ModelContext, sigma_prime
from loopmaps.specfun import b_of_n, upsilon, upsilon_const


def _separating_weight(n: float, s: float) -> float:
    ns = n * s
    if abs(ns) >= 2:
        raise DomainError(f'ns must lie in (-2, 2), got {ns!r}')
    return ns


def pointed_disk_Gs(s: float, ctx: ModelContext, frame: EllipticFrame, v: complex) -> complex:
    ns = _separating_weight(ctx.n, s)
    b = b_of_n(ctx.n, s)
    mod, v_inf = frame.mod, frame.v_inf
    bracket = (
        -upsilon(b, v + v_inf, mod)
        - upsilon(b, v - v_inf, mod)
        + upsilon(b, -v + v_inf, mod)
        + upsilon(b, -v - v_inf, mod)
    )
    return ctx.u / (2 + ns) * bracket


def cylinder_G2s(n: float, s: float, frame: EllipticFrame, v1: complex, v2: complex) -> complex:
    ns = _separating_weight(n, s)
    b = b_of_n(n, s)
    mod = frame.mod
    total = (
        upsilon(b, v1 + v2, mod, 1)
        - upsilon(b, v1 - v2, mod, 1)
        - upsilon(b, -v1 + v2, mod, 1)
        + upsilon(b, -v1 - v2, mod, 1)
    )
    return total / (4 - ns * ns)


def _x_and_derivative(frame: EllipticFrame, v: complex) -> tuple[complex, complex]:
    series = x_series(frame, complex(v), 1)
    return series.coefficient(0), series.coefficient(1)


def shifted_cylinder(ctx: ModelContext, frame: EllipticFrame, v1: complex, v2: complex) -> complex:
    """G^(2) plus the rational shift turning it into a solution of the inhomogeneous equation."""
    n = ctx.n
    x1, dx1 = _x_and_derivative(frame, v1)
    x2, dx2 = _x_and_derivative(frame, v2)
    sx1, _ = _x_and_derivative(frame, v1 - frame.tau)
    shift = (2 - n * n) / (4 - n * n) * dx1 * dx2 / (x1 - x2) ** 2
    shift -= n / (4 - n * n) * sigma_prime(ctx, x1) * dx1 * dx2 / (sx1 - x2) ** 2
    return cylinder_G2s(n, 1.0, frame, v1, v2) + shift


def usual_cylinder_from_torus(n: float, frame: EllipticFrame, v1: complex, v2: complex) -> complex:
    """Cylinders without separating loops, F^(2)_{s=0}(x(v1), x(v2)), read off the torus."""
    x1, dx1 = _x_and_derivative(frame, v1)
    x2, dx2 = _x_and_derivative(frame, v2)
    return cylinder_G2s(n, 0.0, frame, v1, v2) / (dx1 * dx2) - 1 / (2 * (x1 - x2) ** 2)


def usual_cylinder(gm: float, gp: float, x1: complex, x2: complex) -> complex:
    """Cylinder generating series of maps whose disk function has the cut [gm, gp]."""

    def sigma(x: complex) -> complex:
        return cmath.sqrt(x - gm) * cmath.sqrt(x - gp)

    num = x1 * x2 - (gm + gp) / 2 * (x1 + x2) + gm * gp
    return (-1 + num / (sigma(x1) * sigma(x2))) / (2 * (x1 - x2) ** 2)


def cylinder_limit_H(b: float, eps_xor: float, w1: complex, w2: complex) -> complex:
    if eps_xor == 0.5:
        return 8 * b * cmath.sin(math.pi * b * w1) * cmath.sin(math.pi * b * w2)
    if eps_xor != 0:
        raise DomainError(f'eps_xor must be 0 or 1/2, got {eps_xor!r}')
    total = 0j
    for w, sign in ((w1 + w2, 1), (w1 - w2, -1)):
        if abs(w - round(w.real)) < 1e-12:
            raise DomainError(f'w1 +- w2 must not be an integer, got {w!r}')
        sin = cmath.sin(math.pi * w)
        total += sign * (b - 1) * cmath.sin(math.pi * (b - 1) * w) / sin
        total += sign * cmath.cos(math.pi * w) * cmath.cos(math.pi * (b - 1) * w) / sin**2
    return total


def cylinder_limit_G2(
    n: float, s: float, T: float, eps1: float, eps2: float, w1: complex, w2: complex, *, subleading: bool = False
) -> complex:
    """
    Leading behavior of G^(2)_s(eps1 + tau w1, eps2 + tau w2) as T -> 0.

    With equal colors both v1 + v2 and -v1 - v2 sit near the pole lattice, hence the factor 2.
    With subleading, the next order is kept: -q^b H_{b+2,0} for equal colors, -q^(1-b) H_{b-2,1/2}
    otherwise, leaving a relative error O(q^(2-b)) or O(q).
    """
    ns = _separating_weight(n, s)
    b = b_of_n(n, s)
    q = math.exp(-math.pi / T)
    eps_xor = 0.5 if eps1 != eps2 else 0
    weight = 2 if eps_xor == 0 else 1
    prefactor = (math.pi / T) ** 2 * q ** (eps_xor * b) / ((4 - ns * ns) * (1 - q**b))
    value = cylinder_limit_H(b, eps_xor, w1, w2)
    if subleading and eps_xor == 0:
        value -= q**b * cylinder_limit_H(b + 2, 0, w1, w2)
    elif subleading:
        value -= q ** (1 - b) * cylinder_limit_H(b - 2, 0.5, w1, w2)
    return prefactor * weight * value


def beta_tilde_02(n: float, s: float, eps1: float, eps2: float) -> float:
    """Exponent of q in the singular part of the cylinder series."""
    b = b_of_n(n, s)
    if eps1 != eps2:
        return (b - 1) / 2
    if eps1 == 0:
        return -1.0
    return b


def schwarzian(frame: EllipticFrame, v: complex) -> complex:
    series = x_series(frame, complex(v), 3)
    d1, d2, d3 = (series.coefficient(r) * math.factorial(r) for r in (1, 2, 3))
    return d3 / d1 - 1.5 * (d2 / d1) ** 2


def shifted_cylinder_diagonal(ctx: ModelContext, frame: EllipticFrame, eps: float, w: complex) -> complex:
    """
    Shifted cylinder at (tau + eps + w, tau + eps - w), where x takes the same value at both points
    and the pole of the rational shift cancels against the pole of G^(2).
    """
    n = ctx.n
    b = ctx.b
    mod = frame.mod
    v = frame.tau + eps + w
    x1, dx1 = _x_and_derivative(frame, v)
    xs, dxs = _x_and_derivative(frame, eps + w)
    first = -(2 - n * n) / (4 - n * n) * (upsilon_const(b, mod) + schwarzian(frame, v) / 6)
    second = n / (4 - n * n) * dxs * dx1 / (xs - x1) ** 2
    third = (upsilon(b, 2 * w, mod, 1) + upsilon(b, -2 * w, mod, 1)) / (4 - n * n)
    return first + second - third
