"""
Triangulations carrying an O(n) loop model with bending energy.

Faces not visited by a loop weigh g, visited faces weigh h, every pair of consecutive loop
turns on the same side weighs alpha and every loop weighs n. Vertices weigh u.
"""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Literal, NamedTuple

import numpy as np
from scipy.optimize import brentq

from loopmaps.errors import DomainError, PoleProximityError
from loopmaps.geometry import EllipticFrame
from loopmaps.laurent import Laurent
from loopmaps.specfun import b_of_n

Phase = Literal['dense', 'dilute', 'off-critical']

_LINE_TOL = 1e-9
_RHO_TOL = 1e-12


class CriticalPoint(NamedTuple):
    g_over_h: float
    h_squared: float


class RhoBounds(NamedTuple):
    rho_min: float
    rho_max: float
    # positivity bound, always below rho_min and therefore superseded
    rho_min_prime: float
    prime_superseded: bool = True


class GHat(NamedTuple):
    ghat0: complex
    ghat1: complex
    ghat2: complex
    ghat3: complex


@dataclass(frozen=True)
class ModelContext:
    n: float
    alpha: float
    g: float
    h: float
    u: float = 1.0

    def __post_init__(self):
        if not 0 < self.n < 2:
            raise DomainError(f'Loop weight n must lie in (0, 2), got {self.n!r}')
        if not self.alpha >= 0:
            raise DomainError(f'Bending energy must be non-negative, got {self.alpha!r}')
        if not self.g >= 0:
            raise DomainError(f'Face weight g must be non-negative, got {self.g!r}')
        if not self.h > 0:
            raise DomainError(f'Face weight h must be positive, got {self.h!r}')
        if not 0 < self.u <= 1:
            raise DomainError(f'Vertex weight u must lie in (0, 1], got {self.u!r}')

    @classmethod
    def on_critical_line(cls, n: float, rho: float, u: float = 1.0) -> 'ModelContext':
        point = critical_line(n, rho)
        h = math.sqrt(point.h_squared)
        return cls(n=n, alpha=1.0, g=point.g_over_h * h, h=h, u=u)

    @cached_property
    def b(self) -> float:
        return b_of_n(self.n)

    @cached_property
    def rho(self) -> float | None:
        """Position on the critical line, or None when (g, h) is not on it."""
        return locate_on_critical_line(self.n, self.alpha, self.g, self.h)

    @cached_property
    def phase(self) -> Phase:
        return classify_phase(self.n, self.alpha, self.g, self.h)

    @property
    def d_flag(self) -> int:
        return {'dense': 1, 'dilute': -1}.get(self.phase, 0)

    @property
    def c(self) -> float | None:
        if self.phase == 'off-critical':
            return None
        return phase_constants(self.n, self.phase).c


def _sigma_den(ctx: ModelContext, x: float) -> float:
    return ctx.alpha * ctx.h + (1 - ctx.alpha**2) * ctx.h**2 * x


def involution_sigma(ctx: ModelContext, x: float) -> float:
    den = _sigma_den(ctx, x)
    if den == 0:
        raise PoleProximityError(complex(x), complex(sigma_inf(ctx)))
    return (1 - ctx.alpha * ctx.h * x) / den


def sigma_prime(ctx: ModelContext, x: complex) -> complex:
    return -(ctx.h**2) / _sigma_den(ctx, x) ** 2


def sigma_second(ctx: ModelContext, x: complex) -> complex:
    return 2 * (1 - ctx.alpha**2) * ctx.h**4 / _sigma_den(ctx, x) ** 3


def sigma_inf(ctx: ModelContext) -> float:
    """Image of infinity under the involution, which is also its pole."""
    if ctx.alpha == 1:
        return math.inf
    return -ctx.alpha / ((1 - ctx.alpha**2) * ctx.h)


def sigma_fixed_point(ctx: ModelContext) -> float:
    return 1 / (ctx.h * (ctx.alpha + 1))


def annulus_kernels(ctx: ModelContext, x: complex, z: complex) -> tuple[complex, complex]:
    """Generating series of annuli R(x, z) and its derivative A(x, z) = d/dx R(x, z)."""
    ah = ctx.alpha * ctx.h
    c2 = (1 - ctx.alpha**2) * ctx.h**2
    arg = 1 - ah * (x + z) - c2 * x * z
    if isinstance(arg, float) and arg <= 0:
        raise DomainError(f'Annulus series diverges at ({x!r}, {z!r})')
    return -ctx.n * np.log(arg), ctx.n * (ah + c2 * z) / arg


def annulus_kernel_sigma_form(ctx: ModelContext, x: complex, z: complex) -> complex:
    """A(x, z) written through the involution."""
    sp = sigma_prime(ctx, x)
    return ctx.n * (sp / (z - involution_sigma(ctx, x)) + sigma_second(ctx, x) / (2 * sp))


def ghat_coeffs(ctx: ModelContext, frame: EllipticFrame) -> GHat:
    n, g = ctx.n, ctx.g
    e1, e2 = frame.E1, frame.E2
    den = 4 - n * n
    return GHat(
        ghat0=-2 * ctx.u / (2 + n),
        ghat1=(g * (3 * e1 * e1 - 4 * e2) - 6 * e1) / (12 * den),
        ghat2=(2 - g * e1) / den,
        ghat3=2 * g / den,
    )


def rho_bounds(n: float) -> RhoBounds:
    b = b_of_n(n)
    sp, sm = math.sqrt(2 + n), math.sqrt(2 - n)
    rho_max = sm / (b * sp)
    rho_min = (math.sqrt(6 + n) - sm) / ((1 - b) * sp)
    s = math.sqrt(1 - b * b)
    radicand = (10 + n) * b * b - 4 + 2 * n
    # the positivity bound is not real for every n
    rho_min_prime = (2 * s * sm - math.sqrt(2 * radicand)) / (b * s * sm) if radicand >= 0 else math.nan
    return RhoBounds(rho_min=rho_min, rho_max=rho_max, rho_min_prime=rho_min_prime)


def limit_profile(b: float, eps: float, order: int = 3) -> np.ndarray:
    """
    Taylor coefficients at pi/2 of the critical profiles cos(b w) (eps = 0)
    and sin((1 - b) w) / sin(w) (eps = 1/2).
    """
    r = np.arange(order + 1)
    fact = np.array([math.factorial(i) for i in r], dtype=float)
    if eps == 0:
        return b**r * np.cos(b * math.pi / 2 + r * math.pi / 2) / fact
    if eps == 0.5:
        a = 1 - b
        num = Laurent.taylor(a**r * np.sin(a * math.pi / 2 + r * math.pi / 2) / fact)
        den = Laurent.taylor(np.cos(r * math.pi / 2) / fact)
        return (num / den).coeffs.real
    raise DomainError(f'eps must be 0 or 1/2, got {eps!r}')


def _check_rho(n: float, rho: float) -> RhoBounds:
    bounds = rho_bounds(n)
    if not bounds.rho_min - _RHO_TOL <= rho <= bounds.rho_max + _RHO_TOL:
        raise DomainError(f'rho must lie in [{bounds.rho_min!r}, {bounds.rho_max!r}], got {rho!r}')
    return bounds


def critical_line(n: float, rho: float) -> CriticalPoint:
    """
    (g/h, h^2) on the non-generic critical line of the model without bending energy.

    At q = 0 and u = 1 the two endpoint equations are linear in h^2 and g/h.
    """
    _check_rho(n, rho)
    b = b_of_n(n)
    matrix = np.empty((2, 2))
    rhs = np.empty(2)
    for i, eps in enumerate((0, 0.5)):
        t0, t1, t2, t3 = limit_profile(b, eps)
        matrix[i, 0] = -2 * (2 - n) * t0
        matrix[i, 1] = rho / 2 * (rho * rho + 6) / 12 * t1 - rho * rho / 2 * t2 + rho**3 * t3 / 4
        rhs[i] = rho / 2 * t1 - rho * rho / 2 * t2
    h2, g_over_h = np.linalg.solve(matrix, rhs)
    return CriticalPoint(g_over_h=float(g_over_h), h_squared=float(h2))


def gsurh(n: float, rho: float) -> float:
    b = b_of_n(n)
    sp, sm = math.sqrt(2 + n), math.sqrt(2 - n)
    num = 4 * (rho * b * sp - sm)
    den = rho * rho * (b * b - 1) * sm + 4 * rho * b * sp - 2 * sm
    return num / den


def critical_line_quoted(n: float, rho: float) -> CriticalPoint:
    """Literal closed forms for g/h and h^2, kept for comparison with critical_line."""
    _check_rho(n, rho)
    b = b_of_n(n)
    sp, sm = math.sqrt(2 + n), math.sqrt(2 - n)
    num = rho * rho * b * (1 - b * b) * sp - 4 * rho * sm + 6 * b * sp
    den = -rho * rho * (1 - b * b) * sm + 4 * rho * b * sp - 2 * sm
    h2 = rho * rho * b / (24 * math.sqrt(4 - n * n)) * num / den
    return CriticalPoint(g_over_h=gsurh(n, rho), h_squared=h2)


def fully_packed_point(n: float) -> CriticalPoint:
    return CriticalPoint(g_over_h=0.0, h_squared=1 / (8 * (2 + n)))


def critical_ghat(n: float, rho: float) -> GHat:
    """ghat at u = 1, q = 0 along the critical line (alpha = 1)."""
    point = critical_line(n, rho)
    h = math.sqrt(point.h_squared)
    r = point.g_over_h
    den = 4 - n * n
    return GHat(
        ghat0=-2 / (2 + n),
        ghat1=(-1 + r * (rho * rho + 6) / 12) / (h * den),
        ghat2=2 * (1 - r) / den,
        ghat3=2 * r * h / den,
    )


def delta_coefficient(n: float, rho: float) -> float:
    """Coefficient of q^(1 - b) in 1 - u along the critical line."""
    b = b_of_n(n)
    point = critical_line(n, rho)
    x = rho / (2 * math.sqrt(point.h_squared))
    ghat = critical_ghat(n, rho)
    shifted = limit_profile(b - 2, 0)
    total = sum(ghat[l].real * x**l * shifted[l] for l in range(4))
    return (n + 2) / 2 * total / limit_profile(b, 0)[0]


def delta_closed_form(n: float, rho: float) -> float:
    b = b_of_n(n)
    sp, sm = math.sqrt(2 + n), math.sqrt(2 - n)
    num = rho * rho * (1 - b) ** 2 * sp + 2 * rho * (1 - b) * sm - 2 * sp
    den = -rho * rho * b * (1 - b * b) * sp + 4 * rho * (1 - b * b) * sm - 6 * b * sp
    return 12 / b * num / den


def q_star_quoted(n: float, rho: float) -> float:
    """Literal dense-phase constant; differs from delta_closed_form by the factor -(n + 2)/2."""
    b = b_of_n(n)
    sp, sm = math.sqrt(2 + n), math.sqrt(2 - n)
    num = rho * rho * (1 - b) ** 2 * sp + 2 * rho * (1 - b) * sm - 2 * sp
    den = rho * rho * b * (1 - b * b) * sp - 4 * rho * (1 - b * b) * sm + 6 * b * sp
    return 6 * (n + 2) / b * num / den


def q_star_dilute(n: float) -> float:
    b = b_of_n(n)
    return 24 / (b * (1 - b) * (2 - b))


def locate_on_critical_line(n: float, alpha: float, g: float, h: float) -> float | None:
    if alpha != 1:
        return None
    bounds = rho_bounds(n)
    target = g / h

    def residual(rho: float) -> float:
        return critical_line(n, rho).g_over_h - target

    lo, hi = residual(bounds.rho_min), residual(bounds.rho_max)
    if abs(lo) <= _LINE_TOL:
        rho = bounds.rho_min
    elif abs(hi) <= _LINE_TOL:
        rho = bounds.rho_max
    elif lo * hi < 0:
        rho = brentq(residual, bounds.rho_min, bounds.rho_max, xtol=_RHO_TOL)
    else:
        return None
    if abs(critical_line(n, rho).h_squared - h * h) > _LINE_TOL:
        return None
    return rho


def classify_phase(n: float, alpha: float, g: float, h: float) -> Phase:
    rho = locate_on_critical_line(n, alpha, g, h)
    if rho is None:
        return 'off-critical'
    r_min = critical_line(n, rho_bounds(n).rho_min).g_over_h
    if abs(g / h - r_min) <= _LINE_TOL:
        return 'dilute'
    return 'dense'


def q_of_u(ctx: ModelContext) -> tuple[float, float]:
    """(c, q_star) with q ~ ((1 - u) / q_star)^c as u -> 1."""
    if ctx.phase == 'off-critical':
        raise DomainError(f'(g, h) = ({ctx.g!r}, {ctx.h!r}) is not on the critical line')
    if ctx.phase == 'dilute':
        return 1.0, q_star_dilute(ctx.n)
    return 1 / (1 - ctx.b), delta_closed_form(ctx.n, ctx.rho)


class PhaseConstants(NamedTuple):
    b: float
    d_flag: int
    # string exponent: q ~ (1 - u)^c
    c: float


def phase_constants(n: float, phase: Phase) -> PhaseConstants:
    b = b_of_n(n)
    if phase == 'dense':
        return PhaseConstants(b, 1, 1 / (1 - b))
    if phase == 'dilute':
        return PhaseConstants(b, -1, 1.0)
    raise DomainError(f'Critical exponents need a dense or dilute phase, got {phase!r}')
