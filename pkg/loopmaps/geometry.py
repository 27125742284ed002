"""
Elliptic parametrization of the spectral curve with four real branch points.

x(v) is even, 1-periodic and 2 tau-periodic, maps 0, 1/2, tau, tau + 1/2 to
sgp, sgm, gp, gm and has a simple pole at v_inf = 1/2 + tau w_inf.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect
from sentry_sdk import trace

from loopmaps.config import BISECT_TOL, DEGENERATE_GAP, MAX_DERIV_ORDER, POLE_RADIUS
from loopmaps.errors import DegenerateFrameError, DerivativeOrderError, DomainError, OrderingError, PoleProximityError
from loopmaps.laurent import Laurent
from loopmaps.specfun import QModulus, elliptic_K, theta_taylor


@dataclass(frozen=True, slots=True)
class Branchpoints:
    gm: float
    gp: float
    sgp: float
    sgm: float

    def __post_init__(self):
        values = (self.gm, self.gp, self.sgp, self.sgm)
        if not all(map(math.isfinite, values)) or not self.gm < self.gp < self.sgp < self.sgm:
            raise OrderingError(values)
        gaps = np.diff(values)
        if gaps.min() <= DEGENERATE_GAP * max(1.0, max(map(abs, values))):
            raise DegenerateFrameError(values)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return self.gm, self.gp, self.sgp, self.sgm


def symmetric_polynomials(bp: Branchpoints) -> tuple[float, float, float]:
    """E1, E2, E3: elementary symmetric polynomials of the four branch points."""
    a = bp.as_tuple()
    e1 = sum(a)
    e2 = sum(a[i] * a[j] for i in range(4) for j in range(i + 1, 4))
    e3 = sum(a[i] * a[j] * a[k] for i in range(4) for j in range(i + 1, 4) for k in range(j + 1, 4))
    return e1, e2, e3


def moduli(bp: Branchpoints) -> tuple[float, float]:
    """(k, k') from the cross-ratios of the branch points."""
    gm, gp, sgp, sgm = bp.as_tuple()
    den = (sgm - gp) * (sgp - gm)
    k2 = (sgm - gm) * (sgp - gp) / den
    kp2 = (sgm - sgp) * (gp - gm) / den
    return math.sqrt(k2), math.sqrt(kp2)


@dataclass(frozen=True, slots=True)
class EllipticFrame:
    bp: Branchpoints
    k: float
    kp: float
    T: float
    C: float
    w_inf: float
    E1: float
    E2: float
    E3: float
    sn2_const: float

    @property
    def mod(self) -> QModulus:
        return QModulus(self.T)

    @property
    def tau(self) -> complex:
        return 1j * self.T

    @property
    def v_inf(self) -> complex:
        return 0.5 + self.tau * self.w_inf

    @property
    def q(self) -> float:
        """Critical nome exp(-pi/T)."""
        return math.exp(-math.pi / self.T)

    @property
    def d(self) -> float:
        return (self.bp.sgm - self.bp.gp) / (self.bp.sgp - self.bp.sgm)


def _sn2_constant(T: float) -> float:
    # (theta_3(0) / theta_2(0))^2 at nome exp(-2 pi T), or -(theta_3(0) / theta_4(0))^2 at the dual nome
    if 2 * T >= 1:
        return (theta_taylor(3, 0, 2 * T, 0)[0] / theta_taylor(2, 0, 2 * T, 0)[0]).real ** 2
    dual = 1 / (2 * T)
    return -((theta_taylor(3, 0, dual, 0)[0] / theta_taylor(4, 0, dual, 0)[0]).real ** 2)


def _sn2_parts(frame: EllipticFrame, v0: complex, prec: int) -> tuple[Laurent, Laurent]:
    """Numerator and denominator series with S(v0 + w) = sn2_const * (num / den)^2."""
    order = prec - 1
    if 2 * frame.T >= 1:
        num = Laurent.taylor(theta_taylor(1, v0, 2 * frame.T, order))
        den = Laurent.taylor(theta_taylor(4, v0, 2 * frame.T, order))
    else:
        tau_s = 2 * frame.tau
        dual = 1 / (2 * frame.T)
        num = Laurent.taylor(theta_taylor(1, v0 / tau_s, dual, order)).rescale_variable(1 / tau_s)
        den = Laurent.taylor(theta_taylor(2, v0 / tau_s, dual, order)).rescale_variable(1 / tau_s)
    return num, den


def _sn2_series(frame: EllipticFrame, v0: complex, prec: int) -> Laurent:
    """Taylor series of S(v0 + w) = sn^2(2K(k')(v0 + w); k') with prec coefficients."""
    num, den = _sn2_parts(frame, v0, prec)
    ratio = num / den
    return (ratio * ratio).scale(frame.sn2_const)


def _reduce(frame: EllipticFrame, v: complex) -> complex:
    """Bring v into the cell |Re v| <= 1/2, |Im v| <= T using the periods 1 and 2 tau."""
    n = math.floor(v.imag / (2 * frame.T) + 0.5)
    v = v - 2 * n * frame.tau
    return v - math.floor(v.real + 0.5)


def sn2(frame: EllipticFrame, v: complex) -> complex:
    return complex(_sn2_series(frame, _reduce(frame, complex(v)), 1).coeffs[0])


def _check_pole(frame: EllipticFrame, v: complex) -> None:
    v_r = _reduce(frame, complex(v))
    for pole in (frame.v_inf, -frame.v_inf, 1 - frame.v_inf, frame.v_inf - 1, -frame.v_inf + 2 * frame.tau):
        if abs(v_r - pole) <= POLE_RADIUS:
            raise PoleProximityError(complex(v), complex(v) - v_r + pole)


def x_series(frame: EllipticFrame, v0: complex, order: int) -> Laurent:
    """Taylor series of x(v0 + w) up to w^order."""
    _check_pole(frame, v0)
    bp = frame.bp
    num, den = _sn2_parts(frame, _reduce(frame, complex(v0)), order + 1)
    if abs(frame.sn2_const) * abs(num.coeffs[0]) ** 2 <= abs(den.coeffs[0]) ** 2:
        ratio = num / den
        s = (ratio * ratio).scale(frame.sn2_const)
        return (s + frame.d).inverse().scale(frame.d * (bp.sgp - bp.gp)) + bp.gp
    # near the poles of S work with 1/S
    ratio = den / num
    inv_s = (ratio * ratio).scale(1 / frame.sn2_const)
    return (inv_s.scale(frame.d) + 1).inverse().scale(bp.gp - bp.sgp) + bp.sgp


def x_taylor(frame: EllipticFrame, v0: complex, order: int) -> np.ndarray:
    return x_series(frame, v0, order).coeffs[: order + 1]


def x_of_v(frame: EllipticFrame, v: complex, deriv_order: int = 0) -> complex:
    """d^r/dv^r x(v)."""
    if deriv_order > MAX_DERIV_ORDER:
        raise DerivativeOrderError(deriv_order, MAX_DERIV_ORDER)
    return complex(x_taylor(frame, v, deriv_order)[deriv_order] * math.factorial(deriv_order))


def x_laurent_at_infinity(frame: EllipticFrame, order: int) -> Laurent:
    """Numerical Laurent series of x(v_inf + w), from 1/w up to w^order."""
    bp = frame.bp
    s = _sn2_series(frame, _reduce(frame, frame.v_inf), order + 3)
    return (s + frame.d).drop_leading(1).inverse().scale(frame.d * (bp.sgp - bp.gp)) + bp.gp


def x_infinity_expansion(frame: EllipticFrame, order: int = 3) -> list[complex]:
    """Laurent coefficients of x at v_inf: [w^-1, w^0, w^1, w^2][: order + 1]."""
    if not 0 <= order <= 3:
        raise DomainError(f'Laurent order must lie in [0, 3], got {order!r}')
    c, e1, e2, e3 = frame.C, frame.E1, frame.E2, frame.E3
    coeffs = [
        -1j * c,
        e1 / 4,
        (1j / c) * (3 * e1 * e1 - 8 * e2) / 48,
        (-(e1**3) + 4 * e1 * e2 - 8 * e3) / (64 * c * c),
    ]
    return coeffs[: order + 1]


@trace
def build_parametrization(bp: Branchpoints) -> EllipticFrame:
    gm, gp, sgp, sgm = bp.as_tuple()
    k, kp = moduli(bp)
    K = elliptic_K(k)
    Kp = elliptic_K(kp)
    T = K / (2 * Kp)
    C = math.sqrt((sgp - gm) * (sgm - gp)) / (4 * Kp)
    e1, e2, e3 = symmetric_polynomials(bp)
    const = _sn2_constant(T)
    frame = EllipticFrame(bp=bp, k=k, kp=kp, T=T, C=C, w_inf=0.5, E1=e1, E2=e2, E3=e3, sn2_const=const)

    # 1/x vanishes where S + d does; S grows from 1 to 1/k'^2 along v = 1/2 + tau w
    def numerator(w: float) -> float:
        return sn2(frame, 0.5 + frame.tau * w).real + frame.d

    w_inf = bisect(numerator, 0.0, 1.0, xtol=BISECT_TOL)
    return EllipticFrame(bp=bp, k=k, kp=kp, T=T, C=C, w_inf=w_inf, E1=e1, E2=e2, E3=e3, sn2_const=const)


@dataclass(frozen=True, slots=True)
class CriticalEndpoints:
    """Limit of the branch points as q -> 0, where gp and sgp merge."""

    gm: float
    gp: float
    sgm: float
    w_inf: float

    @property
    def scale(self) -> float:
        return math.sqrt((self.sgm - self.gp) * (self.gp - self.gm)) * math.sin(math.pi * self.w_inf)


def critical_w_inf(alpha: float, h: float, gm_star: float) -> float:
    """w_inf in the critical limit, from cos(pi w_inf)."""
    cos = (1 - alpha) / (1 + alpha) * (1 - h * (1 + alpha) * gm_star) / (1 + h * (1 - alpha) * gm_star)
    return math.acos(cos) / math.pi


def x_critical_limit(eps: float, w: complex, star: CriticalEndpoints) -> complex:
    """Limit of q^(eps - 1/2) (x(eps + tau w) - gp) as q -> 0."""
    if eps == 0:
        return 8 * star.scale * cmath.cos(math.pi * w / 2) ** 2
    if eps == 0.5:
        den = cmath.cos(math.pi * w) - math.cos(math.pi * star.w_inf)
        if abs(den) <= POLE_RADIUS:
            raise PoleProximityError(complex(w), complex(star.w_inf))
        return star.scale / den
    raise DomainError(f'eps must be 0 or 1/2, got {eps!r}')
