"""
Jacobi theta functions, the fundamental pseudo-periodic solution Upsilon_b and complete elliptic integrals.

The half-period ratio is always purely imaginary, tau = iT. Theta functions use the convention
theta_1(v + 1) = -theta_1(v), so their q-series run over sin((2m + 1) pi v) with nome exp(i pi tau).
"""

import cmath
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from sentry_sdk import trace

from loopmaps.config import MAX_DERIV_ORDER, POLE_RADIUS, THETA_MAX_TERMS, THETA_TOL
from loopmaps.errors import ConvergenceError, DerivativeOrderError, DomainError, PoleProximityError
from loopmaps.laurent import Laurent

ThetaKind = Literal[1, 2, 3, 4]

_LOG_TOL = math.log(THETA_TOL) - 4
_MODULAR_THRESHOLD = 1.0


@dataclass(frozen=True, slots=True)
class QModulus:
    T: float

    def __post_init__(self):
        if not self.T > 0:
            raise DomainError(f'Half-period T must be positive, got {self.T!r}')
        if math.pi * self.T < 1e-12:
            raise ConvergenceError('theta series', residual=1.0, iterations=0)

    @property
    def tau(self) -> complex:
        return 1j * self.T

    @property
    def q_theta(self) -> float:
        return math.exp(-math.pi * self.T)

    @property
    def q_crit(self) -> float:
        return math.exp(-math.pi / self.T)

    @property
    def dual(self) -> 'QModulus':
        """Modulus of -1/tau."""
        return QModulus(1 / self.T)


def b_of_n(n: float, s: float = 1.0) -> float:
    """b(s) = arccos(ns/2)/pi."""
    ns = n * s
    if not -2 < ns < 2:
        raise DomainError(f'ns must lie in (-2, 2), got {ns!r}')
    return math.acos(ns / 2) / math.pi


def n_of_b(b: float) -> float:
    return 2 * math.cos(math.pi * b)


def _series_indices(kind: ThetaKind, z: complex, T: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Summation index m and frequencies a_m = pi * (2m + 1) (kinds 1, 2) or 2 pi m (kinds 3, 4)."""
    m = np.arange(THETA_MAX_TERMS, dtype=float)
    if kind in (1, 2):
        a = math.pi * (2 * m + 1)
        log_q = -math.pi * T * (m + 0.5) ** 2
    else:
        m = m[1:]
        a = 2 * math.pi * m
        log_q = -math.pi * T * m**2
    log_mag = log_q + a * abs(z.imag) + order * np.log(a)
    keep = log_mag >= log_mag.max() + _LOG_TOL
    last = int(np.flatnonzero(keep)[-1])
    if last == len(m) - 1:
        raise ConvergenceError('theta series', residual=float(np.exp(log_mag[-1] - log_mag.max())), iterations=len(m))
    return m[: last + 1], a[: last + 1]


def theta_taylor(kind: ThetaKind, z0: complex, T: float, order: int) -> np.ndarray:
    """Taylor coefficients theta^(r)(z0|iT) / r! for r = 0..order, by termwise differentiation."""
    z0 = complex(z0)
    m, a = _series_indices(kind, z0, T, order)
    result = np.empty(order + 1, dtype=complex)
    if kind in (1, 2):
        weight = 2 * np.exp(-math.pi * T * (m + 0.5) ** 2)
        if kind == 1:
            weight = weight * (-1) ** m
    else:
        weight = 2 * np.exp(-math.pi * T * m**2)
        if kind == 4:
            weight = weight * (-1) ** m
    phase = 0.0 if kind == 1 else math.pi / 2
    for r in range(order + 1):
        # d^r/dz^r sin(a z + phase) = a^r sin(a z + phase + r pi / 2)
        terms = weight * a**r * np.sin(a * z0 + phase + r * math.pi / 2)
        result[r] = terms.sum() / math.factorial(r)
    if kind in (3, 4):
        result[0] += 1
    return result


def theta(kind: ThetaKind, v: complex, mod: QModulus, deriv_order: int = 0) -> complex:
    if deriv_order > MAX_DERIV_ORDER:
        raise DerivativeOrderError(deriv_order, MAX_DERIV_ORDER)
    return complex(theta_taylor(kind, v, mod.T, deriv_order)[deriv_order] * math.factorial(deriv_order))


def theta1(v: complex, mod: QModulus, deriv_order: int = 0) -> complex:
    """d^r/dv^r theta_1(v|tau)."""
    return theta(1, v, mod, deriv_order)


def theta1_modular(v: complex, mod: QModulus) -> complex:
    """theta_1(v|tau) evaluated through the nome of -1/tau."""
    tau = mod.tau
    return 1j * cmath.exp(-1j * math.pi * v * v / tau) * theta1(v / tau, mod.dual) / cmath.sqrt(-1j * tau)


def _reduce(v: complex, mod: QModulus) -> tuple[complex, int]:
    """Write v = v_r + m + n tau with v_r in the fundamental cell centred at 0."""
    n = math.floor(v.imag / mod.T + 0.5)
    v = v - n * mod.tau
    v = v - math.floor(v.real + 0.5)
    return v, n


def _theta_ratio_taylor(b: float, v0: complex, mod: QModulus, prec: int, *, at_pole: bool) -> Laurent:
    """Series of Upsilon_b(v0 + w) without the quasi-periodic multiplier; v0 already reduced."""
    if mod.T < _MODULAR_THRESHOLD:
        tau = mod.tau
        dual = mod.dual.T
        num = theta_taylor(1, (v0 - b / 2) / tau, dual, prec)
        den = theta_taylor(1, v0 / tau, dual, prec)
        num_series = Laurent.taylor(num).rescale_variable(1 / tau)
        den_series = Laurent.taylor(den).rescale_variable(1 / tau)
        const = theta_taylor(1, 0, dual, 1)[1] / theta_taylor(1, -b / (2 * tau), dual, 0)[0] / tau
        rate = math.pi * b / mod.T
        factor = Laurent.exponential(rate, prec + 1, scale=const * cmath.exp(rate * v0))
    else:
        num_series = Laurent.taylor(theta_taylor(1, v0 - b / 2, mod.T, prec))
        den_series = Laurent.taylor(theta_taylor(1, v0, mod.T, prec))
        const = theta_taylor(1, 0, mod.T, 1)[1] / theta_taylor(1, -b / 2, mod.T, 0)[0]
        factor = Laurent.constant(const, prec + 1)
    if at_pole:
        den_series = den_series.drop_leading(1)
    return factor * num_series / den_series


def upsilon_laurent(b: float, v0: complex, mod: QModulus, order: int) -> Laurent:
    """
    Laurent series of Upsilon_b(v0 + w) up to and including w^order.

    When v0 sits on the pole lattice the expansion starts at 1/w.
    """
    v_r, n = _reduce(complex(v0), mod)
    at_pole = abs(v_r) <= POLE_RADIUS
    if at_pole:
        v_r = 0j
    prec = order + 2 if at_pole else order + 1
    series = _theta_ratio_taylor(b, v_r, mod, prec, at_pole=at_pole)
    return series.scale(cmath.exp(1j * math.pi * b * n)).truncate(order + 1)


def upsilon_taylor(b: float, v0: complex, mod: QModulus, order: int) -> np.ndarray:
    v_r, n = _reduce(complex(v0), mod)
    if abs(v_r) <= POLE_RADIUS:
        raise PoleProximityError(complex(v0), complex(v0) - v_r)
    series = _theta_ratio_taylor(b, v_r, mod, order + 1, at_pole=False)
    return series.coeffs[: order + 1] * cmath.exp(1j * math.pi * b * n)


def upsilon(b: float, v: complex, mod: QModulus, deriv_order: int = 0) -> complex:
    """d^r/dv^r Upsilon_b(v)."""
    if deriv_order > MAX_DERIV_ORDER:
        raise DerivativeOrderError(deriv_order, MAX_DERIV_ORDER)
    coeffs = upsilon_taylor(b, v, mod, deriv_order)
    return complex(coeffs[deriv_order] * math.factorial(deriv_order))


def upsilon_cot_sum(b: float, v: complex, mod: QModulus, terms: int = 40) -> complex:
    """Upsilon_b as a convergent sum of shifted cotangents."""
    tau = mod.tau
    total = 1 / cmath.tan(math.pi * v) - 1 / math.tan(math.pi * b / 2)
    for m in range(1, terms + 1):
        total += cmath.exp(-1j * math.pi * b * m) * (1 / cmath.tan(math.pi * (v + m * tau)) + 1j)
        total += cmath.exp(1j * math.pi * b * m) * (1 / cmath.tan(math.pi * (v - m * tau)) - 1j)
    return math.pi * total


@trace
def upsilon_const(b: float, mod: QModulus) -> float:
    """The constant in Upsilon_b'(w) = -1/w^2 + upsilon_b + O(w)."""
    return upsilon_laurent(b, 0, mod, 1).coefficient(1).real


def upsilon_const_series(b: float, mod: QModulus) -> float:
    total = -(math.pi**2) / 3
    m = 1
    while True:
        term = 2 * math.pi**2 * math.cos(math.pi * b * m) / math.sinh(math.pi * m * mod.T) ** 2
        total += term
        if abs(term) < THETA_TOL * abs(total) or m >= THETA_MAX_TERMS:
            return total
        m += 1


def upsilon_const_limit(b: float) -> float:
    """Limit of upsilon_b (T/pi)^2 as T -> 0."""
    return 1 / 3 - b + b * b / 2


def upsilon_limit(b: float, eps: float, w: complex) -> complex:
    """Limit functions of the rescaled Upsilon_b(eps + tau w) as T -> 0."""
    if eps == 0:
        if abs(w - round(w.real)) <= POLE_RADIUS:
            raise PoleProximityError(complex(w), complex(round(w.real)))
        return cmath.exp(1j * math.pi * (b - 1) * w) / (2j * cmath.sin(math.pi * w))
    if eps == 0.5:
        return -cmath.exp(1j * math.pi * b * w)
    raise DomainError(f'eps must be 0 or 1/2, got {eps!r}')


def upsilon_limit_prefactor(b: float, eps: float, mod: QModulus) -> float:
    """Upsilon_b(eps + tau w) ~ prefactor * upsilon_limit(b, eps, w)."""
    q = mod.q_crit
    return 2 * math.pi * q ** (eps * b) / (mod.T * (1 - q**b))


def _agm(a: float, g: float) -> float:
    for _ in range(64):
        if abs(a - g) <= 4e-16 * a:
            break
        a, g = (a + g) / 2, math.sqrt(a * g)
    return a


def elliptic_K(k: float) -> float:
    """Complete elliptic integral of the first kind by arithmetic-geometric mean."""
    if not 0 <= k < 1:
        raise DomainError(f'Elliptic modulus must lie in [0, 1), got {k!r}')
    return math.pi / (2 * _agm(1.0, math.sqrt(1 - k * k)))


def elliptic_K_prime(k: float) -> float:
    """K(sqrt(1 - k^2)), computed from AGM(1, k) so that small k keeps its precision."""
    if not 0 <= k < 1:
        raise DomainError(f'Elliptic modulus must lie in [0, 1), got {k!r}')
    if k == 0:
        return math.inf
    return math.pi / (2 * _agm(1.0, k))
