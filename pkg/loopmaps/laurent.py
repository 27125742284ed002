from dataclasses import dataclass
from math import factorial

import numpy as np

from loopmaps.errors import LaurentDepthError


@dataclass(frozen=True, slots=True)
class Laurent:
    """
    Truncated Laurent series sum_i coeffs[i] w^(val + i) + O(w^(val + len(coeffs))).

    Coefficients are complex numpy arrays. Every operation keeps track of the
    absolute truncation order, so a coefficient is either known or unavailable.
    """

    val: int
    coeffs: np.ndarray

    @classmethod
    def taylor(cls, coeffs) -> 'Laurent':
        return cls(0, np.asarray(coeffs, dtype=complex))

    @classmethod
    def constant(cls, value: complex, prec: int) -> 'Laurent':
        coeffs = np.zeros(max(prec, 1), dtype=complex)
        coeffs[0] = value
        return cls(0, coeffs)

    @classmethod
    def monomial(cls, power: int, prec: int, value: complex = 1) -> 'Laurent':
        """value * w^power, known up to O(w^prec)."""
        coeffs = np.zeros(max(prec - power, 1), dtype=complex)
        coeffs[0] = value
        return cls(power, coeffs)

    @classmethod
    def exponential(cls, rate: complex, prec: int, scale: complex = 1) -> 'Laurent':
        """scale * exp(rate w)."""
        k = np.arange(prec)
        return cls(0, scale * np.array([rate**i / factorial(i) for i in k], dtype=complex))

    @property
    def prec(self) -> int:
        """Exponent of the first unknown coefficient."""
        return self.val + len(self.coeffs)

    def __len__(self) -> int:
        return len(self.coeffs)

    def coefficient(self, power: int) -> complex:
        if power < self.val:
            return 0j
        if power >= self.prec:
            raise LaurentDepthError(f'Coefficient of w^{power} requested, series known up to O(w^{self.prec})')
        return complex(self.coeffs[power - self.val])

    def residue(self) -> complex:
        return self.coefficient(-1)

    def truncate(self, prec: int) -> 'Laurent':
        if prec >= self.prec:
            return self
        return Laurent(self.val, self.coeffs[: max(prec - self.val, 1)])

    def shift(self, power: int) -> 'Laurent':
        """Multiply by w^power."""
        return Laurent(self.val + power, self.coeffs)

    def drop_leading(self, count: int = 1) -> 'Laurent':
        """Declare the first count coefficients to vanish identically."""
        if count >= len(self.coeffs):
            raise LaurentDepthError(f'Cannot strip {count} coefficients from a series of length {len(self.coeffs)}')
        return Laurent(self.val + count, self.coeffs[count:])

    def scale(self, factor: complex) -> 'Laurent':
        return Laurent(self.val, self.coeffs * factor)

    def rescale_variable(self, factor: complex) -> 'Laurent':
        """Series of f(factor w) from the series of f(w)."""
        powers = factor ** np.arange(self.val, self.prec, dtype=float)
        return Laurent(self.val, self.coeffs * powers)

    def even_part(self) -> 'Laurent':
        powers = np.arange(self.val, self.prec)
        return Laurent(self.val, np.where(powers % 2 == 0, self.coeffs, 0))

    def derivative(self) -> 'Laurent':
        powers = np.arange(self.val, self.prec)
        coeffs = self.coeffs * powers
        if self.val == 0:
            return Laurent(0, coeffs[1:] if len(coeffs) > 1 else np.zeros(1, dtype=complex))
        return Laurent(self.val - 1, coeffs)

    def __neg__(self) -> 'Laurent':
        return Laurent(self.val, -self.coeffs)

    def __add__(self, other) -> 'Laurent':
        if not isinstance(other, Laurent):
            other = Laurent.constant(other, max(self.prec, 1))
        val = min(self.val, other.val)
        prec = min(self.prec, other.prec)
        if prec <= val:
            raise LaurentDepthError('Sum of series has no known coefficients')
        coeffs = np.zeros(prec - val, dtype=complex)
        for series in (self, other):
            part = series.coeffs[: prec - series.val]
            coeffs[series.val - val : series.val - val + len(part)] += part
        return Laurent(val, coeffs)

    __radd__ = __add__

    def __sub__(self, other) -> 'Laurent':
        return self + (-other)

    def __rsub__(self, other) -> 'Laurent':
        return (-self) + other

    def __mul__(self, other) -> 'Laurent':
        if not isinstance(other, Laurent):
            return self.scale(other)
        length = min(len(self.coeffs), len(other.coeffs))
        coeffs = np.convolve(self.coeffs[:length], other.coeffs[:length])[:length]
        return Laurent(self.val + other.val, coeffs)

    __rmul__ = __mul__

    def inverse(self) -> 'Laurent':
        a = self.coeffs
        if a[0] == 0:
            raise LaurentDepthError('Leading coefficient vanishes; strip it with drop_leading first')
        result = np.zeros(len(a), dtype=complex)
        result[0] = 1 / a[0]
        for i in range(1, len(a)):
            result[i] = -np.dot(a[1 : i + 1], result[i - 1 :: -1]) / a[0]
        return Laurent(-self.val, result)

    def __truediv__(self, other) -> 'Laurent':
        if not isinstance(other, Laurent):
            return self.scale(1 / other)
        return self * other.inverse()

    def __rtruediv__(self, other) -> 'Laurent':
        return self.inverse().scale(other)

    def __pow__(self, power: int) -> 'Laurent':
        if power < 0:
            return self.inverse() ** (-power)
        result = Laurent.constant(1, len(self.coeffs))
        for _ in range(power):
            result = result * self
        return result
