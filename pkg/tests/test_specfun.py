import cmath
import math

import numpy as np
import pytest
from scipy.special import ellipk, ellipkm1

from loopmaps.errors import DerivativeOrderError, DomainError, PoleProximityError
from loopmaps.specfun import (
    QModulus,
    b_of_n,
    elliptic_K,
    elliptic_K_prime,
    n_of_b,
    theta1,
    theta1_modular,
    upsilon,
    upsilon_const,
    upsilon_const_limit,
    upsilon_const_series,
    upsilon_cot_sum,
    upsilon_laurent,
    upsilon_limit,
    upsilon_limit_prefactor,
)
from loopmaps.utils import central_difference, richardson


class TestTheta:
    def test_antiperiodic(self):
        mod = QModulus(1.0)
        v = 0.3 + 0.1j
        assert abs(theta1(v + 1, mod) + theta1(v, mod)) < 1e-12

    def test_odd(self):
        mod = QModulus(0.8)
        v = 0.17 - 0.05j
        assert abs(theta1(-v, mod) + theta1(v, mod)) < 1e-12

    @pytest.mark.parametrize('T', [0.7, 1.3])
    def test_modular_identity(self, T):
        mod = QModulus(T)
        assert abs(theta1_modular(0.2, mod) - theta1(0.2, mod)) < 1e-10

    def test_derivative(self):
        mod = QModulus(1.1)
        v = 0.21 + 0.07j
        numeric = central_difference(lambda x: theta1(x, mod), v, 1e-5)
        assert abs(theta1(v, mod, 1) - numeric) < 1e-8 * abs(numeric)

    def test_derivative_order_cap(self):
        with pytest.raises(DerivativeOrderError):
            theta1(0.1, QModulus(1.0), 40)

    def test_modulus_domain(self):
        with pytest.raises(DomainError):
            QModulus(0.0)
        assert QModulus(4.0).dual.T == 0.25


class TestUpsilon:
    def test_residue(self):
        """Contour integral over a circle of radius 0.05 around the pole."""
        mod = QModulus(1.0)
        b = 1 / 3
        angles = 2 * math.pi * np.arange(64) / 64
        points = 0.05 * np.exp(1j * angles)
        residue = np.mean([upsilon(b, complex(w), mod) * w for w in points])
        assert abs(residue - 1) < 1e-10

    def test_laurent_residue(self):
        series = upsilon_laurent(0.3, 0, QModulus(0.6), 2)
        assert abs(series.residue() - 1) < 1e-10

    @pytest.mark.parametrize('T', [0.8, 1.5])
    def test_pseudo_periodicity(self, T):
        mod = QModulus(T)
        b, v = 0.3, 0.23
        value = upsilon(b, v, mod)
        assert abs(upsilon(b, v + mod.tau, mod) - cmath.exp(1j * math.pi * b) * value) < 1e-10 * abs(value)
        assert abs(upsilon(b, v + 1, mod) - value) < 1e-10 * abs(value)

    def test_zero(self):
        mod = QModulus(1.2)
        assert abs(upsilon(0.4, 0.2, mod)) < 1e-12

    def test_cot_sum(self):
        mod = QModulus(1.2)
        value = upsilon(0.25, 0.31, mod)
        assert abs(upsilon_cot_sum(0.25, 0.31, mod) - value) < 1e-8 * abs(value)

    def test_modular_branch_agrees(self):
        """Both theta representations meet at the switching modulus."""
        below, above = QModulus(1 - 1e-12), QModulus(1 + 1e-12)
        v = 0.27 + 0.2j
        assert abs(upsilon(1 / 3, v, below) - upsilon(1 / 3, v, above)) < 1e-9

    def test_pole(self):
        mod = QModulus(1.0)
        with pytest.raises(PoleProximityError):
            upsilon(0.3, 0, mod)
        with pytest.raises(PoleProximityError):
            upsilon(0.3, mod.tau + 1, mod)


class TestUpsilonConstant:
    @pytest.mark.parametrize(('b', 'T'), [(0.4, 1.0), (1 / 3, 0.5), (0.25, 2.0)])
    def test_series(self, b, T):
        mod = QModulus(T)
        assert upsilon_const(b, mod) == pytest.approx(upsilon_const_series(b, mod), rel=1e-10)

    def test_extrapolated_derivative(self):
        mod = QModulus(1.0)
        b = 0.4
        value = richardson(lambda w: upsilon(b, w, mod, 1) + 1 / w**2, 0.1)
        assert abs(value - upsilon_const(b, mod)) < 1e-7

    @pytest.mark.parametrize('b', [0.25, 1 / 3, 0.45])
    def test_small_q_limit(self, b):
        T = 0.02
        assert upsilon_const(b, QModulus(T)) * (T / math.pi) ** 2 == pytest.approx(upsilon_const_limit(b), abs=1e-6)


class TestUpsilonLimit:
    def test_values(self):
        assert upsilon_limit(1 / 3, 0.5, 0) == pytest.approx(-1)
        assert upsilon_limit(0.5, 0, 0.5) == pytest.approx(cmath.exp(-1j * math.pi / 4) / 2j)

    @pytest.mark.parametrize(('eps', 'w'), [(0.5, 0.3), (0, 0.4)])
    def test_rescaled_convergence(self, eps, w):
        mod = QModulus(0.1)
        b = 1 / 3
        exact = upsilon(b, eps + mod.tau * w, mod)
        approx = upsilon_limit_prefactor(b, eps, mod) * upsilon_limit(b, eps, w)
        assert abs(exact / approx - 1) < 1e-3

    def test_pole(self):
        with pytest.raises(PoleProximityError):
            upsilon_limit(0.3, 0, 1.0)

    def test_colour(self):
        with pytest.raises(DomainError):
            upsilon_limit(0.3, 0.25, 0.1)


class TestEllipticK:
    def test_value(self):
        assert elliptic_K(1 / math.sqrt(2)) == pytest.approx(1.854074677, abs=1e-9)

    @pytest.mark.parametrize('k', [0.0, 0.1, 0.5, 0.9, 0.999])
    def test_against_scipy(self, k):
        assert elliptic_K(k) == pytest.approx(ellipk(k * k), rel=1e-13)
        assert elliptic_K_prime(k) == pytest.approx(ellipk(1 - k * k), rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            elliptic_K(1.0)
        with pytest.raises(DomainError, match='got 1.0'):
            elliptic_K_prime(1.0)
        with pytest.raises(DomainError, match='got -0.5'):
            elliptic_K_prime(-0.5)

    def test_prime_degenerate_modulus(self):
        assert elliptic_K_prime(0.0) == math.inf
        assert elliptic_K_prime(1e-9) == pytest.approx(math.log(4e9), rel=1e-12)
        assert elliptic_K_prime(1e-4) == pytest.approx(ellipkm1(1e-8), rel=1e-12)


class TestB:
    def test_values(self):
        assert b_of_n(1) == pytest.approx(1 / 3)
        assert b_of_n(math.sqrt(2)) == pytest.approx(1 / 4)
        assert b_of_n(1, s=0) == pytest.approx(1 / 2)

    @pytest.mark.parametrize('n', [0.3, 1.0, 1.7])
    def test_inverse(self, n):
        assert n_of_b(b_of_n(n)) == pytest.approx(n)

    def test_domain(self):
        with pytest.raises(DomainError):
            b_of_n(2.0)
