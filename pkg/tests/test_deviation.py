import math

import numpy as np
import pytest
from scipy.optimize import brentq

from loopmaps.deviation import (
    J,
    J_prime,
    J_second,
    J_sup_form,
    P_from_p,
    action,
    arm_jmath,
    arm_probability_exponents,
    gaussian_variance,
    p_from_P,
    p_opt,
    saddle_action,
    saddle_s,
)
from loopmaps.errors import DomainError
from loopmaps.nesting import BoundarySpec, NestingGraph, NestingVertex
from loopmaps.utils import central_difference

_GRID = (0.1, 0.3, 1 / math.sqrt(3), 1.0, 2.0, 5.0)

CYLINDER_ARM = NestingGraph((NestingVertex(0, {1}), NestingVertex(0, {2})), ((0, 1),))
HANDLE_ARM = NestingGraph((NestingVertex(0, {1}), NestingVertex(1)), ((0, 1),))
# a leaf hanging from an unmarked vertex closed by a loop
LOOPED_ARM = NestingGraph((NestingVertex(0, {1}), NestingVertex()), ((0, 1), (1, 1)))


class TestRateFunction:
    @pytest.mark.parametrize('n', [0.5, 1.0, 1.5])
    def test_vanishes_at_typical_length(self, n):
        assert abs(J(p_opt(n), n)) < 1e-12
        assert saddle_s(p_opt(n), n) == pytest.approx(1.0)

    def test_value(self):
        assert J(1.0, 1.0) == pytest.approx(math.log(math.sqrt(2)) + math.pi / 4 - math.pi / 3)

    @pytest.mark.parametrize('n', [0.5, 1.0, 1.5])
    @pytest.mark.parametrize('p', _GRID)
    def test_sup_form(self, p, n):
        assert J_sup_form(p, n) == pytest.approx(J(p, n), abs=1e-8)

    @pytest.mark.parametrize('p', [0.3, 1.0, 2.0])
    def test_derivatives(self, p):
        first = central_difference(lambda x: J(x, 1.0), p, 1e-5)
        second = central_difference(lambda x: J(x, 1.0), p, 1e-4, order=2)
        assert first == pytest.approx(J_prime(p, 1.0), abs=1e-8)
        assert second == pytest.approx(J_second(p, 1.0), rel=1e-6)

    @pytest.mark.parametrize('n', [0.5, 1.0, 1.5])
    def test_convex_and_nonnegative(self, n):
        ps = np.linspace(0.05, 5.0, 200)
        values = np.array([J(p, n) for p in ps])
        assert values.min() >= -1e-14
        assert np.all(np.diff(values, 2) > 0)
        assert brentq(J_prime, 0.05, 5.0, args=(n,), xtol=1e-14) == pytest.approx(p_opt(n), abs=1e-10)

    @pytest.mark.parametrize('n', [0.5, 1.0, 1.5])
    def test_limits(self, n):
        # linear growth for long arms, finite cost for arms without loops
        assert J_prime(1e3, n) == pytest.approx(math.log(2 / n), abs=1e-5)
        assert J(1e-8, n) == pytest.approx(math.asin(n / 2), abs=1e-6)

    def test_domain(self):
        with pytest.raises(DomainError):
            J(0.0, 1.0)
        with pytest.raises(DomainError):
            J(1.0, 2.0)
        with pytest.raises(DomainError):
            p_opt(-1.0)


class TestAction:
    @pytest.mark.parametrize('p', [0.3, 1.0, 2.0])
    @pytest.mark.parametrize('phase', ['dense', 'dilute'])
    def test_stationary_at_saddle(self, p, phase):
        s = saddle_s(p, 1.0)
        slope = central_difference(lambda x: action(p, x, 1.0, phase), s, 1e-6)
        assert abs(slope) < 1e-6
        assert action(p, s, 1.0, phase) == pytest.approx(saddle_action(p, 1.0, phase))
        # a minimum in s
        assert action(p, 0.9 * s, 1.0, phase) > action(p, s, 1.0, phase)

    def test_saddle_value(self):
        assert saddle_action(p_opt(1.0), 1.0, 'dense') == pytest.approx(-1.5 / 3)
        with pytest.raises(DomainError):
            action(1.0, 2.0, 1.0, 'dense')

    def test_loop_count_scale(self):
        P = P_from_p(0.7, 1e6, 1.5, 2)
        assert P == pytest.approx(1.5 * math.log(1e6) * 0.7 / (2 * math.pi))
        assert p_from_P(P, 1e6, 1.5, 2) == pytest.approx(0.7)
        with pytest.raises(DomainError):
            p_from_P(1.0, 1.0, 1.5)


class TestGaussian:
    def test_values(self):
        assert gaussian_variance(1, 1.0, 'dense') == pytest.approx(0.367553, abs=1e-6)
        assert gaussian_variance(1, 1.0, 'dilute') == pytest.approx(0.245035, abs=1e-6)
        assert gaussian_variance(1, 1.0, 'dense') == pytest.approx(2 * gaussian_variance(2, 1.0, 'dense'))

    @pytest.mark.parametrize('n', [0.5, 1.0, 1.5])
    @pytest.mark.parametrize('jmath', [1, 2])
    def test_curvature(self, n, jmath):
        """The variance is the inverse curvature of the rate at the typical length."""
        c = 1 / (1 - math.acos(n / 2) / math.pi)
        expected = c / (jmath * math.pi * J_second(p_opt(n), n))
        assert gaussian_variance(jmath, n, 'dense') == pytest.approx(expected)

    def test_normalization(self):
        with pytest.raises(DomainError):
            gaussian_variance(3, 1.0, 'dense')


class TestArms:
    def test_jmath(self):
        assert arm_jmath(CYLINDER_ARM, BoundarySpec.from_string('SL')) == {0: 2}
        assert arm_jmath(CYLINDER_ARM, BoundarySpec.from_string('SS')) == {0: 1}
        assert arm_jmath(CYLINDER_ARM, BoundarySpec.from_string('LL')) == {0: 1}
        assert arm_jmath(HANDLE_ARM, BoundarySpec.from_string('S')) == {0: 2}
        assert arm_jmath(HANDLE_ARM, BoundarySpec.from_string('L')) == {0: 1}
        assert arm_jmath(LOOPED_ARM, BoundarySpec.from_string('S')) == {0: 2, 1: 1}

    def test_cylinder_rate(self):
        result = arm_probability_exponents(CYLINDER_ARM, BoundarySpec.from_string('SL'), 1.0, 'dense', 1.0)
        (arm,) = result.arms
        assert arm.jmath == 2
        assert arm.rate == pytest.approx(1.5 * J(1.0, 1.0) / (2 * math.pi))
        assert result.total == pytest.approx(-arm.rate)
        assert result.log_factors == 1

    @pytest.mark.parametrize('text', ['S', 'L'])
    def test_typical_lengths_cost_nothing(self, text):
        result = arm_probability_exponents(LOOPED_ARM, BoundarySpec.from_string(text), 1.0, 'dilute', p_opt(1.0))
        assert abs(result.total) < 1e-12

    def test_per_edge_lengths(self):
        result = arm_probability_exponents(LOOPED_ARM, BoundarySpec.from_string('S'), 1.0, 'dense', {0: 1.0, 1: 2.0})
        assert [arm.jmath for arm in result.arms] == [2, 1]
        expected = 1.5 * J(1.0, 1.0) / (2 * math.pi) + 1.5 * J(2.0, 1.0) / math.pi
        assert result.total == pytest.approx(-expected)
        assert result.log_factors == 2

    def test_disk_has_no_arms(self):
        disk = NestingGraph((NestingVertex(0, {1}),))
        with pytest.raises(DomainError):
            arm_probability_exponents(disk, BoundarySpec.from_string('L'), 1.0, 'dense', 1.0)
