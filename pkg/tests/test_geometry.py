import math

import pytest

from loopmaps.errors import DegenerateFrameError, DomainError, OrderingError, PoleProximityError
from loopmaps.geometry import (
    Branchpoints,
    CriticalEndpoints,
    build_parametrization,
    critical_w_inf,
    moduli,
    symmetric_polynomials,
    x_critical_limit,
    x_infinity_expansion,
    x_laurent_at_infinity,
    x_of_v,
)
from loopmaps.utils import central_difference, fit_exponent


@pytest.fixture(scope='module')
def frame():
    return build_parametrization(Branchpoints(-1.0, 1.0, 2.0, 3.0))


class TestBranchpoints:
    def test_ordering(self):
        with pytest.raises(OrderingError):
            Branchpoints(1.0, 0.0, 2.0, 3.0)

    def test_degenerate(self):
        with pytest.raises(DegenerateFrameError):
            Branchpoints(0.0, 1.0, 1.0 + 1e-14, 3.0)

    def test_symmetric_polynomials(self):
        assert symmetric_polynomials(Branchpoints(1.0, 2.0, 3.0, 4.0)) == (10, 35, 50)

    @pytest.mark.parametrize('values', [(-1.0, 1.0, 2.0, 3.0), (-0.3, 0.1, 4.0, 9.0), (0.0, 1.0, 1.001, 2.0)])
    def test_moduli(self, values):
        k, kp = moduli(Branchpoints(*values))
        assert k * k + kp * kp == pytest.approx(1, abs=1e-14)


class TestParametrization:
    def test_modulus(self, frame):
        assert frame.k == pytest.approx(math.sqrt(2 / 3), abs=1e-14)

    def test_sum_of_branchpoints_without_bending(self, calibrated):
        """At alpha = 1 the involution pairs the branch points, so E1 = 2/h."""
        ctx, frame = calibrated
        assert ctx.alpha == 1
        assert frame.E1 == pytest.approx(2 / ctx.h, rel=1e-12)

    def test_corners(self, frame):
        bp = frame.bp
        corners = {0: bp.sgp, 0.5: bp.sgm, frame.tau: bp.gp, frame.tau + 0.5: bp.gm}
        for v, value in corners.items():
            assert abs(x_of_v(frame, v) - value) < 1e-10

    def test_periods(self, frame):
        v = 0.2 + 0.3 * frame.tau
        value = x_of_v(frame, v)
        assert abs(x_of_v(frame, v + 1) - value) < 1e-10
        assert abs(x_of_v(frame, v + 2 * frame.tau) - value) < 1e-10
        assert abs(x_of_v(frame, -v) - value) < 1e-10

    def test_derivative(self, frame):
        v = 0.2 + 0.1j
        numeric = central_difference(lambda z: x_of_v(frame, z), v, 1e-5)
        assert abs(x_of_v(frame, v, 1) - numeric) < 1e-7 * abs(numeric)

    def test_pole(self, frame):
        assert 0 < frame.w_inf < 1
        with pytest.raises(PoleProximityError):
            x_of_v(frame, frame.v_inf)

    def test_residue_at_infinity(self, frame):
        w = 1e-4
        value = x_of_v(frame, frame.v_inf + w) * w
        assert abs(value + 1j * frame.C) < 1e-3 * frame.C

    def test_laurent_at_infinity(self, frame):
        numeric = x_laurent_at_infinity(frame, 2)
        closed = x_infinity_expansion(frame)
        assert closed[1] == pytest.approx(1.25)
        for power, value in zip(range(-1, 3), closed, strict=True):
            assert abs(numeric.coefficient(power) - value) < 1e-8 * max(1.0, abs(value))

    def test_expansion_order(self, frame):
        assert len(x_infinity_expansion(frame, 1)) == 2
        with pytest.raises(DomainError):
            x_infinity_expansion(frame, 4)


class TestNearCritical:
    def test_nome_against_modulus(self):
        """q ~ (k/4)^4 when gp and sgp merge."""
        deltas = (1e-2, 1e-3, 1e-4, 1e-5)
        frames = [build_parametrization(Branchpoints(-1.0, 1.0, 1.0 + delta, 3.0)) for delta in deltas]
        assert frames[-1].q == pytest.approx((frames[-1].k / 4) ** 4, rel=1e-3)
        assert fit_exponent([f.k for f in frames], [f.q for f in frames]) == pytest.approx(4, abs=0.01)

    def test_critical_w_inf(self):
        assert critical_w_inf(1.0, 0.2, -1.0) == pytest.approx(0.5)
        assert 0 < critical_w_inf(0.5, 0.2, -1.0) < 0.5

    def test_critical_limit(self):
        star = CriticalEndpoints(gm=-1.0, gp=1.0, sgm=3.0, w_inf=0.5)
        assert abs(x_critical_limit(0, 1, star)) < 1e-15
        assert x_critical_limit(0, 0, star).real == pytest.approx(8 * star.scale)
        assert x_critical_limit(0.5, 0, star).real == pytest.approx(star.scale)
        with pytest.raises(PoleProximityError):
            x_critical_limit(0.5, 0.5, star)
        with pytest.raises(DomainError):
            x_critical_limit(0.25, 0.5, star)
