import math

import pytest

from loopmaps.disk import (
    critical_approach_at_nome,
    disk_G,
    endpoint_residuals,
    functional_equation_residual,
    gaussian_endpoints,
    numeric_ghat,
    solve_endpoints,
    solve_endpoints_full,
)
from loopmaps.errors import DomainError
from loopmaps.model import ModelContext, ghat_coeffs, phase_constants, rho_bounds
from loopmaps.utils import fit_exponent


class TestDisk:
    def test_gaussian_endpoints(self):
        assert gaussian_endpoints(0.25) == (-1.0, 1.0)

    def test_calibrated_residuals(self, calibrated, calibrated_bent):
        for ctx, frame in (calibrated, calibrated_bent):
            assert abs(endpoint_residuals(ctx, frame)).max() < 1e-10
            assert abs(disk_G(ctx, frame, frame.tau)) < 1e-9
            assert abs(disk_G(ctx, frame, frame.tau + 0.5)) < 1e-9

    def test_odd(self, calibrated):
        ctx, frame = calibrated
        v = 0.2 + 0.3 * frame.tau
        value = disk_G(ctx, frame, v)
        assert abs(disk_G(ctx, frame, -v) + value) < 1e-10 * max(1.0, abs(value))

    @pytest.mark.parametrize('t', [0.1, 0.2, 0.35])
    def test_functional_equation(self, calibrated, t):
        ctx, frame = calibrated
        assert abs(functional_equation_residual(ctx, frame, t)) < 1e-7

    def test_ghat_from_laurent_series(self, calibrated_bent):
        ctx, frame = calibrated_bent
        numeric = numeric_ghat(ctx, frame)
        for value, expected in zip(numeric, ghat_coeffs(ctx, frame), strict=True):
            assert abs(value - expected) < 1e-7 * max(1.0, abs(expected))


class TestSolver:
    def test_seeded(self, calibrated):
        ctx, frame = calibrated
        seed = (frame.bp.gm - 0.01, frame.bp.gp + 0.01)
        solution = solve_endpoints_full(ctx, seed)
        assert solution.residual < 1e-10
        assert solution.bp.gm == pytest.approx(frame.bp.gm, abs=1e-7)
        assert solution.bp.gp == pytest.approx(frame.bp.gp, abs=1e-7)

    def test_bad_weights(self):
        with pytest.raises(DomainError):
            solve_endpoints(ModelContext(n=1.0, alpha=1.0, g=0.0, h=0.1, u=1.2))

    @pytest.mark.slow
    def test_continuation(self):
        ctx = ModelContext(n=1.0, alpha=1.0, g=0.05, h=0.1, u=0.5)
        solution = solve_endpoints_full(ctx)
        assert solution.residual < 1e-10
        assert solution.bp.gm < 0 < solution.bp.gp


@pytest.mark.slow
class TestCriticalApproach:
    def test_nome_shrinks(self, dense_approach):
        qs = [frame.q for _, frame in dense_approach]
        assert qs == sorted(qs, reverse=True)
        assert all(ctx.u < 1 for ctx, _ in dense_approach)

    @pytest.mark.parametrize('phase', ['dense', 'dilute'])
    def test_lands_on_target_nome(self, phase):
        rho = 1.6 if phase == 'dense' else rho_bounds(1.0).rho_min
        point = critical_approach_at_nome(1.0, rho, 1e-4)
        assert abs(math.log(point.q / 1e-4)) <= 0.05
        assert point.u < 1

    @pytest.mark.parametrize('n', [1.0, math.sqrt(2)])
    @pytest.mark.parametrize('phase', ['dense', 'dilute'])
    def test_string_exponent(self, critical_approaches, n, phase):
        """q ~ (1 - u)^c with c = 1/(1 - b) in the dense phase and c = 1 in the dilute one."""
        setups = critical_approaches(n, phase)
        xs = [1 - ctx.u for ctx, _ in setups]
        qs = [frame.q for _, frame in setups]
        assert fit_exponent(xs, qs) == pytest.approx(phase_constants(n, phase).c, rel=0.05)

    def test_nome_target_domain(self):
        with pytest.raises(DomainError, match='got 1.5'):
            critical_approach_at_nome(1.0, 1.6, 1.5)
