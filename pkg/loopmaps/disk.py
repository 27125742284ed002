"""
Generating series of disks: the function G(v) on the torus, the recovery of F(x),
the endpoint equations and their solver.
"""

import math
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq
from sentry_sdk import trace

from loopmaps.config import CONTINUATION_STEPS, NEWTON_MAX_ITER, NEWTON_TOL
from loopmaps.context_logger import context_print
from loopmaps.errors import ConvergenceError, DegenerateFrameError, DomainError, OrderingError, PoleProximityError
from loopmaps.geometry import Branchpoints, EllipticFrame, build_parametrization, x_laurent_at_infinity, x_series
from loopmaps.laurent import Laurent
from loopmaps.model import (
    GHat,
    ModelContext,
    critical_line,
    ghat_coeffs,
    involution_sigma,
    sigma_fixed_point,
    sigma_prime,
    sigma_second,
)
from loopmaps.specfun import b_of_n, upsilon_laurent

_MAX_L = 3
_FD_STEP = 1e-7
_MAX_HALVINGS = 30

# (sign of v, sign of v_inf, overall sign) of the four terms of the disk bracket
_BRACKET_TERMS = ((1, 1, 1), (1, -1, 1), (-1, 1, -1), (-1, -1, -1))


def gaussian_endpoints(u: float) -> tuple[float, float]:
    """Endpoints of the cut for maps with only the quadratic vertex potential."""
    return -2 * math.sqrt(u), 2 * math.sqrt(u)


def branchpoints(alpha: float, h: float, gm: float, gp: float) -> Branchpoints:
    ctx = ModelContext(n=1.0, alpha=alpha, g=0.0, h=h)
    return Branchpoints(gm=gm, gp=gp, sgp=involution_sigma(ctx, gp), sgm=involution_sigma(ctx, gm))


def bracket_series(
    b: float, frame: EllipticFrame, v0: complex, order: int, *, allow_poles: bool = False
) -> list[Laurent]:
    """
    Series in w of d^l/dv_inf^l [Ups(v + v_inf) + Ups(v - v_inf) - Ups(-v + v_inf) - Ups(-v - v_inf)]
    at v = v0 + w, for l = 0..3.
    """
    mod = frame.mod
    v_inf = frame.v_inf
    result: list[Laurent | None] = [None] * (_MAX_L + 1)
    for sign_v, sign_inf, sign in _BRACKET_TERMS:
        point = sign_v * v0 + sign_inf * v_inf
        series = upsilon_laurent(b, point, mod, order + _MAX_L)
        if series.val < 0 and not allow_poles:
            raise PoleProximityError(complex(v0), complex(v0))
        for l in range(_MAX_L + 1):
            term = series.rescale_variable(sign_v).truncate(order + 1).scale(sign * sign_inf**l)
            result[l] = term if result[l] is None else result[l] + term
            series = series.derivative()
    return result


def disk_parts(b: float, frame: EllipticFrame, v0: complex, order: int = 0, **kwargs) -> list[Laurent]:
    """Series of the four pieces D_l with G = sum_l ghat_l D_l."""
    brackets = bracket_series(b, frame, v0, order, **kwargs)
    ic = 1j * frame.C
    return [brackets[l].scale(ic**l / (2 * math.factorial(l))) for l in range(_MAX_L + 1)]


def disk_G_series(ctx: ModelContext, frame: EllipticFrame, v0: complex, order: int, **kwargs) -> Laurent:
    """Taylor (or Laurent, with allow_poles) series of G(v0 + w) up to w^order."""
    ghat = ghat_coeffs(ctx, frame)
    parts = disk_parts(ctx.b, frame, v0, order, **kwargs)
    result = parts[0].scale(ghat[0])
    for l in range(1, _MAX_L + 1):
        result = result + parts[l].scale(ghat[l])
    return result


def disk_G(ctx: ModelContext, frame: EllipticFrame, v: complex) -> complex:
    return disk_G_series(ctx, frame, complex(v), 0).coefficient(0)


def endpoint_residuals(ctx: ModelContext, frame: EllipticFrame) -> np.ndarray:
    """Imaginary parts of G(tau) and G(tau + 1/2); both values are purely imaginary."""
    return np.array([disk_G(ctx, frame, frame.tau + eps).imag for eps in (0, 0.5)])


def disk_F(ctx: ModelContext, frame: EllipticFrame, v: complex) -> complex:
    """F(x(v)) recovered from G(v)."""
    n, u, g = ctx.n, ctx.u, ctx.g
    xs = x_series(frame, complex(v), 1)
    x, dx = xs.coefficient(0), xs.coefficient(1)
    sx = involution_sigma(ctx, x)
    sp = sigma_prime(ctx, x)

    def potential_prime(y: complex) -> complex:
        return y - g * y * y

    polynomial = (2 * potential_prime(x) + n * potential_prime(sx) * sp) / (4 - n * n)
    log_term = n * u * sigma_second(ctx, x) / (2 * (2 + n) * sp)
    return disk_G(ctx, frame, v) / dx + polynomial - log_term


def functional_equation_residual(ctx: ModelContext, frame: EllipticFrame, t: float) -> complex:
    """F(x + i0) + F(x - i0) + contour term - (x - g x^2) at x = x(tau + t) on the cut."""
    n = ctx.n
    v = frame.tau + t
    x = x_series(frame, v, 0).coefficient(0)
    sp = sigma_prime(ctx, x)
    contour = -n * sp * disk_F(ctx, frame, t) + n * ctx.u * sigma_second(ctx, x) / (2 * sp)
    return disk_F(ctx, frame, v) + disk_F(ctx, frame, frame.tau - t) + contour - (x - ctx.g * x * x)


def calibrate_weights(n: float, alpha: float, h: float, bp: Branchpoints) -> tuple[float, float]:
    """(u, g) for which the given branch points solve the endpoint equations; G is affine in both."""
    frame = build_parametrization(bp)
    b = b_of_n(n)
    den = 4 - n * n
    e1, e2 = frame.E1, frame.E2
    matrix = np.empty((2, 2))
    rhs = np.empty(2)
    for i, eps in enumerate((0, 0.5)):
        d = [p.coefficient(0) for p in disk_parts(b, frame, frame.tau + eps)]
        u_part = -2 / (2 + n) * d[0]
        g_part = (3 * e1 * e1 - 4 * e2) / (12 * den) * d[1] - e1 / den * d[2] + 2 / den * d[3]
        free = -e1 / (2 * den) * d[1] + 2 / den * d[2]
        matrix[i] = u_part.imag, g_part.imag
        rhs[i] = -free.imag
    u, g = np.linalg.solve(matrix, rhs)
    return float(u), float(g)


class EndpointSolution(NamedTuple):
    bp: Branchpoints
    frame: EllipticFrame
    residual: float
    iterations: int


def _frame_for(ctx: ModelContext, point: np.ndarray) -> EllipticFrame:
    return build_parametrization(branchpoints(ctx.alpha, ctx.h, float(point[0]), float(point[1])))


def _newton(ctx: ModelContext, seed: np.ndarray) -> EndpointSolution:
    point = np.asarray(seed, dtype=float)
    frame = _frame_for(ctx, point)
    residual = endpoint_residuals(ctx, frame)
    norm = float(np.abs(residual).max())

    for iteration in range(1, NEWTON_MAX_ITER + 1):
        if norm < NEWTON_TOL:
            return EndpointSolution(frame.bp, frame, norm, iteration - 1)

        jacobian = np.empty((2, 2))
        for j in range(2):
            step = _FD_STEP * max(1.0, abs(point[j]))
            shifted = point.copy()
            shifted[j] += step
            jacobian[:, j] = (endpoint_residuals(ctx, _frame_for(ctx, shifted)) - residual) / step
        delta = np.linalg.solve(jacobian, -residual)

        damping = 1.0
        for _ in range(_MAX_HALVINGS):
            trial = point + damping * delta
            try:
                trial_frame = _frame_for(ctx, trial)
                trial_residual = endpoint_residuals(ctx, trial_frame)
            except (OrderingError, DegenerateFrameError, PoleProximityError):
                damping /= 2
                continue
            trial_norm = float(np.abs(trial_residual).max())
            if trial_norm < norm:
                break
            damping /= 2
        else:
            raise ConvergenceError('endpoint Newton iteration', residual=norm, iterations=iteration)

        point, frame, residual, norm = trial, trial_frame, trial_residual, trial_norm
        context_print(f'🔁 Newton step {iteration}: |r|={norm:.1e} (damping {damping:g})')

    if norm < NEWTON_TOL:
        return EndpointSolution(frame.bp, frame, norm, NEWTON_MAX_ITER)
    raise ConvergenceError('endpoint Newton iteration', residual=norm, iterations=NEWTON_MAX_ITER)


@trace
def solve_endpoints_full(ctx: ModelContext, seed: tuple[float, float] | None = None) -> EndpointSolution:
    """
    Solve G(tau) = G(tau + 1/2) = 0 for (gm, gp).

    Without a seed, the weights are reached by continuation from the Gaussian endpoints.
    """
    if seed is not None:
        return _newton(ctx, np.asarray(seed, dtype=float))

    steps = max(CONTINUATION_STEPS, 1)
    previous = current = np.array(gaussian_endpoints(ctx.u))
    solution = None
    for step in range(1, steps + 1):
        t = step / steps
        rung = ModelContext(n=ctx.n, alpha=ctx.alpha, g=ctx.g * t, h=ctx.h * t, u=ctx.u)
        guess = current if step <= 2 else 2 * current - previous
        try:
            solution = _newton(rung, guess)
        except ConvergenceError:
            if step <= 2:
                raise
            solution = _newton(rung, current)
        previous, current = current, np.array([solution.bp.gm, solution.bp.gp])
        context_print(f'🪜 Continuation {step}/{steps}: gm={current[0]:.12g} gp={current[1]:.12g}')
    return solution


def solve_endpoints(ctx: ModelContext, seed: tuple[float, float] | None = None) -> Branchpoints:
    return solve_endpoints_full(ctx, seed).bp


class ApproachPoint(NamedTuple):
    u: float
    q: float
    bp: Branchpoints
    gap: float


def critical_approach(n: float, rho: float, gap: float, *, scan: int = 40) -> ApproachPoint:
    """
    Point of the line u -> 1 at fixed (g, h) on the critical line, alpha = 1.

    The distance gap = gp* - gp fixes the nome; gm is adjusted until the calibrated face
    weight g matches the critical one, and u is read off the calibration.
    """
    point = critical_line(n, rho)
    h = math.sqrt(point.h_squared)
    g_target = point.g_over_h * h
    gp_star = sigma_fixed_point(ModelContext(n=n, alpha=1.0, g=g_target, h=h))
    gm_star = (1 - rho) / (2 * h)
    gp = gp_star - gap
    if not gap > 0:
        raise DomainError(f'gap must be positive, got {gap!r}')

    def mismatch(gm: float) -> float:
        return calibrate_weights(n, 1.0, h, branchpoints(1.0, h, gm, gp))[1] - g_target

    span = 0.2 * (gp_star - gm_star)
    grid = gm_star + span * np.linspace(-1, 1, 2 * scan + 1)
    values = {}
    for gm in sorted(grid, key=lambda x: abs(x - gm_star)):
        try:
            values[gm] = mismatch(gm)
        except (OrderingError, DegenerateFrameError, PoleProximityError):
            continue
    ordered = sorted(values)
    brackets = [(lo, hi) for lo, hi in zip(ordered, ordered[1:], strict=False) if values[lo] * values[hi] <= 0]
    if not brackets:
        residual = min(map(abs, values.values()), default=math.inf)
        raise ConvergenceError('critical approach bracketing', residual=residual, iterations=len(values))
    lo, hi = min(brackets, key=lambda pair: abs(pair[0] + pair[1] - 2 * gm_star))
    gm = brentq(mismatch, lo, hi, xtol=1e-15, rtol=1e-15)
    bp = branchpoints(1.0, h, gm, gp)
    u, _ = calibrate_weights(n, 1.0, h, bp)
    return ApproachPoint(u=u, q=build_parametrization(bp).q, bp=bp, gap=gap)


def critical_approach_at_nome(
    n: float, rho: float, q: float, *, gap: float = 1e-2, rtol: float = 0.05, max_iter: int = 12
) -> ApproachPoint:
    """
    Point of the approach of critical_approach whose nome lies within a relative rtol of q.

    Secant iteration on ln gap against ln q, starting from q ~ gap^2.
    """
    if not 0 < q < 1:
        raise DomainError(f'Target nome must lie in (0, 1), got {q!r}')
    target = math.log(q)
    max_step = math.log(100)
    slope = 2.0
    point = critical_approach(n, rho, gap)
    miss = math.log(point.q) - target
    for iteration in range(1, max_iter + 1):
        if abs(miss) <= rtol:
            return point
        step = min(max(-miss / slope, -max_step), max_step)
        trial = critical_approach(n, rho, point.gap * math.exp(step))
        trial_miss = math.log(trial.q) - target
        measured = (trial_miss - miss) / step
        if measured > 0:
            slope = measured
        context_print(f'🎯 Nome step {iteration}: gap={trial.gap:.3e} q={trial.q:.3e} (target {q:.3e})')
        point, miss = trial, trial_miss
    if abs(miss) <= rtol:
        return point
    raise ConvergenceError('critical approach nome', residual=abs(miss), iterations=max_iter)


def numeric_ghat(ctx: ModelContext, frame: EllipticFrame, order: int = 3) -> GHat:
    """
    ghat_l from the polar part of d/dv (-2 V(x) / (4 - n^2) + 2 ln x / (2 + n)) at v_inf,
    using the numerical Laurent series of x.
    """
    n, g = ctx.n, ctx.g
    x = x_laurent_at_infinity(frame, order + 2)
    potential = (x * x).scale(0.5) - (x * x * x).scale(g / 3)
    # ln x = ln(-iC / w) + ln(1 + ...): only the derivative matters
    x_reduced = x.shift(1).scale(1 / x.coefficient(-1))
    log_derivative = x_reduced.derivative() / x_reduced + Laurent.monomial(-1, order + 1, -1)
    total = potential.derivative().scale(-2 / (4 - n * n)) + log_derivative.scale(2 * ctx.u / (2 + n))
    ic = 1j * frame.C
    values = [total.coefficient(-(l + 1)) / ic**l for l in range(4)]
    return GHat(*values)
