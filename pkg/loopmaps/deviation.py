"""
Number of separating loops along the arms of a nesting graph.

At volume V an arm carries P = c ln V p / (j pi) separating loops with p of order 1; the
probability of a given p decays as V^(-c J(p) / (j pi)), with j = 2 on arms ending at a
small boundary alone on a genus 0 leaf and j = 1 otherwise.
"""

import math
from collections import Counter
from collections.abc import Mapping
from typing import Literal, NamedTuple

from scipy.optimize import minimize_scalar

from loopmaps.errors import DomainError
from loopmaps.model import Phase, phase_constants
from loopmaps.nesting import BoundarySpec, NestingGraph

Jmath = Literal[1, 2]

_SUP_XTOL = 1e-12
# lower end of the search interval for the sup form, where ln s is still finite
_SUP_FLOOR = 1e-300


def _check(p: float, n: float) -> None:
    if not p > 0:
        raise DomainError(f'Reduced arm length p must be positive, got {p!r}')
    if not 0 < n < 2:
        raise DomainError(f'Loop weight n must lie in (0, 2), got {n!r}')


def saddle_s(p: float, n: float) -> float:
    """Maximizer of p ln s + arccos(ns/2) on [0, 2/n]."""
    _check(p, n)
    return 2 / n * p / math.sqrt(1 + p * p)


def J(p: float, n: float) -> float:
    _check(p, n)
    return p * math.log(saddle_s(p, n)) + math.atan(1 / p) - math.acos(n / 2)


def J_sup_form(p: float, n: float) -> float:
    """J as sup over s in [0, 2/n] of p ln s + arccos(ns/2) - arccos(n/2)."""
    _check(p, n)
    result = minimize_scalar(
        lambda s: -(p * math.log(s) + math.acos(min(n * s / 2, 1.0))),
        bounds=(_SUP_FLOOR, 2 / n),
        method='bounded',
        options={'xatol': _SUP_XTOL},
    )
    return -result.fun - math.acos(n / 2)


def J_prime(p: float, n: float) -> float:
    return math.log(saddle_s(p, n))


def J_second(p: float, n: float) -> float:
    _check(p, n)
    return 1 / (p * (1 + p * p))


def p_opt(n: float) -> float:
    """Typical reduced arm length, where J vanishes."""
    if not 0 < n < 2:
        raise DomainError(f'Loop weight n must lie in (0, 2), got {n!r}')
    return n / math.sqrt(4 - n * n)


def action(p: float, s: float, n: float, phase: Phase) -> float:
    """
    Exponent of ln V in the weight of arms with reduced length p at separating-loop weight s:
    -c (p ln s + pi b(s)) / pi.

    Stationary at saddle_s(p, n), where it equals -c (pi b + J(p)) / pi.
    """
    _check(p, n)
    if not 0 < s < 2 / n:
        raise DomainError(f's must lie in (0, 2/n), got {s!r}')
    c = phase_constants(n, phase).c
    return -c * (p * math.log(s) + math.acos(n * s / 2)) / math.pi


def saddle_action(p: float, n: float, phase: Phase) -> float:
    b, _, c = phase_constants(n, phase)
    return -c * (math.pi * b + J(p, n)) / math.pi


def P_from_p(p: float, volume: float, c: float, jmath: Jmath = 1) -> float:
    return c * math.log(volume) * p / (jmath * math.pi)


def p_from_P(P: float, volume: float, c: float, jmath: Jmath = 1) -> float:
    if not volume > 1:
        raise DomainError(f'Volume must exceed 1, got {volume!r}')
    return jmath * math.pi * P / (c * math.log(volume))


class ArmRate(NamedTuple):
    edge: int
    jmath: Jmath
    p: float
    # V^(-rate) up to a factor (ln V)^(-1/2)
    rate: float


class ArmProbability(NamedTuple):
    arms: tuple[ArmRate, ...]
    # exponent of V in the joint probability
    total: float
    # number of (ln V)^(-1/2) factors
    log_factors: int


def arm_jmath(graph: NestingGraph, spec: BoundarySpec) -> dict[int, Jmath]:
    """2 on arms with exactly one end at a small boundary alone on a genus 0 leaf, else 1."""
    classes = graph.validate(spec)
    small_ends = Counter(classes.leaf_half_edge[v].edge for v in classes.small_leaves)
    return {e: 2 if small_ends[e] == 1 else 1 for e in range(len(graph.edges))}


def arm_probability_exponents(
    graph: NestingGraph, spec: BoundarySpec, n: float, phase: Phase, p: float | Mapping[int, float]
) -> ArmProbability:
    """Large deviation rates of the arm lengths, p given per edge or shared by all edges."""
    if 2 * graph.genus - 2 + spec.k < 0:
        raise DomainError(f'Arm lengths are defined for 2g - 2 + k >= 0, got g={graph.genus!r}, k={spec.k!r}')
    c = phase_constants(n, phase).c
    arms = []
    for edge, jmath in arm_jmath(graph, spec).items():
        p_edge = p[edge] if isinstance(p, Mapping) else p
        arms.append(ArmRate(edge, jmath, p_edge, c / (jmath * math.pi) * J(p_edge, n)))
    return ArmProbability(tuple(arms), -sum(arm.rate for arm in arms), len(arms))


def gaussian_variance(jmath: Jmath, n: float, phase: Phase) -> float:
    """Variance of (P - c p_opt ln V / (j pi)) / sqrt(ln V)."""
    if jmath not in (1, 2):
        raise DomainError(f'Arm normalization must be 1 or 2, got {jmath!r}')
    c = phase_constants(n, phase).c
    return 2 ** (3 - jmath) * n * c / (math.pi * (4 - n * n) ** 1.5)
