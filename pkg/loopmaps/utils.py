from collections.abc import Callable, Iterable, Sequence

import numpy as np


def richardson(func: Callable[[float], complex], h0: float, *, levels: int = 6, power: int = 1) -> complex:
    """
    Extrapolate lim_{h->0} func(h) from func(h0 / 2^j), j < levels.

    The error of func is assumed to expand in powers h^power, h^(2 power), ...
    """
    table = [[func(h0 / 2**j)] for j in range(levels)]
    for j in range(1, levels):
        for m in range(1, j + 1):
            factor = 2 ** (m * power)
            table[j].append((factor * table[j][m - 1] - table[j - 1][m - 1]) / (factor - 1))
    return table[-1][-1]


def fit_exponent(xs: Iterable[float], ys: Iterable[complex], corrections: Sequence[float] = ()) -> float:
    """
    Least-squares slope of log|y| against log x.

    Each exponent d in corrections adds a column x^d, absorbing a relative error O(x^d).
    """
    x = np.asarray(tuple(xs), dtype=float)
    log_y = np.log(np.abs(np.asarray(tuple(ys), dtype=complex)))
    if not corrections:
        slope, _ = np.polyfit(np.log(x), log_y, 1)
        return float(slope)
    design = np.column_stack([np.log(x), np.ones_like(x), *(x**d for d in corrections)])
    solution, *_ = np.linalg.lstsq(design, log_y, rcond=None)
    return float(solution[0])


def central_difference(func: Callable[[complex], complex], x: complex, step: float, *, order: int = 1) -> complex:
    if order == 1:
        return (func(x + step) - func(x - step)) / (2 * step)
    if order == 2:
        return (func(x + step) - 2 * func(x) + func(x - step)) / step**2
    raise ValueError(f'Unsupported finite-difference order {order!r}')


def max_relative_deviation(left: dict, right: dict) -> float:
    keys = set(left) | set(right)
    worst = 0.0
    for key in keys:
        a = left.get(key, 0)
        b = right.get(key, 0)
        scale = max(abs(a), abs(b))
        if scale == 0:
            continue
        worst = max(worst, abs(a - b) / scale)
    return worst


def xor_half(eps: Sequence[float]) -> float:
    """Sum modulo 1 of a sequence of colours in {0, 1/2}."""
    return (sum(round(2 * e) for e in eps) % 2) / 2
