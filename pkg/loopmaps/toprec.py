"""
Topological recursion for the correlators G^(g,k) of maps with loops, and of usual maps at
renormalized face weights.

Both flavors decompose on elementary blocks B_{eps,l}(v) with coefficients C^(g,k) that are
obtained either from the recursion at the first leg or from a sum over colored trivalent graphs.
"""

import math
from collections import defaultdict
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from functools import partial
from itertools import combinations, permutations, product
from threading import RLock
from typing import Literal, NamedTuple

from cachetools import LRUCache, cachedmethod
from cachetools.keys import hashkey
from sentry_sdk import trace

from loopmaps.config import LAURENT_DEPTH
from loopmaps.context_logger import context_print
from loopmaps.disk import disk_G_series
from loopmaps.errors import CriticalityError, DomainError, LaurentDepthError, PoleProximityError, TopologyError
from loopmaps.geometry import EllipticFrame
from loopmaps.graphs import TrivalentGraph, check_topology, enumerate_trivalent_graphs, explore_graph
from loopmaps.laurent import Laurent
from loopmaps.model import ModelContext, Phase
from loopmaps.specfun import b_of_n, upsilon_const, upsilon_laurent

Flavor = Literal['loop', 'usual']
FLAVORS: tuple[Flavor, ...] = ('loop', 'usual')
COLORS = (0.0, 0.5)

_Y1_TOL = 1e-12

# (sign of v, sign of tau + sigma, overall sign) of the four terms of a block
_BLOCK_TERMS = ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1))


class ColoredLeg(NamedTuple):
    l: int
    eps: float


class DeltaTaylor(NamedTuple):
    y1: complex
    y2: complex
    # Taylor coefficients of Delta_eps G(w) from w^0
    coeffs: tuple[complex, ...]


Key = tuple[ColoredLeg, ...]


def _check_color(eps: float) -> float:
    if eps not in COLORS:
        raise DomainError(f'Colour must be 0 or 1/2, got {eps!r}')
    return float(eps)


def _check_flavor(flavor: str) -> Flavor:
    if flavor not in FLAVORS:
        raise DomainError(f'Unknown flavor {flavor!r}, expected one of {FLAVORS!r}')
    return flavor


def _stable(g: int, k: int) -> bool:
    return 2 * g - 2 + k > 0


@dataclass(frozen=True, slots=True)
class CoefficientTable:
    g: int
    k: int
    flavor: Flavor
    entries: dict[Key, complex] = field(default_factory=dict)

    def __getitem__(self, legs: Iterable) -> complex:
        return self.entries.get(tuple(ColoredLeg(*leg) for leg in legs), 0j)

    def __len__(self) -> int:
        return len(self.entries)

    def nonzero(self, tol: float = 0.0) -> dict[Key, complex]:
        return {key: value for key, value in self.entries.items() if abs(value) > tol}

    def symmetry_defect(self) -> float:
        """Largest relative difference between entries whose legs are permutations of each other."""
        worst = 0.0
        for key, value in self.entries.items():
            for perm in set(permutations(key)):
                other = self.entries.get(perm, 0j)
                scale = max(abs(value), abs(other))
                if scale:
                    worst = max(worst, abs(value - other) / scale)
        return worst


def k_targets(a: ColoredLeg, b: ColoredLeg) -> list[ColoredLeg]:
    """Legs (l, eps) for which K[l,eps; a; b] may be non-zero."""
    result = []
    for eps in COLORS:
        if eps == a.eps == b.eps:
            top = a.l + b.l + 2
        elif eps == a.eps:
            top = a.l + 1
        elif eps == b.eps:
            top = b.l + 1
        else:
            top = 0
        result.extend(ColoredLeg(l, eps) for l in range(top + 1))
    return result


def k_allowed(head: ColoredLeg, a: ColoredLeg, b: ColoredLeg) -> bool:
    eps = head.eps
    if eps == a.eps == b.eps:
        return head.l <= a.l + b.l + 2
    if eps == a.eps:
        return head.l <= a.l + 1
    if eps == b.eps:
        return head.l <= b.l + 1
    return head.l == 0


def ktilde_targets(inner: ColoredLeg) -> list[tuple[ColoredLeg, ColoredLeg]]:
    """Pairs ((l, eps), (l', eps)) for which Ktilde[l,eps; l',eps; inner] may be non-zero."""
    result = []
    for eps in COLORS:
        if eps == inner.eps:
            for l in range(inner.l + 2):
                result.extend((ColoredLeg(l, eps), ColoredLeg(lp, eps)) for lp in range(inner.l + 2 - l))
        else:
            result.append((ColoredLeg(0, eps), ColoredLeg(0, eps)))
    return result


def ktilde_allowed(head: ColoredLeg, leg: ColoredLeg, inner: ColoredLeg) -> bool:
    if head.eps != leg.eps:
        return False
    if head.eps == inner.eps:
        return head.l + leg.l <= inner.l + 1
    return head.l == leg.l == 0


@trace
def deltaG_taylor(ctx: ModelContext, frame: EllipticFrame, eps: float, max_order: int = 6) -> DeltaTaylor:
    """
    Taylor coefficients of Delta_eps G(w) = G(tau + eps + w) + G(tau + eps - w) at w = 0,
    with Delta_eps G(w) = y1 w^2 + y2 w^4 / 6 + O(w^6).
    """
    eps = _check_color(eps)
    if max_order < 4:
        raise DomainError(f'max_order must be at least 4, got {max_order!r}')
    series = disk_G_series(ctx, frame, frame.tau + eps, max_order)
    delta = series + series.rescale_variable(-1)
    coeffs = tuple(delta.coefficient(r) for r in range(max_order + 1))
    y1 = coeffs[2]
    if abs(y1) < _Y1_TOL:
        raise CriticalityError(eps, y1)
    return DeltaTaylor(y1=y1, y2=6 * coeffs[4], coeffs=coeffs)


class TopologicalRecursion:
    """
    Coefficients C^(g,k) on a fixed frame.

    The loop flavor uses the kernel Upsilon_b with denominator 4 - n^2, the usual flavor the
    kernel Upsilon_{1/2} with denominator 4. Both share Delta_eps G.
    """

    def __init__(self, ctx: ModelContext, frame: EllipticFrame, flavor: Flavor = 'loop', *, depth: int = LAURENT_DEPTH):
        self.ctx = ctx
        self.frame = frame
        self.flavor = _check_flavor(flavor)
        self.depth = depth
        self.b = ctx.b if flavor == 'loop' else 0.5
        self.denominator = 4 - ctx.n**2 if flavor == 'loop' else 4.0
        self._cache = LRUCache(maxsize=65536)
        self._lock = RLock()

    def __repr__(self) -> str:
        return f'TopologicalRecursion(flavor={self.flavor!r}, T={self.frame.T!r}, n={self.ctx.n!r})'

    # blocks

    @cachedmethod(lambda self: self._cache, key=partial(hashkey, 'block'), lock=lambda self: self._lock)
    def block_series(self, sigma: float, m: int, v0: complex, order: int) -> Laurent:
        """Laurent series of B_{sigma,m}(v0 + w) up to w^order."""
        sigma = _check_color(sigma)
        mod = self.frame.mod
        shift = self.frame.tau + sigma
        derivatives = 2 * m + 1
        result = None
        for sign_v, sign_shift, sign in _BLOCK_TERMS:
            point = sign_v * v0 + sign_shift * shift
            series = upsilon_laurent(self.b, point, mod, order + derivatives)
            for _ in range(derivatives):
                series = series.derivative()
            term = series.rescale_variable(sign_v).scale(sign / self.denominator)
            result = term if result is None else result + term
        return result.truncate(order + 1)

    def block_B(self, eps: float, l: int, v: complex) -> complex:
        """B_{eps,l}(v) = d^{2l}/dv2^{2l} of the shifted cylinder at v2 = tau + eps."""
        if l < 0:
            raise DomainError(f'Block index must be non-negative, got {l!r}')
        series = self.block_series(eps, l, complex(v), 0)
        if series.val < 0:
            raise PoleProximityError(complex(v), complex(v))
        return series.coefficient(0)

    # Delta_eps G

    @cachedmethod(lambda self: self._cache, key=partial(hashkey, 'delta'), lock=lambda self: self._lock)
    def delta_taylor(self, eps: float) -> DeltaTaylor:
        return deltaG_taylor(self.ctx, self.frame, eps)

    @cachedmethod(lambda self: self._cache, key=partial(hashkey, 'inverse'), lock=lambda self: self._lock)
    def _inverse_delta(self, eps: float, length: int) -> Laurent:
        """1 / Delta_eps G(w) with length known coefficients, starting at w^-2."""
        self.delta_taylor(eps)
        series = disk_G_series(self.ctx, self.frame, self.frame.tau + eps, length + 1)
        delta = (series + series.rescale_variable(-1)).even_part()
        return delta.drop_leading(2).inverse()

    # recursion coefficients

    def _with_retry(self, compute: Callable[[int], complex], what: str) -> complex:
        try:
            return compute(1)
        except LaurentDepthError:
            context_print(f'[⚠️] Doubling Laurent depth for {what}')
            return compute(2)

    def K_residue(self, head: ColoredLeg, a: ColoredLeg, b: ColoredLeg) -> complex:
        """The residue defining K, without selection rules or symmetrization."""
        eps = head.eps
        center = self.frame.tau + eps

        def compute(factor: int) -> complex:
            length = factor * (self.depth + 2 * (a.l + b.l))
            left = self.block_series(a.eps, a.l, center, length)
            right = self.block_series(b.eps, b.l, center, length).rescale_variable(-1)
            left, right = _relative(left, length), _relative(right, length)
            integrand = (left * right * self._inverse_delta(eps, length)).shift(2 * head.l + 1)
            return -integrand.residue() / math.factorial(2 * head.l + 1)

        return self._with_retry(compute, f'K[{head}; {a}; {b}]')

    def K(self, head: Iterable, a: Iterable, b: Iterable) -> complex:
        head, a, b = ColoredLeg(*head), ColoredLeg(*a), ColoredLeg(*b)
        if not k_allowed(head, a, b):
            return 0j
        # symmetric in (a, b) because Delta_eps G is even
        a, b = sorted((a, b))
        return self._K(head, a, b)

    @cachedmethod(lambda self: self._cache, key=partial(hashkey, 'K'), lock=lambda self: self._lock)
    def _K(self, head: ColoredLeg, a: ColoredLeg, b: ColoredLeg) -> complex:
        return self.K_residue(head, a, b)

    def Ktilde(self, head: Iterable, leg: Iterable, inner: Iterable) -> complex:
        head, leg, inner = ColoredLeg(*head), ColoredLeg(*leg), ColoredLeg(*inner)
        if not ktilde_allowed(head, leg, inner):
            return 0j
        return self._Ktilde(head, leg, inner)

    @cachedmethod(lambda self: self._cache, key=partial(hashkey, 'Ktilde'), lock=lambda self: self._lock)
    def _Ktilde(self, head: ColoredLeg, leg: ColoredLeg, inner: ColoredLeg) -> complex:
        eps = head.eps
        center = self.frame.tau + eps

        def compute(factor: int) -> complex:
            length = factor * (self.depth + 2 * inner.l)
            block = _relative(self.block_series(inner.eps, inner.l, center, length), length)
            integrand = (block * self._inverse_delta(eps, length)).shift(2 * (head.l + leg.l) + 1)
            norm = math.factorial(2 * head.l + 1) * math.factorial(2 * leg.l)
            return -integrand.residue() / norm

        return self._with_retry(compute, f'Ktilde[{head}; {leg}; {inner}]')

    def upsilon_constant(self) -> float:
        return upsilon_const(self.b, self.frame.mod)

    # tables

    @cachedmethod(lambda self: self._cache, key=partial(hashkey, 'initial'), lock=lambda self: self._lock)
    def initial_data(self) -> tuple[CoefficientTable, CoefficientTable]:
        """C^(0,3) and C^(1,1)."""
        disk: dict[Key, complex] = {}
        torus: dict[Key, complex] = {}
        upsilon_b = self.upsilon_constant()
        for eps in COLORS:
            y = self.delta_taylor(eps)
            disk[(ColoredLeg(0, eps),) * 3] = -2 / y.y1
            torus[(ColoredLeg(0, eps),)] = y.y2 / (24 * y.y1**2) + upsilon_b / y.y1
            torus[(ColoredLeg(1, eps),)] = -1 / (24 * y.y1)
        return CoefficientTable(0, 3, self.flavor, disk), CoefficientTable(1, 1, self.flavor, torus)

    @cachedmethod(lambda self: self._cache, key=partial(hashkey, 'table'), lock=lambda self: self._lock)
    def table(self, g: int, k: int) -> CoefficientTable:
        check_topology(g, k)
        if (g, k) == (0, 3):
            return self.initial_data()[0]
        if (g, k) == (1, 1):
            return self.initial_data()[1]
        return self.recursion_C(g, k)

    @trace
    def recursion_C(self, g: int, k: int) -> CoefficientTable:
        """C^(g,k) from the tables of smaller Euler characteristic, decomposing at the first leg."""
        check_topology(g, k)
        if 2 * g - 2 + k < 2:
            return self.table(g, k)
        entries: dict[Key, complex] = defaultdict(complex)

        # both edges of the first vertex lead into one surface
        if g >= 1:
            for key, value in self.table(g - 1, k + 1).entries.items():
                a, b, rest = key[0], key[1], key[2:]
                for head in k_targets(a, b):
                    entries[(head, *rest)] += self.K(head, a, b) * value

        # the first vertex separates two stable surfaces
        positions = range(k - 1)
        for h in range(g + 1):
            for size in range(k):
                if not _stable(h, size + 1) or not _stable(g - h, k - size):
                    continue
                left, right = self.table(h, size + 1), self.table(g - h, k - size)
                for chosen in combinations(positions, size):
                    others = [i for i in positions if i not in chosen]
                    for lkey, lvalue in left.entries.items():
                        for rkey, rvalue in right.entries.items():
                            rest: list = [None] * (k - 1)
                            for i, leg in zip(chosen, lkey[1:], strict=True):
                                rest[i] = leg
                            for i, leg in zip(others, rkey[1:], strict=True):
                                rest[i] = leg
                            a, b = lkey[0], rkey[0]
                            for head in k_targets(a, b):
                                entries[(head, *rest)] += self.K(head, a, b) * lvalue * rvalue

        # the first vertex carries a second leg
        if k >= 2:
            for key, value in self.table(g, k - 1).entries.items():
                inner, rest = key[0], key[1:]
                for head, leg in ktilde_targets(inner):
                    factor = 2 * self.Ktilde(head, leg, inner) * value
                    for i in range(k - 1):
                        entries[(head, *rest[:i], leg, *rest[i:])] += factor

        context_print(f'🧮 Recursion ({g},{k}): {len(entries)} entries')
        return CoefficientTable(g, k, self.flavor, {key: v for key, v in entries.items() if v != 0})

    def vertex_factor(self, kind: str, colors: Sequence[ColoredLeg]) -> complex:
        """
        Weight of a vertex of the given class; colors are those of e0, e1, e2, with the leg slot
        second for terminal vertices.
        """
        disk, torus = self.initial_data()
        if kind == 'prime':
            return self.K(*colors)
        if kind == 'terminal':
            return self.Ktilde(*colors)
        if kind == 'biterminal':
            return disk[colors]
        if kind == 'loop':
            return torus[colors[:1]]
        raise DomainError(f'Unknown vertex class {kind!r}')

    @trace
    def graph_sum_C(self, g: int, k: int, root: int = 1, legs: Sequence | None = None) -> CoefficientTable:
        """
        C^(g,k) as a sum over graphs explored from the root leg and over colorings of their edges.

        Without legs, every leg coloring of total degree at most 3g - 3 + k is computed.
        """
        check_topology(g, k)
        if legs is not None:
            legs = tuple(ColoredLeg(*leg) for leg in legs)
            if len(legs) != k:
                raise TopologyError(g, k, f'expected {k} legs, got {len(legs)}')
        top = 3 * g - 3 + k
        palette = [ColoredLeg(l, eps) for l in range(top + 1) for eps in COLORS]
        entries: dict[Key, complex] = defaultdict(complex)
        for graph in enumerate_trivalent_graphs(g, k, root).values():
            for key, value in _colored_sum(self, graph, root, palette, legs, top).items():
                entries[key] += value
        return CoefficientTable(g, k, self.flavor, {key: v for key, v in entries.items() if v != 0})

    # correlators

    def correlator(self, g: int, k: int, vs: Sequence[complex]) -> complex:
        """G^(g,k)(v1, ..., vk) assembled from the coefficient table and the blocks."""
        check_topology(g, k)
        if len(vs) != k:
            raise TopologyError(g, k, f'expected {k} points, got {len(vs)}')
        blocks: dict[tuple[int, ColoredLeg], complex] = {}
        total = 0j
        for key, value in self.table(g, k).entries.items():
            term = value
            for i, leg in enumerate(key):
                if (i, leg) not in blocks:
                    blocks[(i, leg)] = self.block_B(leg.eps, leg.l, vs[i])
                term *= blocks[(i, leg)]
            total += term
        return total


def _relative(series: Laurent, length: int) -> Laurent:
    """Keep length coefficients counted from the valuation."""
    return series.truncate(series.val + length)


def _colored_sum(
    recursion: TopologicalRecursion,
    graph: TrivalentGraph,
    root: int,
    palette: list[ColoredLeg],
    legs: tuple[ColoredLeg, ...] | None,
    top: int,
) -> dict[Key, complex]:
    """Sum over edge colorings of the product of vertex factors, keyed by leg colors."""
    exploration = explore_graph(graph, root)
    pairing = graph.pairing

    edge_of: dict[int, tuple[int, int]] = {}
    for d in range(len(pairing)):
        edge_of[d] = graph.edge(d, pairing[d])

    # loops carry no independent color
    loop_edges = set()
    for v, kind in exploration.classes.items():
        if kind == 'loop':
            _, e1, _ = exploration.slots[v]
            loop_edges.add(edge_of[e1])

    # deepest vertices first, so that vertices are completed as early as possible
    order: list[tuple[int, int]] = []
    for v in reversed(exploration.order):
        for dart in exploration.slots[v]:
            edge = edge_of[dart]
            if edge not in loop_edges and edge not in order:
                order.append(edge)

    completes: dict[int, list[int]] = defaultdict(list)
    for v in exploration.order:
        e0 = exploration.slots[v][0]
        needed = [edge_of[e0]] if exploration.classes[v] == 'loop' else [edge_of[d] for d in exploration.slots[v]]
        completes[max(order.index(edge) for edge in needed)].append(v)

    leg_edges = {edge_of[graph.leg_dart(label)]: label for label in range(1, graph.n_legs + 1)}

    def factor(v: int, colors: dict) -> complex:
        kind = exploration.classes[v]
        e0, e1, e2 = exploration.slots[v]
        if kind == 'terminal' and e2 in exploration.leg_like:
            e1, e2 = e2, e1
        args = tuple(colors[edge_of[d]] for d in (e0, e1, e2)) if kind != 'loop' else (colors[edge_of[e0]],) * 3
        return recursion.vertex_factor(kind, args)

    result: dict[Key, complex] = defaultdict(complex)
    colors: dict[tuple[int, int], ColoredLeg] = {}

    def choices(index: int) -> Iterable[ColoredLeg]:
        edge = order[index]
        if edge in leg_edges and legs is not None:
            return (legs[leg_edges[edge] - 1],)
        return palette

    def visit(index: int, weight: complex, leg_degree: int) -> None:
        if index == len(order):
            key = tuple(colors[edge_of[graph.leg_dart(label)]] for label in range(1, graph.n_legs + 1))
            result[key] += weight
            return
        edge = order[index]
        is_leg = edge in leg_edges
        for color in choices(index):
            degree = leg_degree + color.l if is_leg else leg_degree
            if degree > top:
                continue
            colors[edge] = color
            value = weight
            for v in completes[index]:
                value *= factor(v, colors)
                if value == 0:
                    break
            if value != 0:
                visit(index + 1, value, degree)
        colors.pop(edge, None)

    visit(0, 1 + 0j, 0)
    return result


# critical exponents


def _d_flag(phase: Phase) -> int:
    if phase == 'dense':
        return 1
    if phase == 'dilute':
        return -1
    raise DomainError(f'Critical exponents need a dense or dilute phase, got {phase!r}')


def _xor(a: float, b: float) -> float:
    return 0.0 if a == b else 0.5


def f_table(n: float, phase: Phase, eps: float, sigma: float, sigma_p: float) -> float:
    """Exponent of q carried by a vertex whose edges have colors (eps, sigma, sigma')."""
    b = b_of_n(n)
    d = _d_flag(phase)
    for color in (eps, sigma, sigma_p):
        _check_color(color)
    return b * (_xor(eps, sigma) + _xor(eps, sigma_p)) + (d * b / 2 - 1) * (1 - 2 * eps)


def _beta1(i_half: int) -> int:
    return i_half // 2 + (2 if i_half == 1 else 0)


def _beta2(g: int, k: int, i0: int) -> int:
    return 2 * g - 2 + k // 2 + (i0 + k % 2) // 2


def beta_exponent(n: float, phase: Phase, g: int, k0: int, i_half: int) -> float:
    """Exponent of q in C^(g,k) with k0 legs of color 0 and i_half legs of color 1/2."""
    if k0 < 0 or i_half < 0 or 2 * g - 2 + k0 + i_half < 1:
        raise TopologyError(g, k0 + i_half)
    b = b_of_n(n)
    d = _d_flag(phase)
    beta2 = _beta2(g, k0 + i_half, k0)
    if beta2 <= 0:
        return 0.0
    return _beta1(i_half) * b / 2 + beta2 * (d * b / 2 - 1)


def _vertex_colors(exploration, v: int, colors: dict[int, float]) -> tuple[float, float, float]:
    e0, e1, e2 = exploration.slots[v]
    if exploration.classes[v] == 'loop':
        return (colors[e0],) * 3
    return colors[e0], colors[e1], colors[e2]


def coloring_exponent(n: float, phase: Phase, graph: TrivalentGraph, colors: dict[int, float], root: int = 1) -> float:
    """
    Sum of f over the vertices of a graph whose edges carry colors in {0, 1/2}.

    colors maps every dart to the color of its edge.
    """
    exploration = explore_graph(graph, root)
    return sum(f_table(n, phase, *_vertex_colors(exploration, v, colors)) for v in exploration.order)


def _feasible(exploration, graph: TrivalentGraph, colors: dict[int, float]) -> bool:
    for v, kind in exploration.classes.items():
        e0, e1, e2 = exploration.slots[v]
        if kind == 'terminal':
            leg_slot = e1 if e1 in exploration.leg_like else e2
            if colors[e0] != colors[leg_slot]:
                return False
        elif kind == 'biterminal' and not colors[e0] == colors[e1] == colors[e2]:
            return False
    return True


def minimal_coloring_exponent(n: float, phase: Phase, g: int, leg_colors: Sequence[float]) -> float | None:
    """
    Minimum of the summed vertex exponents over graphs and colorings compatible with the
    vertex classes, for fixed leg colors; None when no coloring survives.
    """
    k = len(leg_colors)
    check_topology(g, k)
    best = None
    for graph in enumerate_trivalent_graphs(g, k).values():
        exploration = explore_graph(graph)
        pairing = graph.pairing
        darts = range(3 * graph.n_vertices)
        internal = sorted({graph.edge(d, pairing[d]) for d in darts if not graph.is_leg(pairing[d])})
        for choice in product(COLORS, repeat=len(internal)):
            colors: dict[int, float] = {}
            for (x, y), color in zip(internal, choice, strict=True):
                colors[x] = colors[y] = color
            for label, color in enumerate(leg_colors, start=1):
                dart = graph.leg_dart(label)
                colors[dart] = colors[pairing[dart]] = _check_color(color)
            if not _feasible(exploration, graph, colors):
                continue
            value = coloring_exponent(n, phase, graph, colors)
            best = value if best is None else min(best, value)
    return best


def _nonzero_configurations(g: int, k: int) -> list[tuple[int, int]]:
    if (g, k) == (0, 3):
        return [(3, 0), (0, 3)]
    if (g, k) == (0, 4):
        return [(4, 0), (2, 2), (0, 4)]
    return [(k - i, i) for i in range(k + 1)]


def G_critical_exponent(n: float, phase: Phase, flavor: Flavor, g: int, k0: int, k_half: int) -> float:
    """
    Exponent of q in G^(g,k) at k0 points tau phi and k_half points 1/2 + tau phi: the smallest
    exponent of C^(g,k) plus b/2 (b = 1/2 for usual maps) per block whose color differs from
    the position of its point.
    """
    _check_flavor(flavor)
    k = k0 + k_half
    check_topology(g, k)
    mismatch = b_of_n(n) / 2 if flavor == 'loop' else 0.25
    best = math.inf
    for i0, i_half in _nonzero_configurations(g, k):
        # j0 points near tau carry color 1/2, j_half points near 1/2 carry color 0
        for j0 in range(k0 + 1):
            j_half = i0 - (k0 - j0)
            if 0 <= j_half <= k_half and k_half - j_half + j0 == i_half:
                best = min(best, beta_exponent(n, phase, g, i0, i_half) + (j0 + j_half) * mismatch)
    return best


def F_critical_exponent(n: float, phase: Phase, flavor: Flavor, g: int, k0: int, k_half: int) -> float:
    """Exponent of q in F^(g,k) with k0 points near the cut and k_half points away from it."""
    _check_flavor(flavor)
    k = k0 + k_half
    if k0 < 0 or k_half < 0 or (2 * g - 2 + k <= 0 and (g, k) != (0, 2)):
        raise TopologyError(g, k)
    b = b_of_n(n)
    d = _d_flag(phase)
    per_half = (b + 1) / 2 if flavor == 'loop' else 0.75
    return (2 * g - 2 + k) * (d * b / 2 - 1) - k / 2 + per_half * k_half


def scaled_coefficient(value: complex, T: float, legs: Sequence) -> complex:
    """C^(g,k) entry with its power of pi/T removed."""
    total = sum(2 * ColoredLeg(*leg).l + 1 for leg in legs)
    return value * (math.pi / T) ** total
