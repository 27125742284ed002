"""
Nesting graphs of loop configurations and the critical exponents of maps realizing them.

Cutting a map along all its loops, erasing the components which are disks and collapsing
chains of cylinders into single edges leaves a connected graph: vertices are the remaining
components, decorated by their genus and by the boundaries and marked points they carry, and
edges are arms of consecutive separating loops.
"""

import math
from collections import Counter, defaultdict
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from itertools import combinations_with_replacement, permutations, product
from threading import Lock
from typing import Literal, NamedTuple

import networkx as nx
from cachetools import LRUCache, cached
from cachetools.keys import hashkey
from sentry_sdk import trace

from loopmaps.context_logger import context_print
from loopmaps.errors import CapExceededError, DomainError, NestingGraphError, TopologyError
from loopmaps.model import Phase, phase_constants
from loopmaps.specfun import b_of_n
from loopmaps.utils import xor_half

MAX_GENUS = 2
MAX_MARKS = 5
# 2g - 2 + k + k' allowed in the edge-multiset generator
_EDGE_GENERATOR_BUDGET = 2

LARGE = 0.0
SMALL = 0.5

Mark = tuple[Literal['b', 'p'], int]


def _frozen(items: Iterable[int]) -> frozenset[int]:
    return items if isinstance(items, frozenset) else frozenset(items)


@dataclass(frozen=True, slots=True)
class NestingVertex:
    genus: int = 0
    boundaries: frozenset[int] = frozenset()
    points: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, 'boundaries', _frozen(self.boundaries))
        object.__setattr__(self, 'points', _frozen(self.points))

    @property
    def n_marks(self) -> int:
        return len(self.boundaries) + len(self.points)

    @property
    def marks(self) -> tuple[Mark, ...]:
        return tuple(sorted([('b', i) for i in self.boundaries] + [('p', i) for i in self.points]))

    @property
    def label(self) -> str:
        return f'h{self.genus}|b{sorted(self.boundaries)}|p{sorted(self.points)}'


class HalfEdge(NamedTuple):
    edge: int
    # 0 or 1: which endpoint of the edge the half-edge is attached to
    side: int


@dataclass(frozen=True, slots=True)
class BoundarySpec:
    """Size of each boundary (0 large, 1/2 small), labelled from 1. Marked points count as small."""

    sizes: tuple[float, ...]
    n_points: int = 0

    def __post_init__(self):
        for eps in self.sizes:
            if eps not in (LARGE, SMALL):
                raise DomainError(f'Boundary size must be 0 (large) or 1/2 (small), got {eps!r}')
        if self.n_points < 0:
            raise DomainError(f'Number of marked points must be non-negative, got {self.n_points!r}')

    @classmethod
    def from_string(cls, text: str, n_points: int = 0) -> 'BoundarySpec':
        """Parse 'LLS': one letter per boundary, L for large and S for small."""
        sizes = []
        for char in text.strip().upper():
            if char not in 'LS':
                raise DomainError(f'Boundary spec letters must be L or S, got {text!r}')
            sizes.append(LARGE if char == 'L' else SMALL)
        return cls(tuple(sizes), n_points)

    @classmethod
    def all_large(cls, k: int, n_points: int = 0) -> 'BoundarySpec':
        return cls((LARGE,) * k, n_points)

    @property
    def n_boundaries(self) -> int:
        return len(self.sizes)

    @property
    def k(self) -> int:
        return len(self.sizes) + self.n_points

    @property
    def k_half(self) -> int:
        return self.sizes.count(SMALL) + self.n_points

    def eps(self, boundary: int) -> float:
        return self.sizes[boundary - 1]

    def __str__(self) -> str:
        return ''.join('S' if eps == SMALL else 'L' for eps in self.sizes) + '•' * self.n_points


class NestingClasses(NamedTuple):
    # V tilde: vertices glued as usual maps
    stable: tuple[int, ...]
    # V_{0,2}: genus 0 leaves carrying a single mark
    leaves: tuple[int, ...]
    large_leaves: tuple[int, ...]
    small_leaves: tuple[int, ...]
    # E_un and E tilde
    leaf_edges: tuple[int, ...]
    inner_edges: tuple[int, ...]
    # e_+(v) for every leaf: the half-edge at the other end of its edge
    leaf_half_edge: dict[int, HalfEdge]
    glue: tuple[HalfEdge, ...]


class ExponentCounts(NamedTuple):
    g: int
    k: int
    k_half: int
    # k^(0,2)_{1/2} and k^(0,2)_0
    k_half_leaves: int
    k_large_leaves: int
    inner_edges: int


@dataclass(frozen=True)
class NestingGraph:
    vertices: tuple[NestingVertex, ...]
    edges: tuple[tuple[int, int], ...] = ()
    # number of separating loops on each edge, 1 when not given
    arm_lengths: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, 'vertices', tuple(self.vertices))
        object.__setattr__(self, 'edges', tuple(tuple(edge) for edge in self.edges))
        if self.arm_lengths is None:
            object.__setattr__(self, 'arm_lengths', (1,) * len(self.edges))

    def degree(self, v: int) -> int:
        return sum((a == v) + (b == v) for a, b in self.edges)

    @property
    def n_boundaries(self) -> int:
        return sum(len(vertex.boundaries) for vertex in self.vertices)

    @property
    def n_points(self) -> int:
        return sum(len(vertex.points) for vertex in self.vertices)

    @property
    def betti(self) -> int:
        return len(self.edges) - len(self.vertices) + 1

    @property
    def genus(self) -> int:
        return self.betti + sum(vertex.genus for vertex in self.vertices)

    def to_networkx(self) -> nx.MultiGraph:
        graph = nx.MultiGraph()
        for i, vertex in enumerate(self.vertices):
            graph.add_node(i, genus=vertex.genus, boundaries=vertex.boundaries, points=vertex.points)
        for e, (a, b) in enumerate(self.edges):
            graph.add_edge(a, b, key=e, length=self.arm_lengths[e])
        return graph

    def describe(self) -> str:
        parts = []
        for i, vertex in enumerate(self.vertices):
            marks = ','.join(f'{kind}{index}' for kind, index in vertex.marks)
            parts.append(f'v{i}(h={vertex.genus};{marks})')
        arms = zip(self.edges, self.arm_lengths, strict=True)
        edges = ' '.join(f'{a}-{b}' + (f'^{P}' if P != 1 else '') for (a, b), P in arms)
        return ' '.join(parts) + (f' | {edges}' if edges else '')

    def violations(self, spec: BoundarySpec | None = None) -> list[str]:
        result = []
        n = len(self.vertices)
        if not n:
            return ['graph has no vertices']
        for i, vertex in enumerate(self.vertices):
            if vertex.genus < 0:
                result.append(f'vertex {i} has negative genus {vertex.genus!r}')
        for e, (a, b) in enumerate(self.edges):
            if not (0 <= a < n and 0 <= b < n):
                result.append(f'edge {e} joins unknown vertices {(a, b)!r}')
        if len(self.arm_lengths) != len(self.edges):
            result.append(f'{len(self.arm_lengths)} arm lengths given for {len(self.edges)} edges')
        for e, length in enumerate(self.arm_lengths):
            if length < 1:
                result.append(f'arm length of edge {e} is {length!r}, must be at least 1')
        if result:
            return result

        if not nx.is_connected(self.to_networkx()):
            result.append('graph is disconnected')

        for kind, attr in (('boundary', 'boundaries'), ('point', 'points')):
            carriers = defaultdict(list)
            for i, vertex in enumerate(self.vertices):
                for label in getattr(vertex, attr):
                    carriers[label].append(i)
            for label, owners in sorted(carriers.items()):
                if len(owners) > 1:
                    result.append(f'{kind} {label} is carried by vertices {owners!r}')
            if sorted(carriers) != list(range(1, len(carriers) + 1)):
                result.append(f'{kind} labels must be 1..{len(carriers)}, got {sorted(carriers)!r}')

        for i, vertex in enumerate(self.vertices):
            d = self.degree(i)
            if not vertex.n_marks and 2 * vertex.genus - 2 + d <= 0:
                result.append(f'unmarked vertex {i} violates 2h - 2 + d > 0 (h={vertex.genus}, d={d})')

        if spec is not None:
            if spec.n_boundaries != self.n_boundaries:
                result.append(f'spec describes {spec.n_boundaries} boundaries, graph carries {self.n_boundaries}')
            if spec.n_points != self.n_points:
                result.append(f'spec describes {spec.n_points} marked points, graph carries {self.n_points}')
        return result

    def validate(self, spec: BoundarySpec | None = None) -> NestingClasses:
        """Check every invariant and compute the vertex and edge classes used by the gluing."""
        if violations := self.violations(spec):
            raise NestingGraphError(violations)
        if spec is None:
            spec = BoundarySpec.all_large(self.n_boundaries, self.n_points)

        incident: dict[int, list[HalfEdge]] = defaultdict(list)
        for e, (a, b) in enumerate(self.edges):
            incident[a].append(HalfEdge(e, 0))
            incident[b].append(HalfEdge(e, 1))

        leaves, large, small = [], [], []
        leaf_half_edge: dict[int, HalfEdge] = {}
        for i, vertex in enumerate(self.vertices):
            half_edges = incident[i]
            if vertex.genus or vertex.n_marks != 1 or len(half_edges) != 1:
                continue
            edge, side = half_edges[0]
            leaves.append(i)
            leaf_half_edge[i] = HalfEdge(edge, 1 - side)
            is_small = bool(vertex.points) or spec.eps(next(iter(vertex.boundaries))) == SMALL
            (small if is_small else large).append(i)

        leaf_set = set(leaves)
        leaf_edges = tuple(e for e, (a, b) in enumerate(self.edges) if a in leaf_set or b in leaf_set)
        inner_edges = tuple(e for e in range(len(self.edges)) if e not in leaf_edges)
        glue = [HalfEdge(e, side) for e in inner_edges for side in (0, 1)]
        glue.extend(leaf_half_edge[v] for v in leaves)
        return NestingClasses(
            stable=tuple(i for i in range(len(self.vertices)) if i not in leaf_set),
            leaves=tuple(leaves),
            large_leaves=tuple(large),
            small_leaves=tuple(small),
            leaf_edges=leaf_edges,
            inner_edges=inner_edges,
            leaf_half_edge=leaf_half_edge,
            glue=tuple(glue),
        )

    def counts(self, spec: BoundarySpec) -> ExponentCounts:
        classes = self.validate(spec)
        return ExponentCounts(
            g=self.genus,
            k=spec.k,
            k_half=spec.k_half,
            k_half_leaves=len(classes.small_leaves),
            k_large_leaves=len(classes.large_leaves),
            inner_edges=len(classes.inner_edges),
        )


# gluing structure


class VertexFactor(NamedTuple):
    vertex: int
    genus: int
    # labelled boundaries and marked points carried by the vertex, then the unlabelled glued ones
    n_marks: int
    n_small: int
    degree: int
    symmetry: int


class GluingStructure(NamedTuple):
    vertex_factors: tuple[VertexFactor, ...]
    # edges carrying a cylinder capped by two annuli
    capped_edges: tuple[int, ...]
    # leaves whose boundary sits on a cylinder capped by one annulus, with their size
    capped_leaves: tuple[tuple[int, float], ...]
    glue: tuple[HalfEdge, ...]


def gluing_structure(graph: NestingGraph, spec: BoundarySpec) -> GluingStructure:
    """Pieces a map realizing the graph decomposes into, and the perimeters summed over when gluing."""
    classes = graph.validate(spec)
    factors = []
    for v in classes.stable:
        vertex = graph.vertices[v]
        small = len(vertex.points) + sum(spec.eps(i) == SMALL for i in vertex.boundaries)
        d = graph.degree(v)
        factors.append(VertexFactor(v, vertex.genus, vertex.n_marks, small, d, math.factorial(d)))
    leaves = tuple((v, SMALL if v in classes.small_leaves else LARGE) for v in classes.leaves)
    return GluingStructure(tuple(factors), classes.inner_edges, leaves, classes.glue)


# exponents


def _check_stable_topology(g: int, k: int) -> None:
    if g < 0 or k < 0 or 2 * g - 2 + k <= 0:
        raise TopologyError(g, k)


def kappa_from_counts(
    n: float, phase: Phase, g: int, k: int, k_half: int, k_half_leaves: int, B: float | None = None
) -> float:
    """Exponent of q in the generating series of maps with a fixed nesting graph (B = b at s = 1)."""
    _check_stable_topology(g, k)
    b, d, _ = phase_constants(n, phase)
    B = b if B is None else B
    return (2 * g - 2 + k) * (d * b / 2 - 1) - k / 2 + 0.75 * k_half + (B / 2 - 0.25) * k_half_leaves


def volume_exponent_from_counts(n: float, phase: Phase, g: int, k: int, k_half: int, k_half_leaves: int) -> float:
    _check_stable_topology(g, k)
    b, d, c = phase_constants(n, phase)
    return -1 + c * ((2 * g - 2 + k) * (1 - d * b / 2) + k_half / 4 + (0.25 - b / 2) * k_half_leaves)


def kappa_exponent(graph: NestingGraph, spec: BoundarySpec, n: float, phase: Phase) -> float:
    counts = graph.counts(spec)
    return kappa_from_counts(n, phase, counts.g, counts.k, counts.k_half, counts.k_half_leaves)


def _edge_weight(s: float | Mapping[int, float], edge: int) -> float:
    if isinstance(s, Mapping):
        return s.get(edge, 1.0)
    return s


def kappa_s_exponent(
    graph: NestingGraph, spec: BoundarySpec, n: float, phase: Phase, s: float | Mapping[int, float] = 1.0
) -> float:
    """
    Exponent of the part of the series singular in the separating-loop weights s(e).

    Equals kappa_exponent + b (|E tilde| + k^(0,2)_0) at s = 1.
    """
    classes = graph.validate(spec)
    counts = graph.counts(spec)
    base = kappa_from_counts(n, phase, counts.g, counts.k, counts.k_half, counts.k_half_leaves, B=0.0)
    total = base + sum(b_of_n(n, _edge_weight(s, e)) for e in classes.inner_edges)
    for v in classes.large_leaves:
        total += b_of_n(n, _edge_weight(s, classes.leaf_half_edge[v].edge))
    for v in classes.small_leaves:
        total += b_of_n(n, _edge_weight(s, classes.leaf_half_edge[v].edge)) / 2
    return total


def kappa_from_factors(graph: NestingGraph, spec: BoundarySpec, n: float, phase: Phase) -> float:
    """kappa summed piece by piece over the gluing: q^(1/2) per glued perimeter, vertex and leaf exponents."""
    _check_stable_topology(graph.genus, spec.k)
    b, d, _ = phase_constants(n, phase)
    structure = gluing_structure(graph, spec)
    total = len(structure.glue) / 2
    for factor in structure.vertex_factors:
        boundaries = factor.n_marks + factor.degree
        total += (2 * factor.genus - 2 + boundaries) * (d * b / 2 - 1) - boundaries / 2 + 0.75 * factor.n_small
    for _, eps in structure.capped_leaves:
        total += b / 2 if eps == SMALL else -0.5
    return total


def volume_exponent(graph: NestingGraph, spec: BoundarySpec, n: float, phase: Phase) -> float:
    """Exponent of V in the number of maps of volume V realizing the graph."""
    counts = graph.counts(spec)
    return volume_exponent_from_counts(n, phase, counts.g, counts.k, counts.k_half, counts.k_half_leaves)


class CylinderExponents(NamedTuple):
    # both boundaries on one vertex, or joined by an arm
    single_vertex: float
    single_edge: float


def cylinder_volume_exponents(spec: BoundarySpec, n: float, phase: Phase) -> CylinderExponents:
    if spec.k != 2:
        raise TopologyError(0, spec.k, 'cylinder exponents need exactly two boundaries')
    b, _, c = phase_constants(n, phase)
    eps = xor_half([*spec.sizes, *(SMALL,) * spec.n_points])
    return CylinderExponents(-1 - c / 2 * eps, -1 - c * b * eps)


class CappedExponents(NamedTuple):
    hat: float
    underline_hat: float
    tilde: float
    underline_tilde: float


def capped_cylinder_exponents(n: float, s: float, eps2: float) -> CappedExponents:
    """Exponents of q for cylinders capped by one annulus (hat) or two (tilde); underline: singular in s."""
    if abs(n * s) >= 2:
        raise DomainError(f'Capped cylinders need |ns| < 2, got ns = {n * s!r}')
    if eps2 not in (LARGE, SMALL):
        raise DomainError(f'Colour must be 0 or 1/2, got {eps2!r}')
    bs = b_of_n(n, s)
    if eps2 == LARGE:
        return CappedExponents(-0.5, bs - 0.5, 0.0, bs)
    return CappedExponents(bs / 2, bs / 2, 0.0, bs)


# enumeration


def _check_caps(g: int, k: int, k_points: int) -> None:
    if g < 0 or k < 0 or k_points < 0 or k + k_points < 1:
        raise TopologyError(g, k + k_points, 'nesting graphs need at least one marked element')
    if g > MAX_GENUS or k + k_points > MAX_MARKS:
        raise CapExceededError(
            f"Nesting graphs are enumerated for g <= {MAX_GENUS} and k + k' <= {MAX_MARKS}, "
            f"got g={g!r}, k + k'={k + k_points!r}"
        )


def _marks(k: int, k_points: int) -> list[Mark]:
    return [('b', i) for i in range(1, k + 1)] + [('p', i) for i in range(1, k_points + 1)]


def _set_partitions(items: Sequence) -> Iterator[list[list]]:
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for partition in _set_partitions(rest):
        yield [[head], *partition]
        for i in range(len(partition)):
            yield [*partition[:i], [head, *partition[i]], *partition[i + 1 :]]


def _vertex(genus: int, marks: Iterable[Mark]) -> NestingVertex:
    marks = tuple(marks)
    return NestingVertex(
        genus,
        frozenset(i for kind, i in marks if kind == 'b'),
        frozenset(i for kind, i in marks if kind == 'p'),
    )


def _compositions(total: int, caps: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """Ways to write total as an ordered sum of len(caps) terms bounded by caps."""
    if not caps:
        if total == 0:
            yield ()
        return
    for first in range(min(total, caps[0]) + 1):
        for rest in _compositions(total - first, caps[1:]):
            yield (first, *rest)


def _multigraphs(degrees: Sequence[int]) -> Iterator[tuple[tuple[int, int], ...]]:
    """Edge lists of the multigraphs with loops realizing a degree sequence (labelled vertices)."""

    def fill(i: int, remaining: list[int]) -> Iterator[list[tuple[int, int]]]:
        if i == len(remaining):
            yield []
            return
        r = remaining[i]
        for loops in range(r // 2 + 1):
            rest = r - 2 * loops
            caps = remaining[i + 1 :]
            for split in _compositions(rest, caps):
                updated = remaining.copy()
                updated[i] = 0
                for j, m in enumerate(split, start=i + 1):
                    updated[j] -= m
                here = [(i, i)] * loops + [(i, j) for j, m in enumerate(split, start=i + 1) for _ in range(m)]
                for tail in fill(i + 1, updated):
                    yield here + tail

    for edges in fill(0, list(degrees)):
        yield tuple(edges)


def _vertex_types(g: int, budget: int, n_marks: int) -> list[tuple[int, int]]:
    """(genus, degree) of a vertex in a graph with several vertices whose excess fits the budget."""
    result = []
    for h in range(g + 1):
        for d in range(1, budget + 3 - 2 * h - n_marks):
            excess = 2 * h - 2 + d + n_marks
            if excess <= budget and (n_marks or excess >= 1):
                result.append((h, d))
    return result


def _fingerprint_graph(graph: NestingGraph) -> nx.Graph:
    simple = nx.Graph()
    for i, vertex in enumerate(graph.vertices):
        simple.add_node(i, label=f'{vertex.label}|d{graph.degree(i)}')
    for (a, b), mult in Counter(tuple(sorted(edge)) for edge in graph.edges).items():
        simple.add_edge(a, b, mult=str(mult))
    return simple


class _IsomorphismClasses:
    """Representatives of graphs up to isomorphisms preserving genus and marks."""

    _node_match = staticmethod(nx.isomorphism.categorical_node_match('label', None))
    _edge_match = staticmethod(nx.isomorphism.categorical_edge_match('mult', None))

    def __init__(self):
        self._buckets: dict[str, list[tuple[nx.Graph, NestingGraph]]] = defaultdict(list)
        self.representatives: list[NestingGraph] = []

    def add(self, graph: NestingGraph) -> bool:
        simple = _fingerprint_graph(graph)
        key = nx.weisfeiler_lehman_graph_hash(simple, node_attr='label', edge_attr='mult')
        bucket = self._buckets[key]
        for other, _ in bucket:
            if nx.is_isomorphic(simple, other, node_match=self._node_match, edge_match=self._edge_match):
                return False
        bucket.append((simple, graph))
        self.representatives.append(graph)
        return True


def _sort_key(graph: NestingGraph) -> tuple:
    return len(graph.vertices), len(graph.edges), graph.describe()


_NESTING_CACHE = LRUCache(maxsize=32)
_NESTING_LOCK = Lock()


@trace
@cached(_NESTING_CACHE, key=lambda g, k, k_points=0: hashkey(g, k, k_points), lock=_NESTING_LOCK)
def enumerate_nesting_graphs(g: int, k: int, k_points: int = 0) -> tuple[NestingGraph, ...]:
    """
    Nesting graphs of genus g with k labelled boundaries and k' labelled marked points, up to
    isomorphisms fixing the marks. Arm lengths are all 1.

    Every vertex has excess 2h - 2 + d + (number of marks) >= 0, at least 1 when unmarked,
    and the excesses add up to 2g - 2 + k + k'. Vertex decorations are chosen under that
    budget, then every multigraph with the resulting degrees is generated.
    """
    _check_caps(g, k, k_points)
    marks = _marks(k, k_points)
    budget = 2 * g - 2 + len(marks)
    classes = _IsomorphismClasses()

    # a single vertex carrying every mark, closed by b_1 loops
    for loops in range(g + 1):
        classes.add(NestingGraph((_vertex(g - loops, marks),), ((0, 0),) * loops))

    unmarked_types = _vertex_types(g, budget, 0)
    for blocks in _set_partitions(marks):
        marked_choices = [_vertex_types(g, budget, len(block)) for block in blocks]
        for marked in product(*marked_choices):
            spent = sum(2 * h - 2 + d + len(block) for (h, d), block in zip(marked, blocks, strict=True))
            if spent > budget or sum(h for h, _ in marked) > g:
                continue
            for n_unmarked in range(budget - spent + 1):
                for unmarked in combinations_with_replacement(unmarked_types, n_unmarked):
                    types = (*marked, *unmarked)
                    if sum(2 * h - 2 + d for h, d in unmarked) != budget - spent:
                        continue
                    if sum(h for h, _ in types) > g or len(types) < 2 or sum(d for _, d in types) % 2:
                        continue
                    vertices = tuple(
                        [_vertex(h, block) for (h, _), block in zip(marked, blocks, strict=True)]
                        + [_vertex(h, ()) for h, _ in unmarked]
                    )
                    for edges in _multigraphs([d for _, d in types]):
                        graph = NestingGraph(vertices, edges)
                        if graph.violations():
                            continue
                        classes.add(graph)

    result = tuple(sorted(classes.representatives, key=_sort_key))
    context_print(f'🕸️ {len(result)} nesting graphs for g={g}, k={k}, k\'={k_points}')
    return result


def canonical_code(graph: NestingGraph) -> tuple:
    """Smallest description over relabellings of the unmarked vertices."""
    marked = [i for i, vertex in enumerate(graph.vertices) if vertex.n_marks]
    unmarked = [i for i, vertex in enumerate(graph.vertices) if not vertex.n_marks]
    best = None
    for order in permutations(unmarked):
        names = {i: ('m', graph.vertices[i].marks) for i in marked}
        names.update({v: ('u', position) for position, v in enumerate(order)})
        genera = tuple(sorted((names[i], vertex.genus) for i, vertex in enumerate(graph.vertices)))
        edges = tuple(sorted(tuple(sorted((names[a], names[b]))) for a, b in graph.edges))
        code = (genera, edges)
        if best is None or code < best:
            best = code
    return best


def _restricted_growth(n_items: int) -> Iterator[tuple[int, ...]]:
    """Block index of each item, blocks numbered in order of first appearance."""

    def grow(prefix: tuple[int, ...], top: int) -> Iterator[tuple[int, ...]]:
        if len(prefix) == n_items:
            yield prefix
            return
        for block in range(top + 2):
            yield from grow((*prefix, block), max(top, block))

    yield from grow((), -1)


@trace
def enumerate_nesting_graphs_by_edges(g: int, k: int, k_points: int = 0) -> tuple[NestingGraph, ...]:
    """
    Same set as enumerate_nesting_graphs, obtained by trying every multiset of edges on every
    decorated vertex set and comparing graphs by an exhaustive canonical code.
    """
    _check_caps(g, k, k_points)
    marks = _marks(k, k_points)
    budget = 2 * g - 2 + len(marks)
    if budget > _EDGE_GENERATOR_BUDGET:
        raise CapExceededError(f"Edge-multiset enumeration needs 2g - 2 + k + k' <= {_EDGE_GENERATOR_BUDGET}")

    seen: dict[tuple, NestingGraph] = {}
    for assignment in _restricted_growth(len(marks)):
        n_marked = max(assignment) + 1
        blocks = [[m for m, a in zip(marks, assignment, strict=True) if a == i] for i in range(n_marked)]
        for n_unmarked in range(max(budget, 0) + 1):
            size = n_marked + n_unmarked
            for genera in product(range(g + 1), repeat=size):
                if sum(genera) > g or list(genera[n_marked:]) != sorted(genera[n_marked:]):
                    continue
                n_edges = g - sum(genera) + size - 1
                vertices = tuple(
                    [_vertex(genera[i], block) for i, block in enumerate(blocks)]
                    + [_vertex(h, ()) for h in genera[n_marked:]]
                )
                pairs = [(a, b) for a in range(size) for b in range(a, size)]
                for edges in combinations_with_replacement(pairs, n_edges):
                    degrees = Counter()
                    for a, b in edges:
                        degrees[a] += 1
                        degrees[b] += 1
                    if size > 1 and any(not degrees[i] for i in range(size)):
                        continue
                    if any(2 * genera[i] - 2 + degrees[i] <= 0 for i in range(n_marked, size)):
                        continue
                    graph = NestingGraph(vertices, edges)
                    if graph.violations():
                        continue
                    seen.setdefault(canonical_code(graph), graph)
    return tuple(sorted(seen.values(), key=_sort_key))
