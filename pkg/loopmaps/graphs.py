"""
Trivalent graphs with cyclically ordered vertices and labelled legs, their exploration
from an initial leg and the classification of vertices that drives the graph sums.

A graph is stored as a fixed-point free involution on darts. Trivalent vertex v owns darts
3v, 3v + 1, 3v + 2 in cyclic order; leg i (counted from 1) owns dart 3V + i - 1.
"""

from collections.abc import Iterator
from dataclasses import dataclass
from itertools import combinations
from threading import Lock
from typing import Literal, NamedTuple

from cachetools import LRUCache, cached
from cachetools.keys import hashkey
from sentry_sdk import trace

from loopmaps.errors import TopologyError

VertexClass = Literal['prime', 'terminal', 'biterminal', 'loop']

# slot position reported for the two leg slots of a bi-terminal vertex, whose order is immaterial
_ANY_SLOT = 3


def check_topology(g: int, k: int) -> None:
    if g < 0 or k < 1 or 2 * g - 2 + k <= 0:
        raise TopologyError(g, k)


@dataclass(frozen=True, slots=True)
class TrivalentGraph:
    n_vertices: int
    n_legs: int
    pairing: tuple[int, ...]

    def __post_init__(self):
        darts = 3 * self.n_vertices + self.n_legs
        if len(self.pairing) != darts:
            raise TopologyError(self.genus, self.n_legs, f'expected {darts} darts, got {len(self.pairing)}')
        for d, e in enumerate(self.pairing):
            if d == e or self.pairing[e] != d:
                raise TopologyError(self.genus, self.n_legs, f'dart {d} is not properly paired')

    @property
    def n_edges(self) -> int:
        return (3 * self.n_vertices + self.n_legs) // 2

    @property
    def genus(self) -> int:
        """First Betti number of the connected graph."""
        return self.n_edges - self.n_vertices - self.n_legs + 1

    def is_leg(self, dart: int) -> bool:
        return dart >= 3 * self.n_vertices

    def leg_label(self, dart: int) -> int:
        return dart - 3 * self.n_vertices + 1

    def leg_dart(self, label: int) -> int:
        if not 1 <= label <= self.n_legs:
            raise TopologyError(self.genus, self.n_legs, f'no leg {label!r}')
        return 3 * self.n_vertices + label - 1

    @staticmethod
    def vertex(dart: int) -> int:
        return dart // 3

    @staticmethod
    def next_dart(dart: int) -> int:
        return 3 * (dart // 3) + (dart + 1) % 3

    @staticmethod
    def prev_dart(dart: int) -> int:
        return 3 * (dart // 3) + (dart + 2) % 3

    @staticmethod
    def edge(dart: int, other: int) -> tuple[int, int]:
        return (dart, other) if dart < other else (other, dart)


class Node(NamedTuple):
    kind: Literal['leg', 'vertex']
    index: int


class Exploration(NamedTuple):
    # phi: edges in the order they are visited, as sorted dart pairs
    edges: tuple[tuple[int, int], ...]
    # eta: legs and vertices in the order they are visited
    nodes: tuple[Node, ...]
    # per vertex, the darts of e0, e1, e2
    slots: dict[int, tuple[int, int, int]]
    classes: dict[int, VertexClass]
    # darts which count as legs at their vertex: real legs and edges closing a cycle
    leg_like: frozenset[int]
    initial_leg: int

    @property
    def order(self) -> tuple[int, ...]:
        return tuple(node.index for node in self.nodes if node.kind == 'vertex')


def explore_graph(graph: TrivalentGraph, initial_leg: int = 1) -> Exploration:
    """
    Visit every edge starting from the initial leg.

    At a vertex the next edge in the cyclic order after the most recently visited one is
    preferred, then the previous one. Reaching a leg, or a vertex already visited, sends the
    exploration back to the most recently visited vertex which still has unexplored edges.
    """
    pairing = graph.pairing
    root = graph.leg_dart(initial_leg)
    first = pairing[root]
    if graph.is_leg(first):
        raise TopologyError(graph.genus, graph.n_legs, 'graph is disconnected')

    edges: list[tuple[int, int]] = [graph.edge(root, first)]
    explored = {edges[0]}
    nodes = [Node('leg', initial_leg)]
    entry: dict[int, int] = {}
    latest: dict[int, int] = {}
    leg_like: set[int] = set()
    stack: list[int] = []

    def discover(dart: int) -> None:
        v = graph.vertex(dart)
        entry[v] = latest[v] = dart
        nodes.append(Node('vertex', v))
        stack.append(v)

    def pending(v: int) -> list[int]:
        d = latest[v]
        return [x for x in (graph.next_dart(d), graph.prev_dart(d)) if graph.edge(x, pairing[x]) not in explored]

    discover(first)
    while stack:
        current = stack[-1]
        candidates = pending(current)
        if not candidates:
            stack.pop()
            continue
        x = candidates[0]
        y = pairing[x]
        edge = graph.edge(x, y)
        edges.append(edge)
        explored.add(edge)
        latest[current] = x
        if graph.is_leg(y):
            nodes.append(Node('leg', graph.leg_label(y)))
            leg_like.add(x)
        elif graph.vertex(y) in entry:
            # closes a cycle, seen as a leg from the side it is traversed from
            latest[graph.vertex(y)] = y
            if graph.vertex(y) != current:
                leg_like.add(x)
        else:
            discover(y)

    if len(edges) != graph.n_edges or len(nodes) != graph.n_vertices + graph.n_legs:
        raise TopologyError(graph.genus, graph.n_legs, 'graph is disconnected')

    slots = {}
    classes: dict[int, VertexClass] = {}
    for v, e0 in entry.items():
        e1, e2 = graph.next_dart(e0), graph.prev_dart(e0)
        slots[v] = (e0, e1, e2)
        if pairing[e1] == e2:
            classes[v] = 'loop'
            continue
        legs = (e1 in leg_like) + (e2 in leg_like)
        classes[v] = ('prime', 'terminal', 'biterminal')[legs]

    return Exploration(
        edges=tuple(edges),
        nodes=tuple(nodes),
        slots=slots,
        classes=classes,
        leg_like=frozenset(leg_like),
        initial_leg=initial_leg,
    )


def exploration_word(graph: TrivalentGraph, exploration: Exploration) -> tuple:
    """
    Description of the graph in exploration order, identical for isomorphic graphs.

    The two leg slots of a bi-terminal vertex are listed as a sorted pair.
    """
    position = {v: i for i, v in enumerate(exploration.order)}

    def slot_of(dart: int) -> int:
        v = graph.vertex(dart)
        slot = exploration.slots[v].index(dart)
        if slot and exploration.classes[v] == 'biterminal':
            return _ANY_SLOT
        return slot

    def target(dart: int) -> tuple:
        other = graph.pairing[dart]
        if graph.is_leg(other):
            return ('leg', graph.leg_label(other))
        if graph.vertex(other) == graph.vertex(dart):
            return ('loop',)
        return ('vertex', position[graph.vertex(other)], slot_of(other))

    word = []
    for v in exploration.order:
        _, e1, e2 = exploration.slots[v]
        pair = (target(e1), target(e2))
        if exploration.classes[v] == 'biterminal':
            pair = tuple(sorted(pair))
        word.append(pair)
    return tuple(word)


def _matchings(darts: list[int]) -> Iterator[list[tuple[int, int]]]:
    if not darts:
        yield []
        return
    head, rest = darts[0], darts[1:]
    for i, other in enumerate(rest):
        for tail in _matchings(rest[:i] + rest[i + 1 :]):
            yield [(head, other), *tail]


def _graph_from_matching(n_vertices: int, n_legs: int, matching) -> TrivalentGraph:
    pairing = [0] * (3 * n_vertices + n_legs)
    for a, b in matching:
        pairing[a] = b
        pairing[b] = a
    return TrivalentGraph(n_vertices, n_legs, tuple(pairing))


_GRAPH_CACHE = LRUCache(maxsize=64)
_GRAPH_LOCK = Lock()


@trace
@cached(_GRAPH_CACHE, key=lambda g, k, initial_leg=1: hashkey('matchings', g, k, initial_leg), lock=_GRAPH_LOCK)
def enumerate_trivalent_graphs(g: int, k: int, initial_leg: int = 1) -> dict[tuple, TrivalentGraph]:
    """
    Connected graphs with first Betti number g and k legs, up to isomorphisms preserving leg
    labels and cyclic orders (the cyclic order at bi-terminal vertices being immaterial),
    keyed by their exploration word from the initial leg.
    """
    check_topology(g, k)
    n_vertices = 2 * g - 2 + k
    n_darts = 3 * n_vertices + k
    root = 3 * n_vertices + initial_leg - 1
    # relabelling vertices and rotating slots brings the initial leg onto dart 0
    others = [d for d in range(1, n_darts) if d != root]
    graphs: dict[tuple, TrivalentGraph] = {}
    for matching in _matchings(others):
        graph = _graph_from_matching(n_vertices, k, [(0, root), *matching])
        try:
            exploration = explore_graph(graph, initial_leg)
        except TopologyError:
            continue
        graphs.setdefault(exploration_word(graph, exploration), graph)
    return graphs


def _stable(g: int, k: int) -> bool:
    return 2 * g - 2 + k > 0


# A partial graph is a list of vertices, each a list of three slot targets:
# ('leg', name) for a leg, ('slot', vertex, slot) for an edge.
_Partial = list[list[tuple]]


def _shifted(graph: _Partial, offset: int) -> _Partial:
    return [[t if t[0] == 'leg' else ('slot', t[1] + offset, t[2]) for t in vertex] for vertex in graph]


def _connect(graph: _Partial, slot: tuple[int, int], name) -> None:
    for w, vertex in enumerate(graph):
        for t, target in enumerate(vertex):
            if target == ('leg', name):
                graph[slot[0]][slot[1]] = ('slot', w, t)
                vertex[t] = ('slot', *slot)
                return
    raise KeyError(name)


def _assemble(g: int, names: tuple) -> list[_Partial]:
    root, rest = names[0], names[1:]
    if (g, len(names)) == (0, 3):
        return [[[('leg', root), ('leg', rest[0]), ('leg', rest[1])]]]
    if (g, len(names)) == (1, 1):
        return [[[('leg', root), ('slot', 0, 2), ('slot', 0, 1)]]]

    results = []

    def glue(parts: list[_Partial], slot_names: tuple, legs: tuple) -> _Partial:
        graph = [[('leg', root), *legs]]
        for part in parts:
            graph.extend(_shifted(part, len(graph)))
        for slot, name in zip((1, 2), slot_names, strict=True):
            if name is not None:
                _connect(graph, (0, slot), name)
        return graph

    # both edges of the root vertex lead into one graph
    if g >= 1:
        a, b = object(), object()
        for part in _assemble(g - 1, (a, b, *rest)):
            results.append(glue([part], (a, b), (None, None)))

    # the root vertex separates the graph in two
    positions = range(len(rest))
    for h in range(g + 1):
        for size in range(len(rest) + 1):
            if not _stable(h, size + 1) or not _stable(g - h, len(rest) - size + 1):
                continue
            for chosen in combinations(positions, size):
                left = tuple(rest[i] for i in chosen)
                right = tuple(rest[i] for i in positions if i not in chosen)
                a, b = object(), object()
                for part_a in _assemble(h, (a, *left)):
                    for part_b in _assemble(g - h, (b, *right)):
                        results.append(glue([part_a, part_b], (a, b), (None, None)))

    # the root vertex carries a second leg on either side
    for i, leg in enumerate(rest):
        others = rest[:i] + rest[i + 1 :]
        a = object()
        for part in _assemble(g, (a, *others)):
            results.append(glue([part], (None, a), (('leg', leg), None)))
            results.append(glue([part], (a, None), (None, ('leg', leg))))
    return results


def _to_graph(graph: _Partial, k: int) -> TrivalentGraph:
    n_vertices = len(graph)
    pairing = [0] * (3 * n_vertices + k)
    for v, vertex in enumerate(graph):
        for s, target in enumerate(vertex):
            dart = 3 * v + s
            if target[0] == 'leg':
                other = 3 * n_vertices + target[1] - 1
                pairing[other] = dart
            else:
                other = 3 * target[1] + target[2]
            pairing[dart] = other
    return TrivalentGraph(n_vertices, k, tuple(pairing))


@trace
def build_graphs_recursively(g: int, k: int) -> list[TrivalentGraph]:
    """
    Graphs of type (g, k) assembled by the decomposition at the vertex carrying leg 1: a
    non-separating vertex, a vertex splitting the graph in two, or a vertex carrying a second leg.
    """
    check_topology(g, k)
    return [_to_graph(graph, k) for graph in _assemble(g, tuple(range(1, k + 1)))]


def graph_count_by_recursion(g: int, k: int) -> int:
    """Number of graphs of type (g, k) predicted by the decomposition at leg 1."""
    check_topology(g, k)
    if (g, k) in ((0, 3), (1, 1)):
        return 1
    total = graph_count_by_recursion(g - 1, k + 1) if g >= 1 else 0
    rest = k - 1
    for h in range(g + 1):
        for size in range(rest + 1):
            if _stable(h, size + 1) and _stable(g - h, rest - size + 1):
                ways = len(list(combinations(range(rest), size)))
                total += ways * graph_count_by_recursion(h, size + 1) * graph_count_by_recursion(g - h, rest - size + 1)
    if rest:
        total += 2 * rest * graph_count_by_recursion(g, k - 1)
    return total
