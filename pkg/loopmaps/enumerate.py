"""
Brute-force enumeration of small planar triangulations with a boundary, decorated by loops.

A map is a gluing of the sides of a boundary polygon and of N triangles. Sides are numbered
boundary first (0..l-1), then triangle t owns sides l + 3t + (0, 1, 2); side i runs from corner i
to the next corner of the same polygon. Gluing two sides identifies their corners reversing the
orientation.
"""

import math
from collections import Counter
from collections.abc import Iterator
from itertools import product
from typing import Literal, NamedTuple

from networkx.utils import UnionFind
from sentry_sdk import trace

from loopmaps.config import ENUMERATE_MAX_TRIANGLES
from loopmaps.context_logger import context_print
from loopmaps.errors import CapExceededError, DomainError
from loopmaps.series import MultiSeries, SeriesRing

Method = Literal['canonical', 'matchings']
Gluing = tuple[int, ...]


class _Layout(NamedTuple):
    perimeter: int
    triangles: int

    @property
    def sides(self) -> int:
        return self.perimeter + 3 * self.triangles

    def start(self, side: int) -> int:
        return side

    def end(self, side: int) -> int:
        if side < self.perimeter:
            return (side + 1) % self.perimeter
        base = side - (side - self.perimeter) % 3
        return base + (side - base + 1) % 3

    def triangle(self, side: int) -> tuple[int, int]:
        """Triangle and local side index of a triangle side."""
        return divmod(side - self.perimeter, 3)

    def corners(self, gluing: Gluing) -> UnionFind:
        vertices = UnionFind(range(self.sides))
        for a, b in enumerate(gluing):
            if a < b:
                vertices.union(self.start(a), self.end(b))
                vertices.union(self.end(a), self.start(b))
        return vertices


class _Loop(NamedTuple):
    turns: tuple[int, ...]
    crossed: frozenset[int]

    @property
    def bends(self) -> int:
        """Pairs of consecutive triangles turning the same way, counted cyclically."""
        turns = self.turns
        return sum(turns[i] == turns[(i + 1) % len(turns)] for i in range(len(turns)))


def _canonical_gluings(layout: _Layout) -> Iterator[Gluing]:
    """
    Every rooted gluing exactly once: the smallest free side is glued either to side 0 of a new
    triangle or to a later free side, so triangles are labeled in order of discovery.
    """
    partner = [-1] * layout.sides

    def extend(used: int) -> Iterator[Gluing]:
        size = layout.perimeter + 3 * used
        first = next((i for i in range(size) if partner[i] < 0), None)
        if first is None:
            if used == layout.triangles:
                yield tuple(partner)
            return
        options = [size] if used < layout.triangles else []
        options.extend(other for other in range(first + 1, size) if partner[other] < 0)
        for other in options:
            partner[first], partner[other] = other, first
            yield from extend(used + 1 if other == size else used)
            partner[first] = partner[other] = -1

    yield from extend(0)


def _all_matchings(layout: _Layout) -> Iterator[Gluing]:
    """Every perfect matching of labeled sides that forms a connected surface."""
    partner = [-1] * layout.sides

    def extend() -> Iterator[Gluing]:
        first = next((i for i in range(layout.sides) if partner[i] < 0), None)
        if first is None:
            yield tuple(partner)
            return
        for other in range(first + 1, layout.sides):
            if partner[other] < 0:
                partner[first], partner[other] = other, first
                yield from extend()
                partner[first] = partner[other] = -1

    def piece(side: int) -> int:
        return 0 if side < layout.perimeter else 1 + layout.triangle(side)[0]

    for gluing in extend():
        pieces = UnionFind(range(layout.triangles + 1))
        for a, b in enumerate(gluing):
            pieces.union(piece(a), piece(b))
        if len(list(pieces.to_sets())) == 1:
            yield gluing


def _loop_configurations(layout: _Layout, gluing: Gluing, loops: bool) -> Iterator[tuple[int | None, ...]]:
    """Per triangle the local side not crossed by a loop, None for triangles without loop."""
    choices = (None, 0, 1, 2) if loops else (None,)
    for free in product(choices, repeat=layout.triangles):

        def crossed(side: int) -> bool:
            if side < layout.perimeter:
                return False
            t, j = layout.triangle(side)
            return free[t] is not None and free[t] != j

        if all(crossed(a) == crossed(b) for a, b in enumerate(gluing) if a < b):
            yield free


def _trace_loops(layout: _Layout, gluing: Gluing, free: tuple[int | None, ...]) -> list[_Loop]:
    result = []
    seen: set[int] = set()
    for start, f in enumerate(free):
        if f is None or start in seen:
            continue
        entry0 = (f + 1) % 3
        t, entry = start, entry0
        turns, crossed = [], set()
        while True:
            seen.add(t)
            exit_ = 3 - free[t] - entry
            turns.append(1 if exit_ == (entry + 1) % 3 else -1)
            side = layout.perimeter + 3 * t + exit_
            crossed.update((layout.perimeter + 3 * t + entry, side))
            t, entry = layout.triangle(gluing[side])
            if t == start and entry == entry0:
                break
        result.append(_Loop(tuple(turns), frozenset(crossed)))
    return result


def _separations(layout: _Layout, gluing: Gluing, vertices: UnionFind, loops: list[_Loop]) -> Counter[int]:
    """Number of vertices by the number of loops separating them from the boundary."""
    roots = {vertices[c] for c in range(layout.sides)}
    depth = Counter({root: 0 for root in roots})
    for loop in loops:
        sides = layout.corners(gluing)
        for a in range(layout.sides):
            if a not in loop.crossed:
                sides.union(layout.start(a), layout.end(a))
        outside = sides[0]
        for root in roots:
            if sides[root] != outside:
                depth[root] += 1
    return Counter(depth.values())


def _weights(
    ring: SeriesRing, layout: _Layout, gluing: Gluing, *, loops: bool, bending: bool, pointed: bool
) -> Iterator[dict[tuple[int, ...], int]]:
    vertices = layout.corners(gluing)
    n_vertices = len(list(vertices.to_sets()))
    if 2 * (n_vertices + layout.triangles + 1) != layout.sides + 4:
        return
    for free in _loop_configurations(layout, gluing, loops):
        traced = _trace_loops(layout, gluing, free)
        visited = sum(f is not None for f in free)
        powers = {
            'u': n_vertices,
            'g': layout.triangles - visited,
            'h': visited,
            'n': len(traced),
            'alpha': sum(loop.bends for loop in traced) if bending else 0,
        }
        depths = _separations(layout, gluing, vertices, traced) if pointed else Counter({0: 1})
        for depth, count in depths.items():
            exps = [0] * len(ring.variables)
            for name, power in {**powers, 's': depth}.items():
                if power:
                    exps[ring.index(name)] = power
            yield {tuple(exps): count}


@trace
def brute_force_enumerate(
    ring: SeriesRing,
    perimeter: int,
    max_triangles: int,
    *,
    loops: bool = True,
    bending: bool = True,
    pointed: bool = False,
    method: Method = 'canonical',
) -> MultiSeries:
    """
    Disks of perimeter l with up to max_triangles triangles, weighted u^V g^(empty) h^(visited) n^L alpha^B;
    pointed disks carry an extra s per loop separating the point from the boundary.
    """
    if perimeter < 0:
        raise DomainError(f'Perimeter must be non-negative, got {perimeter!r}')
    if max_triangles > ENUMERATE_MAX_TRIANGLES:
        raise CapExceededError(f'Enumeration is limited to {ENUMERATE_MAX_TRIANGLES} triangles, got {max_triangles!r}')
    if method not in ('canonical', 'matchings'):
        raise DomainError(f'Unknown enumeration method {method!r}')
    if perimeter == 0:
        return ring.var('u')

    terms: Counter[tuple[int, ...]] = Counter()
    n_maps = 0
    for triangles in range(perimeter % 2, max_triangles + 1, 2):
        layout = _Layout(perimeter, triangles)
        gluings = _canonical_gluings(layout) if method == 'canonical' else _all_matchings(layout)
        found: Counter[tuple[int, ...]] = Counter()
        for gluing in gluings:
            for weight in _weights(ring, layout, gluing, loops=loops, bending=bending, pointed=pointed):
                found.update(weight)
        if method == 'matchings':
            labels = math.factorial(triangles) * 3**triangles
            for monomial, count in found.items():
                if count % labels:
                    raise RuntimeError(f'Labeled count is not a multiple of the labelings {count=} {labels=}')
                found[monomial] = count // labels
        n_maps += sum(found.values())
        terms.update(found)

    context_print(f'🗺️ Enumerated {n_maps} decorated maps (perimeter={perimeter}, N<={max_triangles}, {method})')
    return MultiSeries(ring, terms)
