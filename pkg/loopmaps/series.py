"""
Exact generating series of disks and cylinders in the O(n) model on triangulations with bending energy.

Series are multivariate polynomials with Fraction coefficients. Variables listed as graded (the
triangle weights g and h) carry degree 1 and everything is truncated at a total graded degree
`cap`; the vertex weight u, the loop weight n, the bending weight alpha and the separating-loop
weight s appear polynomially.

Disks with loops are obtained from usual maps with renormalized face weights: the outermost loops
are cut out together with the ring of triangles they cross, every ring is replaced by a face of
the same outer perimeter, and the inside of every ring is again a disk with loops.
"""

from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from threading import Lock
from typing import NamedTuple

from sentry_sdk import trace

from loopmaps.config import SERIES_ITER_SLACK
from loopmaps.context_logger import context_print
from loopmaps.errors import CapExceededError, ConvergenceError, DomainError

Monomial = tuple[int, ...]
Scalar = int | Fraction

LOOP_VARIABLES = ('u', 'g', 'h', 'n', 'alpha')


@dataclass(frozen=True, slots=True)
class SeriesRing:
    variables: tuple[str, ...]
    graded: frozenset[str]
    cap: int
    # optional caps on the exponent of single variables
    limits: tuple[tuple[str, int], ...] = ()
    mask: tuple[bool, ...] = field(init=False, repr=False, compare=False)
    bounds: tuple[int | None, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'variables', tuple(self.variables))
        object.__setattr__(self, 'graded', frozenset(self.graded))
        object.__setattr__(self, 'limits', tuple(self.limits))
        if len(set(self.variables)) != len(self.variables):
            raise DomainError(f'Series variables must be distinct, got {self.variables!r}')
        if unknown := (self.graded | {name for name, _ in self.limits}) - set(self.variables):
            raise DomainError(f'Unknown series variables {sorted(unknown)!r}')
        if self.cap < 0:
            raise DomainError(f'Degree cap must be non-negative, got {self.cap!r}')
        limits = dict(self.limits)
        object.__setattr__(self, 'mask', tuple(name in self.graded for name in self.variables))
        object.__setattr__(self, 'bounds', tuple(limits.get(name) for name in self.variables))

    @classmethod
    def loop_model(cls, cap: int, *, refined: bool = False) -> 'SeriesRing':
        """Variables of the loop model, with s when separating loops are counted."""
        variables = LOOP_VARIABLES + (('s',) if refined else ())
        return cls(variables, frozenset({'g', 'h'}), cap)

    def index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise DomainError(f'{name!r} is not a variable of {self.variables!r}') from None

    def degree(self, monomial: Monomial) -> int:
        return sum(e for e, graded in zip(monomial, self.mask, strict=True) if graded)

    def admits(self, monomial: Monomial, cap: int | None = None) -> bool:
        if self.degree(monomial) > (self.cap if cap is None else min(cap, self.cap)):
            return False
        return all(bound is None or e <= bound for e, bound in zip(monomial, self.bounds, strict=True))

    def zero(self) -> 'MultiSeries':
        return MultiSeries(self)

    def constant(self, value: Scalar) -> 'MultiSeries':
        return MultiSeries(self, {(0,) * len(self.variables): _exact(value)})

    def one(self) -> 'MultiSeries':
        return self.constant(1)

    def var(self, name: str, power: int = 1) -> 'MultiSeries':
        exps = [0] * len(self.variables)
        exps[self.index(name)] = power
        return MultiSeries(self, {tuple(exps): Fraction(1)})

    def format(self, monomial: Monomial) -> str:
        parts = [name if e == 1 else f'{name}^{e}' for name, e in zip(self.variables, monomial, strict=True) if e]
        return '*'.join(parts) or '1'


def _exact(value) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, int | Fraction):
        raise DomainError(f'Series coefficients must be exact rationals, got {value!r}')
    return Fraction(value)


class TermDiff(NamedTuple):
    monomial: str
    left: Fraction
    right: Fraction

    @property
    def delta(self) -> Fraction:
        return self.left - self.right


class MultiSeries:
    """Truncated multivariate series with exact rational coefficients."""

    __slots__ = ('ring', 'terms')

    def __init__(self, ring: SeriesRing, terms: Mapping[Monomial, Scalar] | None = None):
        self.ring = ring
        self.terms: dict[Monomial, Fraction] = {}
        for monomial, coeff in (terms or {}).items():
            if coeff and ring.admits(monomial):
                self.terms[tuple(monomial)] = Fraction(coeff)

    def _coerce(self, other) -> 'MultiSeries':
        if isinstance(other, MultiSeries):
            if other.ring != self.ring:
                raise DomainError('Series belong to different rings')
            return other
        return self.ring.constant(other)

    def __add__(self, other) -> 'MultiSeries':
        other = self._coerce(other)
        terms = dict(self.terms)
        for monomial, coeff in other.terms.items():
            terms[monomial] = terms.get(monomial, 0) + coeff
        return MultiSeries(self.ring, terms)

    __radd__ = __add__

    def __neg__(self) -> 'MultiSeries':
        return MultiSeries(self.ring, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> 'MultiSeries':
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> 'MultiSeries':
        return self._coerce(other) - self

    def __mul__(self, other) -> 'MultiSeries':
        if isinstance(other, MultiSeries):
            return self.mul(other)
        factor = _exact(other)
        return MultiSeries(self.ring, {m: c * factor for m, c in self.terms.items()})

    __rmul__ = __mul__

    def mul(self, other: 'MultiSeries', cap: int | None = None) -> 'MultiSeries':
        """Product truncated at graded degree cap (the ring cap by default)."""
        other = self._coerce(other)
        cap = self.ring.cap if cap is None else min(cap, self.ring.cap)
        if cap < 0:
            return self.ring.zero()
        degree = self.ring.degree
        right = [(m, c, degree(m)) for m, c in other.terms.items()]
        terms: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            d1 = degree(m1)
            if d1 > cap:
                continue
            for m2, c2, d2 in right:
                if d1 + d2 > cap:
                    continue
                monomial = tuple(a + b for a, b in zip(m1, m2, strict=True))
                terms[monomial] = terms.get(monomial, 0) + c1 * c2
        return MultiSeries(self.ring, terms)

    def truncate(self, cap: int) -> 'MultiSeries':
        degree = self.ring.degree
        return MultiSeries(self.ring, {m: c for m, c in self.terms.items() if degree(m) <= cap})

    def diff(self, name: str) -> 'MultiSeries':
        i = self.ring.index(name)
        terms = {}
        for m, c in self.terms.items():
            if m[i]:
                terms[(*m[:i], m[i] - 1, *m[i + 1 :])] = c * m[i]
        return MultiSeries(self.ring, terms)

    def euler(self, name: str) -> 'MultiSeries':
        """name * d/dname."""
        i = self.ring.index(name)
        return MultiSeries(self.ring, {m: c * m[i] for m, c in self.terms.items()})

    def substitute(self, name: str, value: Scalar) -> 'MultiSeries':
        i = self.ring.index(name)
        value = _exact(value)
        terms: dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            monomial = (*m[:i], 0, *m[i + 1 :])
            terms[monomial] = terms.get(monomial, 0) + c * value ** m[i]
        return MultiSeries(self.ring, terms)

    def part(self, name: str, power: int) -> 'MultiSeries':
        """Coefficient of name^power, as a series in the other variables."""
        i = self.ring.index(name)
        return MultiSeries(self.ring, {(*m[:i], 0, *m[i + 1 :]): c for m, c in self.terms.items() if m[i] == power})

    def graded_part(self, degree: int) -> 'MultiSeries':
        return MultiSeries(self.ring, {m: c for m, c in self.terms.items() if self.ring.degree(m) == degree})

    def coefficient(self, **powers: int) -> Fraction:
        monomial = [0] * len(self.ring.variables)
        for name, power in powers.items():
            monomial[self.ring.index(name)] = power
        return self.terms.get(tuple(monomial), Fraction(0))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def min_degree(self) -> int | None:
        return min((self.ring.degree(m) for m in self.terms), default=None)

    def is_nonnegative(self) -> bool:
        return all(c >= 0 for c in self.terms.values())

    def compare(self, other: 'MultiSeries') -> list[TermDiff]:
        """Monomials on which the two series differ, in graded-lex order."""
        other = self._coerce(other)
        result = []
        for monomial in self._ordered(set(self.terms) | set(other.terms)):
            left = self.terms.get(monomial, Fraction(0))
            right = other.terms.get(monomial, Fraction(0))
            if left != right:
                result.append(TermDiff(self.ring.format(monomial), left, right))
        return result

    def _ordered(self, monomials: Iterable[Monomial]) -> list[Monomial]:
        return sorted(monomials, key=lambda m: (self.ring.degree(m), sum(m), m))

    def to_json(self) -> dict:
        return {
            'vars': list(self.ring.variables),
            'terms': [
                {'exps': list(m), 'num': self.terms[m].numerator, 'den': self.terms[m].denominator}
                for m in self._ordered(self.terms)
            ],
        }

    @classmethod
    def from_json(cls, ring: SeriesRing, data: Mapping) -> 'MultiSeries':
        if list(data['vars']) != list(ring.variables):
            raise DomainError(f'Series variables {data["vars"]!r} do not match {ring.variables!r}')
        return cls(ring, {tuple(t['exps']): Fraction(t['num'], t['den']) for t in data['terms']})

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiSeries):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    __hash__ = None

    def __repr__(self) -> str:
        if not self.terms:
            return '0'
        parts = []
        for m in self._ordered(self.terms):
            c = self.terms[m]
            name = self.ring.format(m)
            parts.append(str(c) if name == '1' else (name if c == 1 else f'{c}*{name}'))
        return ' + '.join(parts)


def _parameter(ring: SeriesRing, name: str, value: Scalar | None) -> MultiSeries:
    """The ring variable when value is None, else the exact constant."""
    if value is None:
        return ring.var(name)
    return ring.constant(value)


def _accumulate(total: dict[Monomial, Fraction], series: MultiSeries) -> None:
    for m, c in series.terms.items():
        total[m] = total.get(m, 0) + c


# annuli


@dataclass(frozen=True)
class AnnulusTable:
    """Rings of triangles crossed by one loop, by outer and inner perimeter."""

    ring: SeriesRing
    R: Mapping[tuple[int, int], MultiSeries]

    def r(self, outer: int, inner: int) -> MultiSeries:
        """Both boundaries unrooted."""
        return self.R.get((outer, inner)) or self.ring.zero()

    def a(self, outer: int, inner: int) -> MultiSeries:
        """Outer boundary rooted."""
        return self.r(outer, inner) * outer


def _bivariate_mul(left: dict, right: dict, top: int) -> dict:
    result: dict[tuple[int, int], MultiSeries] = {}
    for (i1, j1), c1 in left.items():
        for (i2, j2), c2 in right.items():
            key = (i1 + i2, j1 + j2)
            if key[0] > top or key[1] > top:
                continue
            product = c1 * c2
            if not product.is_zero:
                result[key] = result[key] + product if key in result else product
    return result


@trace
def annulus_coeffs(
    ring: SeriesRing, n: Scalar | None = None, alpha: Scalar | None = None, max_perimeter: int | None = None
) -> AnnulusTable:
    """
    Expansion of R(x, z) = n ln 1/(1 - alpha h (x + z) - (1 - alpha^2) h^2 x z).

    x marks triangles with their free side on the outer boundary, z on the inner one; alpha
    counts consecutive triangles turning the same way.
    """
    if 'h' not in ring.graded:
        raise DomainError('The visited-triangle weight h must be a graded variable')
    top = ring.cap if max_perimeter is None else max_perimeter
    h = ring.var('h')
    a = _parameter(ring, 'alpha', alpha)
    weight = {(1, 0): a * h, (0, 1): a * h, (1, 1): (1 - a * a) * h * h}
    weight = {key: value for key, value in weight.items() if not value.is_zero}

    power = {(0, 0): ring.one()}
    table: dict[tuple[int, int], dict[Monomial, Fraction]] = {}
    for m in range(1, ring.cap + 1):
        power = _bivariate_mul(power, weight, top)
        for key, coeff in power.items():
            _accumulate(table.setdefault(key, {}), coeff * Fraction(1, m))

    loop = _parameter(ring, 'n', n)
    R = {}
    for key, terms in table.items():
        value = loop * MultiSeries(ring, terms)
        if not value.is_zero:
            R[key] = value
    return AnnulusTable(ring, R)


# usual maps


class _Budget(NamedTuple):
    """Graded degree kept at each perimeter: the full cap up to top, then one less every stride."""

    cap: int
    top: int
    stride: int = 1

    def __call__(self, perimeter: int) -> int:
        excess = max(0, perimeter - self.top)
        return self.cap - -(-excess // self.stride)

    @property
    def max_perimeter(self) -> int:
        return self.top + self.stride * self.cap


def _stride(weights: Mapping[int, MultiSeries]) -> int:
    """Perimeter gained per unit of graded degree by the heaviest face."""
    stride = 1
    for k, weight in weights.items():
        if weight.is_zero:
            continue
        if k < 1:
            raise DomainError(f'Face degrees must be positive, got {k!r}')
        degree = weight.min_degree
        if not degree:
            raise DomainError(f'Weight of faces of degree {k} must have positive graded degree')
        stride = max(stride, -(-(k - 2) // degree))
    return stride


def _sweep(values: dict[int, MultiSeries], update: Callable[[int], MultiSeries], keys: Iterable[int]) -> int:
    changed = 0
    for key in keys:
        new = update(key)
        if new != values[key]:
            values[key] = new
            changed += 1
    return changed


def _iterate(what: str, ring: SeriesRing, step: Callable[[], int]) -> int:
    """Repeat Gauss-Seidel sweeps until nothing changes; every sweep fixes one more graded order."""
    limit = ring.cap + SERIES_ITER_SLACK
    changed = 0
    for sweep in range(1, limit + 1):
        changed = step()
        if not changed:
            return sweep
    raise ConvergenceError(what, changed, limit)


def _tutte_rhs(
    ring: SeriesRing, weights: Mapping[int, MultiSeries], disks: Mapping[int, MultiSeries], p: int, cap: int
) -> MultiSeries:
    """Root-edge decomposition: an inner face of degree k behind the root edge, or two disks."""
    total: dict[Monomial, Fraction] = {}
    for k, weight in weights.items():
        other = disks.get(p + k - 2)
        if other is not None:
            _accumulate(total, weight.mul(other, cap))
    for p1 in range(p - 1):
        _accumulate(total, disks[p1].mul(disks[p - 2 - p1], cap))
    return MultiSeries(ring, total)


@trace
def tutte_disks(
    ring: SeriesRing, weights: Mapping[int, MultiSeries], top: int, vertex: MultiSeries | None = None
) -> dict[int, MultiSeries]:
    """Disks F_0..F_top of usual maps with weight weights[k] per inner face of degree k."""
    budget = _Budget(ring.cap, top, _stride(weights))
    disks = {0: ring.var('u') if vertex is None else vertex}
    disks.update((p, ring.zero()) for p in range(1, budget.max_perimeter + 1))
    perimeters = range(1, budget.max_perimeter + 1)
    sweeps = _iterate(
        'Tutte recursion',
        ring,
        lambda: _sweep(disks, lambda p: _tutte_rhs(ring, weights, disks, p, budget(p)), perimeters),
    )
    context_print(f'🧮 Tutte recursion stable after {sweeps} sweeps (cap={ring.cap}, top={top})')
    return {p: disks[p] for p in range(top + 1)}


def tutte_disk(ring: SeriesRing, weights: Mapping[int, MultiSeries], perimeter: int) -> MultiSeries:
    return tutte_disks(ring, weights, perimeter)[perimeter]


# maps with loops


class NestedLoopSeries:
    """
    Disks of the loop model as usual maps evaluated at the renormalized face weights
    G_l = g_l + sum_{l'} A_{l,l'} F_{l'}, together with the derived pointed disks and cylinders.

    Perimeters up to `top` are exact to the full cap.
    """

    def __init__(self, ring: SeriesRing, top: int, n: Scalar | None = None, alpha: Scalar | None = None):
        for name in ('g', 'h'):
            if name not in ring.graded:
                raise DomainError(f'{name!r} must be a graded variable of the ring')
        if top < 1:
            raise DomainError(f'Top perimeter must be at least 1, got {top!r}')
        self.ring = ring
        self.top = top
        # disks and gasket derivatives are kept exact to twice the window, so that a gasket with
        # two boundaries inside the window is exact to the full cap
        self._budget = _Budget(ring.cap, 2 * top)
        self.annuli = annulus_coeffs(ring, n, alpha, max_perimeter=self._budget.max_perimeter)
        self._max_face = max(3, ring.cap)
        self._lock = Lock()
        self._cache: dict[tuple, dict[int, MultiSeries]] = {}
        self.weights: dict[int, MultiSeries] = {}
        self.disks: dict[int, MultiSeries] = {}
        self._solve()

    @trace
    def _solve(self) -> None:
        ring = self.ring
        cap = ring.cap
        g = ring.var('g')
        perimeters = range(1, self._budget.max_perimeter + 1)
        self.disks = {0: ring.var('u'), **{p: ring.zero() for p in perimeters}}
        self.weights = {k: ring.zero() for k in range(1, self._max_face + 1)}

        def renormalized(k: int) -> MultiSeries:
            total: dict[Monomial, Fraction] = dict(g.terms) if k == 3 else {}
            for inner in range(cap - k + 1):
                annulus = self.annuli.a(k, inner)
                if not annulus.is_zero:
                    _accumulate(total, annulus.mul(self.disks[inner]))
            return MultiSeries(ring, total)

        def disk(p: int) -> MultiSeries:
            return _tutte_rhs(ring, self.weights, self.disks, p, self._budget(p))

        def step() -> int:
            changed = _sweep(self.weights, renormalized, list(self.weights))
            return changed + _sweep(self.disks, disk, perimeters)

        sweeps = _iterate('Renormalized face weights', ring, step)
        context_print(f'🔁 Renormalized face weights stable after {sweeps} sweeps (cap={cap}, top={self.top})')

    def _cached(self, key: tuple, compute: Callable[[], dict[int, MultiSeries]]) -> dict[int, MultiSeries]:
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        value = compute()
        with self._lock:
            return self._cache.setdefault(key, value)

    def _check_window(self, *perimeters: int) -> None:
        for p in perimeters:
            if not 1 <= p <= self.top:
                raise CapExceededError(f'Perimeter {p!r} is outside the computed window 1..{self.top}')

    def on_disk(self, perimeter: int) -> MultiSeries:
        if perimeter == 0:
            return self.disks[0]
        self._check_window(perimeter)
        return self.disks[perimeter]

    def _gasket_linear(
        self, what: str, initial: MultiSeries, source: Callable[[int, int], MultiSeries], caps, last: int
    ) -> dict[int, MultiSeries]:
        """X_p = source(p) + sum_k G_k X_{p+k-2} + 2 sum F_{p1} X_{p2}: a derivation applied to the gasket."""
        ring = self.ring
        values = {0: initial, **{p: ring.zero() for p in range(1, last + 1)}}

        def rhs(p: int) -> MultiSeries:
            cap = caps(p)
            total: dict[Monomial, Fraction] = dict(source(p, cap).terms)
            for k, weight in self.weights.items():
                other = values.get(p + k - 2)
                if other is not None:
                    _accumulate(total, weight.mul(other, cap))
            for p1 in range(p - 1):
                _accumulate(total, self.disks[p1].mul(values[p - 2 - p1], cap) * 2)
            return MultiSeries(ring, total)

        _iterate(what, ring, lambda: _sweep(values, rhs, range(1, last + 1)))
        return values

    def _pointed_gaskets(self) -> dict[int, MultiSeries]:
        def compute():
            zero = self.ring.zero()
            return self._gasket_linear(
                'Pointed gasket',
                self.disks[0],
                lambda p, cap: zero,
                self._budget,
                self._budget.max_perimeter,
            )

        return self._cached(('pointed',), compute)

    def pointed_gasket(self, perimeter: int) -> MultiSeries:
        """Disks pointed in the gasket: u d/du taken before evaluating the renormalized weights."""
        self._check_window(perimeter)
        return self._pointed_gaskets()[perimeter]

    def _face_derivative(self, face: int) -> dict[int, MultiSeries]:
        """d F_p / d G_face at fixed renormalized weights, exact to cap - max(0, p + face - 2 top)."""

        def compute():
            cap, threshold = self.ring.cap, 2 * self.top

            def caps(p: int) -> int:
                return cap - max(0, p + face - threshold)

            last = threshold + cap - face
            return self._gasket_linear(
                f'Face derivative {face}',
                self.ring.zero(),
                lambda p, c: self.disks[p + face - 2].truncate(c),
                caps,
                last,
            )

        return self._cached(('face', face), compute)

    def _gasket_cylinder(self, p: int, face: int) -> MultiSeries:
        value = self._face_derivative(face).get(p)
        return self.ring.zero() if value is None else value * face

    def usual_cylinder(self, first: int, second: int) -> MultiSeries:
        """Cylinders with no loop separating the two boundaries (second boundary marked by l d/dG_l)."""
        self._check_window(first, second)
        return self._gasket_cylinder(first, second)

    def _glued(
        self, what: str, base: Callable[[int, int], MultiSeries], caps, s: MultiSeries, first_inner: int
    ) -> dict[int, MultiSeries]:
        """X_p = base(p) + s sum_{l >= 1, l' >= first_inner} F^(2)_{p,l} R_{l,l'} X_{l'}."""
        ring = self.ring
        last = self.top + ring.cap
        values = {p: ring.zero() for p in range(1, last + 1)}
        if first_inner == 0:
            values[0] = self.disks[0]

        def rhs(p: int) -> MultiSeries:
            cap = caps(p)
            total: dict[Monomial, Fraction] = dict(base(p, cap).terms)
            for face in range(1, cap + 1):
                gasket = self._gasket_cylinder(p, face)
                if gasket.is_zero:
                    continue
                for inner in range(first_inner, cap - face + 1):
                    annulus = self.annuli.r(face, inner)
                    if annulus.is_zero or inner not in values:
                        continue
                    _accumulate(total, s.mul(gasket.mul(annulus, cap).mul(values[inner], cap), cap))
            return MultiSeries(ring, total)

        _iterate(what, ring, lambda: _sweep(values, rhs, range(1, last + 1)))
        return values

    def _refined_pointed(self, s: Scalar | None) -> dict[int, MultiSeries]:
        def compute():
            weight = _parameter(self.ring, 's', s)
            pointed = self._pointed_gaskets()
            return self._glued(
                'Refined pointed disk',
                lambda p, cap: pointed[p].truncate(cap),
                lambda p: self.ring.cap - max(0, p - self.top),
                weight,
                first_inner=0,
            )

        return self._cached(('refined-pointed', s), compute)

    def refined_pointed_disk(self, perimeter: int, s: Scalar | None = None) -> MultiSeries:
        """Pointed disks with weight s per loop separating the point from the boundary (symbolic s if None)."""
        self._check_window(perimeter)
        return self._refined_pointed(s)[perimeter]

    def _cylinder_column(self, second: int, s: Scalar | None) -> dict[int, MultiSeries]:
        def compute():
            weight = _parameter(self.ring, 's', s)
            offset = max(0, second - self.top)
            return self._glued(
                f'Refined cylinder column {second}',
                lambda p, cap: self._gasket_cylinder(p, second).truncate(cap),
                lambda p: self.ring.cap - max(0, p - self.top) - offset,
                weight,
                first_inner=1,
            )

        return self._cached(('cylinder', second, s), compute)

    def refined_cylinder(self, first: int, second: int, s: Scalar | None = None) -> MultiSeries:
        """Cylinders with weight s per loop separating the two boundaries."""
        self._check_window(first, second)
        return self._cylinder_column(second, s)[first]

    def capped_cylinder(self, first: int, second: int, s: Scalar | None = None) -> MultiSeries:
        """One ring with unrooted outer boundary of perimeter first glued on a cylinder."""
        self._check_window(first, second)
        weight = _parameter(self.ring, 's', s)
        column = self._cylinder_column(second, s)
        total = self.ring.zero()
        for inner in range(1, self.ring.cap - first + 1):
            total += self.annuli.r(first, inner).mul(column.get(inner, self.ring.zero()))
        return weight * total

    def doubly_capped_cylinder(self, first: int, second: int, s: Scalar | None = None) -> MultiSeries:
        """Cylinders capped by a ring on each side, plus a single ring."""
        self._check_window(first, second)
        weight = _parameter(self.ring, 's', s)
        cap = self.ring.cap
        total = self.annuli.r(first, second) * weight
        for b in range(1, cap - second + 1):
            right = self.annuli.r(b, second)
            if right.is_zero:
                continue
            column = self._cylinder_column(b, s)
            for a in range(1, cap - first - b - second + 1):
                left = self.annuli.r(first, a)
                if not left.is_zero and a in column:
                    total += weight * weight * left.mul(column[a]).mul(right)
        return total


@trace
def renormalized_weights(
    ring: SeriesRing, top: int, n: Scalar | None = None, alpha: Scalar | None = None
) -> NestedLoopSeries:
    """Solve the renormalized face weights; n and alpha stay symbolic unless given exactly."""
    return NestedLoopSeries(ring, top, n, alpha)
