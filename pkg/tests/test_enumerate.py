import pytest

from loopmaps.enumerate import brute_force_enumerate
from loopmaps.errors import CapExceededError, DomainError
from loopmaps.series import SeriesRing, tutte_disk


@pytest.fixture(scope='module')
def ring() -> SeriesRing:
    return SeriesRing.loop_model(3, refined=True)


class TestEnumerate:
    def test_single_triangle(self, ring):
        u, g, h, n, alpha = (ring.var(name) for name in ('u', 'g', 'h', 'n', 'alpha'))
        assert brute_force_enumerate(ring, 1, 1) == u * u * (g + n * alpha * h)

    def test_trees(self, ring):
        assert brute_force_enumerate(ring, 2, 0) == ring.var('u', 2)
        assert brute_force_enumerate(ring, 0, 3) == ring.var('u')

    @pytest.mark.parametrize('perimeter', [1, 2, 3])
    def test_triangulations(self, ring, perimeter):
        expected = tutte_disk(ring, {3: ring.var('g')}, perimeter)
        assert brute_force_enumerate(ring, perimeter, 3, loops=False) == expected

    @pytest.mark.parametrize(('perimeter', 'max_triangles'), [(1, 3), (2, 2), (3, 1)])
    def test_methods_agree(self, ring, perimeter, max_triangles):
        canonical = brute_force_enumerate(ring, perimeter, max_triangles)
        assert brute_force_enumerate(ring, perimeter, max_triangles, method='matchings') == canonical

    def test_bending(self, ring):
        bent = brute_force_enumerate(ring, 2, 2)
        assert brute_force_enumerate(ring, 2, 2, bending=False) == bent.substitute('alpha', 1)

    def test_pointed(self, ring):
        u, g, h, n, alpha, s = (ring.var(name) for name in ('u', 'g', 'h', 'n', 'alpha', 's'))
        assert brute_force_enumerate(ring, 1, 1, pointed=True) == u * u * (2 * g + n * alpha * h * (1 + s))

    @pytest.mark.parametrize('perimeter', [1, 2])
    def test_pointed_unit_weight(self, ring, perimeter):
        pointed = brute_force_enumerate(ring, perimeter, 3, pointed=True)
        assert pointed.substitute('s', 1) == brute_force_enumerate(ring, perimeter, 3).euler('u')

    def test_limits(self, ring):
        with pytest.raises(CapExceededError):
            brute_force_enumerate(ring, 1, 7)
        with pytest.raises(DomainError):
            brute_force_enumerate(ring, 1, 1, method='bogus')
        with pytest.raises(DomainError):
            brute_force_enumerate(ring, -1, 1)
