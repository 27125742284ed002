import math
from collections import defaultdict

import pytest

from loopmaps.errors import CapExceededError, DomainError, NestingGraphError, TopologyError
from loopmaps.nesting import (
    BoundarySpec,
    HalfEdge,
    NestingGraph,
    NestingVertex,
    canonical_code,
    capped_cylinder_exponents,
    cylinder_volume_exponents,
    enumerate_nesting_graphs,
    enumerate_nesting_graphs_by_edges,
    kappa_exponent,
    kappa_from_counts,
    kappa_from_factors,
    kappa_s_exponent,
    volume_exponent,
)
from loopmaps.specfun import b_of_n

B = 1 / 3

TORUS = NestingGraph((NestingVertex(1, {1}),))
CYLINDER_ARM = NestingGraph((NestingVertex(0, {1}), NestingVertex(0, {2})), ((0, 1),))
# boundary 1 alone on a genus 0 leaf, boundaries 2 and 3 together
PANTS_LEAF = NestingGraph((NestingVertex(0, {2, 3}), NestingVertex(0, {1})), ((0, 1),))


class TestBoundarySpec:
    def test_parse(self):
        spec = BoundarySpec.from_string('lls')
        assert spec.sizes == (0, 0, 0.5)
        assert spec.k_half == 1
        assert str(spec) == 'LLS'

    def test_points_are_small(self):
        spec = BoundarySpec.from_string('L', n_points=2)
        assert spec.k == 3
        assert spec.k_half == 2

    def test_invalid(self):
        with pytest.raises(DomainError):
            BoundarySpec.from_string('LX')
        with pytest.raises(DomainError):
            BoundarySpec((0.25,))


class TestValidate:
    def test_single_vertex(self):
        classes = TORUS.validate()
        assert TORUS.genus == 1
        assert classes.stable == (0,)
        assert classes.leaves == classes.leaf_edges == classes.inner_edges == classes.glue == ()

    def test_cylinder_arm(self):
        classes = CYLINDER_ARM.validate(BoundarySpec.from_string('SL'))
        assert classes.stable == ()
        assert classes.leaves == (0, 1)
        assert classes.small_leaves == (0,)
        assert classes.large_leaves == (1,)
        assert classes.leaf_edges == (0,)
        assert classes.inner_edges == ()
        assert set(classes.glue) == {HalfEdge(0, 0), HalfEdge(0, 1)}

    def test_self_loop(self):
        graph = NestingGraph((NestingVertex(0, {1}),), ((0, 0),))
        classes = graph.validate()
        assert graph.genus == 1
        assert classes.leaves == ()
        assert classes.inner_edges == (0,)

    def test_unstable_leaf(self):
        graph = NestingGraph((NestingVertex(0, {1}), NestingVertex()), ((0, 1),))
        with pytest.raises(NestingGraphError) as info:
            graph.validate()
        assert len(info.value.violations) == 1
        assert 'unmarked vertex 1' in info.value.violations[0]

    def test_violations_reported_individually(self):
        graph = NestingGraph((NestingVertex(0, {1}), NestingVertex(0, {1}), NestingVertex()))
        with pytest.raises(NestingGraphError) as info:
            graph.validate()
        assert len(info.value.violations) == 3
        assert info.value.to_dict()['violations'] == list(info.value.violations)

    def test_structural_violations(self):
        graph = NestingGraph((NestingVertex(-1, {1}), NestingVertex(0, {2})), ((0, 1),), arm_lengths=(0,))
        assert len(graph.violations()) == 2

    def test_spec_mismatch(self):
        with pytest.raises(NestingGraphError):
            TORUS.validate(BoundarySpec.from_string('LL'))

    @pytest.mark.parametrize(('g', 'k'), [(0, 4), (1, 2)])
    def test_glue_slots(self, g, k):
        """Glued perimeters are the half-edges at the vertices glued as usual maps."""
        for graph in enumerate_nesting_graphs(g, k):
            classes = graph.validate()
            assert sum(graph.degree(v) for v in classes.stable) == len(classes.glue)


class TestEnumeration:
    @pytest.mark.parametrize(
        ('g', 'k', 'k_points', 'count'),
        [(0, 1, 0, 1), (0, 2, 0, 2), (0, 1, 1, 2), (0, 3, 0, 8), (0, 2, 1, 8), (1, 1, 0, 4)],
    )
    def test_counts(self, g, k, k_points, count):
        assert len(enumerate_nesting_graphs(g, k, k_points)) == count

    def test_cylinder_graphs(self):
        shapes = sorted((len(graph.vertices), len(graph.edges)) for graph in enumerate_nesting_graphs(0, 2))
        assert shapes == [(1, 0), (2, 1)]

    @pytest.mark.parametrize(
        ('g', 'k', 'k_points'),
        [
            (0, 3, 0),
            (1, 1, 0),
            (0, 2, 1),
            pytest.param(1, 2, 0, marks=pytest.mark.slow),
            pytest.param(0, 4, 0, marks=pytest.mark.slow),
            pytest.param(0, 3, 1, marks=pytest.mark.slow),
        ],
    )
    def test_generators_agree(self, g, k, k_points):
        graphs = enumerate_nesting_graphs(g, k, k_points)
        codes = {canonical_code(graph) for graph in graphs}
        assert len(codes) == len(graphs)
        assert codes == {canonical_code(graph) for graph in enumerate_nesting_graphs_by_edges(g, k, k_points)}

    @pytest.mark.parametrize(('g', 'k'), [(0, 4), (1, 2), (2, 1)])
    def test_valid(self, g, k):
        for graph in enumerate_nesting_graphs(g, k):
            graph.validate()
            assert graph.genus == g

    def test_caps(self):
        with pytest.raises(CapExceededError):
            enumerate_nesting_graphs(3, 1)
        with pytest.raises(CapExceededError):
            enumerate_nesting_graphs(0, 4, 2)
        with pytest.raises(CapExceededError):
            enumerate_nesting_graphs_by_edges(0, 5)
        with pytest.raises(TopologyError):
            enumerate_nesting_graphs(1, 0)


class TestExponents:
    def test_kappa_torus(self):
        assert kappa_exponent(TORUS, BoundarySpec.from_string('L'), 1.0, 'dense') == pytest.approx(-4 / 3)

    def test_kappa_small_leaf(self):
        spec = BoundarySpec.from_string('SLL')
        assert kappa_exponent(PANTS_LEAF, spec, 1.0, 'dense') == pytest.approx(-5 / 3)
        assert volume_exponent(PANTS_LEAF, spec, 1.0, 'dense') == pytest.approx(0.75)

    def test_volume_all_large(self):
        graph = NestingGraph((NestingVertex(0, {1, 2, 3}),))
        assert volume_exponent(graph, BoundarySpec.from_string('LLL'), 1.0, 'dense') == pytest.approx(0.25)

    def test_topology(self):
        with pytest.raises(TopologyError):
            kappa_exponent(CYLINDER_ARM, BoundarySpec.from_string('LL'), 1.0, 'dense')
        with pytest.raises(DomainError):
            kappa_exponent(TORUS, BoundarySpec.from_string('L'), 1.0, 'off-critical')

    @pytest.mark.parametrize('text', ['LLLL', 'SLLL', 'SSLL', 'SSSS'])
    @pytest.mark.parametrize('phase', ['dense', 'dilute'])
    def test_gluing_bookkeeping(self, text, phase):
        """Summing the exponents of the glued pieces gives the closed form."""
        spec = BoundarySpec.from_string(text)
        for graph in enumerate_nesting_graphs(0, 4):
            assert kappa_from_factors(graph, spec, 1.0, phase) == pytest.approx(
                kappa_exponent(graph, spec, 1.0, phase), abs=1e-12
            )

    def test_gluing_bookkeeping_with_handles(self):
        spec = BoundarySpec.from_string('SL')
        for graph in enumerate_nesting_graphs(1, 2):
            assert kappa_from_factors(graph, spec, 1.0, 'dense') == pytest.approx(
                kappa_exponent(graph, spec, 1.0, 'dense'), abs=1e-12
            )

    def test_kappa_s_at_unit_weight(self):
        spec = BoundarySpec.from_string('SSLL')
        for graph in enumerate_nesting_graphs(0, 4):
            counts = graph.counts(spec)
            expected = kappa_exponent(graph, spec, 1.0, 'dense') + B * (counts.inner_edges + counts.k_large_leaves)
            assert kappa_s_exponent(graph, spec, 1.0, 'dense') == pytest.approx(expected, abs=1e-12)
            if not counts.inner_edges and not counts.k_large_leaves:
                assert kappa_s_exponent(graph, spec, 1.0, 'dense') == pytest.approx(
                    kappa_exponent(graph, spec, 1.0, 'dense')
                )

    def test_kappa_s_weights(self):
        spec = BoundarySpec.from_string('SLL')
        base = kappa_from_counts(1.0, 'dense', 0, 3, 1, 1, B=0.0)
        assert kappa_s_exponent(PANTS_LEAF, spec, 1.0, 'dense', {0: 0.5}) == pytest.approx(base + b_of_n(1.0, 0.5) / 2)

    def test_leaf_counts(self):
        spec = BoundarySpec.from_string('SSLL')
        by_leaves = defaultdict(list)
        for graph in enumerate_nesting_graphs(0, 4):
            by_leaves[graph.counts(spec).k_half_leaves].append(graph)
        assert sorted(by_leaves) == [0, 1, 2]

    def test_small_leaves_dominate(self):
        """All small boundaries alone on genus 0 leaves maximize the volume exponent."""
        spec = BoundarySpec.from_string('SSSS')
        graphs = enumerate_nesting_graphs(0, 4)
        exponents = [volume_exponent(graph, spec, 1.0, 'dense') for graph in graphs]
        best = max(exponents)
        winners = [graph for graph, value in zip(graphs, exponents, strict=True) if value == pytest.approx(best)]
        assert winners
        assert all(graph.counts(spec).k_half_leaves == 4 for graph in winners)
        assert all(graph in winners for graph in graphs if graph.counts(spec).k_half_leaves == 4)


class TestCylinders:
    def test_volume_exponents(self):
        assert cylinder_volume_exponents(BoundarySpec.from_string('SS'), 1.0, 'dense') == pytest.approx((-1, -1))
        assert cylinder_volume_exponents(BoundarySpec.from_string('SL'), 1.0, 'dense') == pytest.approx(
            (-1.375, -1.25)
        )
        assert cylinder_volume_exponents(BoundarySpec.from_string('LL'), 1.0, 'dense').single_edge == -1
        assert cylinder_volume_exponents(BoundarySpec.from_string('L', 1), 1.0, 'dilute') == pytest.approx(
            (-1.25, -1 - B / 2)
        )
        with pytest.raises(TopologyError):
            cylinder_volume_exponents(BoundarySpec.from_string('LLL'), 1.0, 'dense')

    def test_capped(self):
        assert capped_cylinder_exponents(1.0, 1.0, 0) == pytest.approx((-0.5, B - 0.5, 0, B))
        assert capped_cylinder_exponents(1.0, 1.0, 0.5) == pytest.approx((B / 2, B / 2, 0, B))
        s = 0.5
        assert capped_cylinder_exponents(1.0, s, 0.5).hat == pytest.approx(math.acos(0.25) / (2 * math.pi))
        with pytest.raises(DomainError):
            capped_cylinder_exponents(1.0, 2.0, 0)
