import pytest

from loopmaps.errors import TopologyError
from loopmaps.graphs import (
    TrivalentGraph,
    build_graphs_recursively,
    check_topology,
    enumerate_trivalent_graphs,
    explore_graph,
    exploration_word,
    graph_count_by_recursion,
)


class TestTrivalentGraph:
    def test_pairing_must_be_an_involution(self):
        with pytest.raises(TopologyError):
            TrivalentGraph(1, 3, (3, 4, 5, 0, 1, 1))

    def test_dart_count(self):
        with pytest.raises(TopologyError):
            TrivalentGraph(1, 3, (3, 4, 5, 0, 1))

    def test_genus_of_a_loop(self):
        graph = TrivalentGraph(1, 1, (3, 2, 1, 0))
        assert graph.genus == 1
        assert graph.n_edges == 2

    def test_cyclic_order(self):
        assert TrivalentGraph.next_dart(5) == 3
        assert TrivalentGraph.prev_dart(3) == 5
        assert TrivalentGraph.vertex(4) == 1

    @pytest.mark.parametrize(('g', 'k'), [(0, 2), (0, 1), (1, 0), (-1, 5)])
    def test_unstable_topologies(self, g, k):
        with pytest.raises(TopologyError):
            check_topology(g, k)


class TestExploration:
    def test_disk_with_three_legs_is_biterminal(self):
        (graph,) = enumerate_trivalent_graphs(0, 3).values()
        exploration = explore_graph(graph)
        assert list(exploration.classes.values()) == ['biterminal']

    def test_torus_with_one_leg_has_a_loop(self):
        (graph,) = enumerate_trivalent_graphs(1, 1).values()
        exploration = explore_graph(graph)
        assert list(exploration.classes.values()) == ['loop']

    def test_four_legs(self):
        graphs = enumerate_trivalent_graphs(0, 4)
        for graph in graphs.values():
            exploration = explore_graph(graph)
            assert graph.n_vertices == 2
            assert graph.n_edges == 5
            assert sorted(exploration.classes.values()) == ['biterminal', 'terminal']

    def test_exploration_is_a_bijection(self):
        for graph in enumerate_trivalent_graphs(0, 5).values():
            exploration = explore_graph(graph)
            assert len(exploration.edges) == len(set(exploration.edges)) == graph.n_edges
            assert len(exploration.nodes) == len(set(exploration.nodes)) == graph.n_vertices + graph.n_legs
            assert exploration.nodes[0] == ('leg', 1)

    def test_first_vertex_owns_the_initial_leg(self):
        for graph in enumerate_trivalent_graphs(1, 2).values():
            exploration = explore_graph(graph, initial_leg=2)
            first = exploration.order[0]
            assert graph.pairing[exploration.slots[first][0]] == graph.leg_dart(2)

    def test_disconnected_graph(self):
        # a vertex with a loop and leg 1, and a separate vertex carrying legs 2, 3, 4
        graph = TrivalentGraph(2, 4, (6, 2, 1, 7, 8, 9, 0, 3, 4, 5))
        with pytest.raises(TopologyError):
            explore_graph(graph)


class TestEnumeration:
    @pytest.mark.parametrize(('g', 'k', 'count'), [(0, 3, 1), (1, 1, 1), (0, 4, 6), (1, 2, 3), (0, 5, 54)])
    def test_counts(self, g, k, count):
        assert len(enumerate_trivalent_graphs(g, k)) == count
        assert graph_count_by_recursion(g, k) == count

    @pytest.mark.parametrize(('g', 'k'), [(0, 4), (1, 2), (2, 1), (0, 5), (1, 3)])
    def test_recursive_builder_agrees(self, g, k):
        """Both generators produce the same classes, each exactly once."""
        built = build_graphs_recursively(g, k)
        words = [exploration_word(graph, explore_graph(graph)) for graph in built]
        assert len(words) == len(set(words)) == graph_count_by_recursion(g, k)
        assert set(words) == set(enumerate_trivalent_graphs(g, k))

    @pytest.mark.parametrize(('g', 'k'), [(0, 3), (1, 1), (0, 4), (1, 2), (2, 1), (0, 5)])
    def test_euler_counts(self, g, k):
        for graph in enumerate_trivalent_graphs(g, k).values():
            assert graph.genus == g
            assert graph.n_vertices == 2 * g - 2 + k
            assert graph.n_edges == 3 * g - 3 + 2 * k

    def test_count_does_not_depend_on_initial_leg(self):
        assert len(enumerate_trivalent_graphs(0, 5, initial_leg=3)) == len(enumerate_trivalent_graphs(0, 5))

    def test_unstable(self):
        with pytest.raises(TopologyError):
            enumerate_trivalent_graphs(0, 2)
