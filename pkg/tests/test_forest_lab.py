from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from minoramp.errors import (
    EmptyForestError,
    NoCentralEdgeError,
    NotAForestError,
    NotATreeError,
    PreconditionError,
)
from minoramp.forest_lab import (
    Forest,
    StarMode,
    UnionFind,
    bad_pair_counts,
    bad_pairs,
    centroids,
    edge_contraction_loss,
    is_claw_matching,
    is_clean,
    is_k_bounded,
    is_mate_free,
    is_shrubbery,
    is_small_forest,
    is_star_matching,
    peripheral_piece,
    star_shape,
)
from minoramp.generators import gen_gnp, gen_random_tree
from minoramp.graph_core import Bipartition, Graph, contract, contraction_loss
from minoramp.oracles import brute_bad_pairs, brute_centroids, brute_contraction_loss, brute_edge_loss, random_forest

from .strategies import PROPERTY_SETTINGS, hosts_with_forests, trees


def star_host() -> tuple[Graph, Bipartition]:
    # B = {0, 1}; A = {2, 3, 4, 5}
    G = Graph.from_edges(6, [(0, 2), (0, 3), (1, 4), (1, 5), (2, 4)])
    return G, Bipartition.of([2, 3, 4, 5], [0, 1])


def test_union_find():
    uf = UnionFind(5)
    assert uf.unite(0, 1)
    assert uf.unite(1, 2)
    assert not uf.unite(0, 2)
    assert uf.find(2) == uf.find(0)
    assert uf.find(3) != uf.find(0)


class TestForest:
    def test_cycle_rejected(self):
        G = Graph.complete(3)
        F = Forest(G, [(0, 1), (1, 2)])
        with pytest.raises(NotAForestError):
            F.add_edge(0, 2)

    def test_non_host_edge_rejected(self):
        G = Graph.from_edges(3, [(0, 1)])
        with pytest.raises(NotAForestError):
            Forest(G, [(1, 2)])

    def test_remove_edge_splits_component(self):
        G = Graph.complete(4)
        F = Forest(G, [(0, 1), (1, 2), (2, 3)])
        assert F.components() == [frozenset({0, 1, 2, 3})]
        F.remove_edge(1, 2)
        assert F.components() == [frozenset({0, 1}), frozenset({2, 3})]
        assert F.v == 4
        F.add_edge(0, 3)
        assert F.same_component(1, 2)

    def test_remove_vertices(self):
        G = Graph.complete(4)
        F = Forest(G, [(0, 1), (1, 2)])
        F.remove_vertices([1])
        assert F.vertices == frozenset({0, 2})
        assert F.e == 0
        assert len(F.components()) == 2

    def test_toggle_is_symmetric_difference(self):
        G = Graph.complete(4)
        F = Forest(G, [(0, 1)])
        F.toggle([(0, 1), (1, 2), (2, 3)])
        assert F.edges() == [(1, 2), (2, 3)]
        assert 0 in F

    def test_component_of_unknown_vertex(self):
        F = Forest(Graph.complete(3))
        with pytest.raises(PreconditionError):
            F.component_of(1)

    def test_copy_is_independent(self):
        G = Graph.complete(4)
        F = Forest(G, [(0, 1)])
        clone = F.copy()
        clone.add_edge(1, 2)
        assert F.edges() == [(0, 1)]
        assert clone.edges() == [(0, 1), (1, 2)]

    @PROPERTY_SETTINGS
    @given(hosts_with_forests())
    def test_components_match_networkx(self, host_forest):
        G, F = host_forest
        expected = nx.Graph()
        expected.add_nodes_from(F.vertices)
        expected.add_edges_from(F.edges())
        assert nx.is_forest(expected) or expected.number_of_nodes() == 0
        assert sorted(map(sorted, F.components())) == sorted(map(sorted, nx.connected_components(expected)))


class TestStars:
    def test_star_shape(self):
        G, part = star_host()
        F = Forest(G, [(0, 2), (0, 3), (1, 4)])
        shapes = {min(c): star_shape(F, c, part) for c in F.components()}
        assert shapes[0].center == 0 and shapes[0].leaves == frozenset({2, 3})
        assert shapes[1].center == 1 and shapes[1].leaves == frozenset({4})

    def test_star_matching_modes(self):
        G, part = star_host()
        F = Forest(G, [(0, 2), (0, 3), (1, 4), (1, 5)])
        assert is_star_matching(F, part, 2, StarMode.EXACTLY)
        assert is_star_matching(F, part, 3)
        assert not is_star_matching(F, part, 3, StarMode.EXACTLY)
        assert not is_star_matching(F, part, 1)

    def test_claw_matching_needs_induced_stars(self):
        G = Graph.from_edges(5, [(0, 1), (0, 2), (1, 2), (3, 4)])
        part = Bipartition.of([1, 2, 4], [0, 3])
        F = Forest(G, [(0, 1), (0, 2)])
        assert is_star_matching(F, part, 2)
        assert not is_claw_matching(G, F, part, 2)

    def test_edge_inside_a_is_not_a_claw(self):
        G = Graph.from_edges(3, [(1, 2)])
        part = Bipartition.of([1, 2], [0])
        F = Forest(G, [(1, 2)])
        assert not is_claw_matching(G, F, part, 2)


class TestPredicates:
    def test_empty_forest_raises(self):
        F = Forest(Graph.complete(3))
        with pytest.raises(EmptyForestError, match="forest is empty"):
            is_shrubbery(F, 2)
        with pytest.raises(EmptyForestError):
            is_clean(Graph.complete(3), F, Fraction(1), Fraction(1))

    def test_shrubbery_bounds(self):
        G = Graph.complete(8)
        F = Forest(G, [(0, 1), (1, 2), (3, 4), (4, 5), (5, 6)])
        assert is_shrubbery(F, 4)
        assert not is_shrubbery(F, 6)
        assert not is_shrubbery(F, 3)
        assert is_k_bounded(F, 4) and not is_k_bounded(F, 3)

    def test_mate_free_and_small(self):
        C4 = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
        F = Forest(C4, [(0, 1), (1, 2)])
        assert not is_mate_free(C4, F, Fraction(1), Fraction(2))
        assert is_mate_free(C4, Forest(C4, [(0, 1)]), Fraction(1), Fraction(2))
        assert is_small_forest(C4, F, Fraction(1), Fraction(2))
        assert not is_small_forest(C4, F, Fraction(1, 4), Fraction(2))

    def test_clean_uses_contraction_loss(self):
        K4 = Graph.complete(4)
        F = Forest(K4, [(0, 1)])
        # contracting one edge of K4 loses that edge and one of each parallel pair
        assert contraction_loss(K4, F) == 3
        assert is_clean(K4, F, Fraction(3, 2), Fraction(1))
        assert not is_clean(K4, F, Fraction(1), Fraction(1))


class TestCentroids:
    def test_path_centroids(self):
        assert centroids(nx.path_graph(5)) == frozenset({2})
        assert centroids(nx.path_graph(4)) == frozenset({1, 2})
        assert centroids(nx.path_graph(1)) == frozenset({0})

    def test_not_a_tree(self):
        with pytest.raises(NotATreeError):
            centroids(nx.cycle_graph(4))
        with pytest.raises(NotATreeError):
            centroids(nx.Graph())

    @PROPERTY_SETTINGS
    @given(trees())
    def test_centroids_match_definition(self, T):
        tree = T.to_networkx()
        found = centroids(tree)
        assert 1 <= len(found) <= 2
        assert found == brute_centroids(tree)

    def test_peripheral_piece_on_path(self):
        edge, piece = peripheral_piece(nx.path_graph(5), 1)
        assert edge == (1, 2)
        assert piece == frozenset({0, 1})

    def test_centroid_has_no_central_edge(self):
        with pytest.raises(NoCentralEdgeError, match="centroid"):
            peripheral_piece(nx.path_graph(5), 2)

    @PROPERTY_SETTINGS
    @given(trees(min_n=2), st.data())
    def test_peripheral_piece_is_small_side(self, T, data):
        tree = T.to_networkx()
        non_centroids = sorted(set(tree.nodes) - centroids(tree))
        if not non_centroids:
            return
        v = data.draw(st.sampled_from(non_centroids))
        (a, b), piece = peripheral_piece(tree, v)
        assert v in piece
        assert 2 * len(piece) <= tree.number_of_nodes() - 1
        assert tree.has_edge(a, b) and ((a in piece) != (b in piece))


@pytest.mark.slow
def test_centroids_on_seeded_trees():
    for seed in range(200):
        n = 1 + seed % 200
        tree = gen_random_tree(n, seed).to_networkx()
        assert centroids(tree) == brute_centroids(tree)


def test_edge_contraction_loss_matches_materialized():
    G = gen_gnp(100, Fraction(1, 5), seed=11)
    rng = np.random.Generator(np.random.PCG64(11))
    H = G.to_networkx()
    edges = list(G.edges())
    for idx in rng.integers(0, len(edges), size=1000).tolist():
        u, v = edges[idx]
        assert edge_contraction_loss(G, u, v) == brute_edge_loss(G, u, v, H)
    with pytest.raises(PreconditionError):
        edge_contraction_loss(Graph.from_edges(3, [(0, 1)]), 0, 2)


def test_contraction_loss_is_monotone_under_subforests():
    # dropping an edge from a forest can only lose fewer edges
    G = gen_gnp(100, Fraction(1, 5), seed=5)
    rng = np.random.Generator(np.random.PCG64(5))
    for _ in range(500):
        F = random_forest(G, rng, Fraction(1, 8))
        if F.e == 0:
            continue
        loss = contraction_loss(G, F)
        edges = F.edges()
        u, v = edges[int(rng.integers(0, len(edges)))]
        sub = F.copy()
        sub.remove_edge(u, v)
        assert contraction_loss(G, sub) <= loss


@PROPERTY_SETTINGS
@given(hosts_with_forests())
def test_contraction_loss_matches_networkx(host_forest):
    G, F = host_forest
    assert contraction_loss(G, F) == brute_contraction_loss(G, F)


class TestBadPairs:
    def test_four_cycle_between_two_edges(self):
        # forest edges 0-1 and 2-3; the only crossing edges are 0-2 and 1-3
        G = Graph.from_edges(4, [(0, 1), (2, 3), (0, 2), (1, 3)])
        F = Forest(G, [(0, 1), (2, 3)])
        assert bad_pairs(G, F) == {frozenset({(0, 1), (2, 3)})}
        assert bad_pair_counts(bad_pairs(G, F)) == {(0, 1): 1, (2, 3): 1}

    def test_third_crossing_edge_clears_the_pair(self):
        G = Graph.from_edges(4, [(0, 1), (2, 3), (0, 2), (1, 3), (0, 3)])
        F = Forest(G, [(0, 1), (2, 3)])
        assert bad_pairs(G, F) == set()

    def test_crossing_edges_sharing_an_end(self):
        G = Graph.from_edges(4, [(0, 1), (2, 3), (0, 2), (0, 3)])
        F = Forest(G, [(0, 1), (2, 3)])
        assert bad_pairs(G, F) == set()

    @pytest.mark.parametrize("p", [Fraction(1, 5), Fraction(2, 5), Fraction(3, 5)])
    def test_matches_four_cycle_oracle(self, p):
        rng = np.random.Generator(np.random.PCG64(7))
        for seed in range(40):
            G = gen_gnp(1 + seed % 10, p, seed)
            F = random_forest(G, rng)
            assert bad_pairs(G, F) == brute_bad_pairs(G, F)

    @PROPERTY_SETTINGS
    @given(hosts_with_forests(max_n=10))
    def test_matches_oracle_on_random_hosts(self, host_forest):
        G, F = host_forest
        assert bad_pairs(G, F) == brute_bad_pairs(G, F)


def test_contract_after_toggle_stays_consistent():
    G = Graph.complete(5)
    F = Forest(G, [(0, 1), (2, 3)])
    F.toggle([(1, 2)])
    Q = contract(G, F.as_model())
    assert Q.n == 2 and Q.e == 1
