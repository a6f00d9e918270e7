from fractions import Fraction

import pytest

from minoramp.claw_matcher import (
    BoundedMinor,
    CleanForest,
    alternating_reachability,
    bipartite_dense_minor,
    bipartite_edges,
    build_claw_matching,
    clean_claw_matching,
    mate_free_claw_matching,
    regularize_a_side,
)
from minoramp.errors import InvariantViolation, PreconditionError
from minoramp.forest_lab import Forest, StarMode, is_claw_matching, is_mate_free
from minoramp.generators import gen_claw_host
from minoramp.graph_core import Bipartition, Graph, MateWitness, SmallDense, contraction_loss
from minoramp.params import Mode


def complete_bipartite(A: list[int], B: list[int]) -> tuple[Graph, Bipartition]:
    n = max(A + B) + 1
    return Graph.from_edges(n, [(b, a) for b in B for a in A]), Bipartition.of(A, B)


def eight_cycle() -> tuple[Graph, Bipartition]:
    # A-vertex 4+i sees B-vertices i and i+1 mod 4; no two vertices share two neighbours
    edges = [(i, 4 + i) for i in range(4)] + [((i + 1) % 4, 4 + i) for i in range(4)]
    return Graph.from_edges(8, edges), Bipartition.of(range(4, 8), range(4))


def star_of_squares() -> tuple[Graph, Bipartition]:
    # matching edge (0, 5) closes a 4-cycle with each of the other four matching edges
    edges = [(i, 5 + i) for i in range(5)] + [(0, 5 + i) for i in range(1, 5)] + [(5, i) for i in range(1, 5)]
    return Graph.from_edges(10, edges), Bipartition.of(range(5, 10), range(5))


class TestAlternation:
    def test_path_through_matched_edge(self):
        G = Graph.from_edges(4, [(0, 2), (1, 2), (0, 3)])
        part = Bipartition.of([2, 3], [0, 1])
        F0 = Forest(G, [(0, 2)])
        state = alternating_reachability(G, part, F0, 3)
        assert state.path_to(1) == [3, 0, 2, 1]
        assert state.path_edges(1) == [(0, 3), (0, 2), (1, 2)]

    def test_origin_must_be_uncovered_in_a(self):
        G, part = complete_bipartite([2, 3], [0, 1])
        with pytest.raises(PreconditionError, match="not in A"):
            alternating_reachability(G, part, Forest(G), 0)
        with pytest.raises(PreconditionError, match="covered"):
            alternating_reachability(G, part, Forest(G, [(0, 2)]), 2)

    def test_unreached_vertex(self):
        G = Graph.from_edges(4, [(0, 2), (1, 3)])
        part = Bipartition.of([2, 3], [0, 1])
        state = alternating_reachability(G, part, Forest(G), 2)
        with pytest.raises(PreconditionError):
            state.path_to(1)


class TestBuildClawMatching:
    def test_perfect_claws(self):
        G, part = complete_bipartite([2, 3, 4, 5], [0, 1])
        F = build_claw_matching(G, part, 2, 0)
        assert F.edges() == [(0, 2), (0, 3), (1, 4), (1, 5)]
        assert is_claw_matching(G, F, part, 2, StarMode.EXACTLY)

    def test_augmenting_path_reroutes(self):
        G = Graph.from_edges(4, [(0, 2), (1, 2), (0, 3)])
        part = Bipartition.of([2, 3], [0, 1])
        F = build_claw_matching(G, part, 1, 0)
        assert F.edges() == [(0, 3), (1, 2)]

    def test_blocked_vertex_keeps_reached_claws(self):
        G, part = complete_bipartite([2, 3, 4, 5, 6], [0, 1])
        F = build_claw_matching(G, part, 2, 0)
        assert F.edges() == [(0, 2), (0, 3), (1, 4), (1, 5)]
        assert 6 not in F

    def test_each_augmentation_covers_one_more(self):
        G, part = complete_bipartite([2, 3, 4, 5], [0, 1])
        covered = []
        build_claw_matching(G, part, 2, 0, on_augment=lambda F, path: covered.append(len(F.vertices & part.A)))
        assert covered == [1, 2, 3, 4]

    def test_too_few_a_vertices(self):
        G, part = complete_bipartite([2, 3, 4], [0, 1])
        with pytest.raises(PreconditionError, match="ell"):
            build_claw_matching(G, part, 2, 0)

    def test_a_side_degree_limit(self):
        G = Graph.from_edges(6, [(b, a) for b in (0, 1) for a in (2, 3, 4, 5)] + [(2, 3)])
        part = Bipartition.of([2, 3, 4, 5], [0, 1])
        with pytest.raises(PreconditionError, match="A-neighbours"):
            build_claw_matching(G, part, 2, 0)

    @pytest.mark.parametrize("seed", range(4))
    def test_generated_claw_hosts(self, seed):
        G, part = gen_claw_host(30, 2, 12, 3, seed)
        steps = []
        F = build_claw_matching(G, part, 2, 3, on_augment=lambda F, path: steps.append(len(F.vertices & part.A)))
        assert steps == list(range(1, len(steps) + 1))
        assert is_claw_matching(G, F, part, 2, StarMode.EXACTLY)
        covered_b = F.vertices & part.B
        for a in F.vertices & part.A:
            assert len((G.neighbors(a) & part.B) - covered_b) <= 3


def test_bipartite_edges_drop_a_side_edges():
    G = Graph.from_edges(4, [(0, 2), (1, 3), (2, 3)])
    part = Bipartition.of([2, 3], [0, 1])
    assert list(bipartite_edges(G, part).edges()) == [(0, 2), (1, 3)]


class TestMateFree:
    def test_finds_matching_without_mates(self):
        G, part = eight_cycle()
        F = mate_free_claw_matching(G, part, 1, Fraction(3, 4), Fraction(2))
        assert isinstance(F, Forest)
        assert F.edges() == [(0, 4), (1, 5), (2, 6), (3, 7)]
        assert is_mate_free(G, F, Fraction(3, 4), Fraction(2))

    def test_returns_witness_when_mates_abound(self):
        G, part = complete_bipartite([2, 3, 4, 5], [0, 1])
        found = mate_free_claw_matching(G, part, 2, Fraction(1, 4), Fraction(2))
        assert found == MateWitness(2, (3, 4, 5))

    def test_eps_range(self):
        G, part = eight_cycle()
        with pytest.raises(PreconditionError, match="eps0"):
            mate_free_claw_matching(G, part, 1, Fraction(1), Fraction(2))


def test_regularize_prefers_forest_edges():
    G, part = complete_bipartite([0], [1, 2, 3, 4])
    F = Forest(G, [(0, 3)])
    H = regularize_a_side(G, part, F, Fraction(5, 2))
    assert list(H.edges()) == [(0, 1), (0, 2), (0, 3)]


class TestClean:
    def test_matching_without_bad_pairs(self):
        G, part = eight_cycle()
        F1 = Forest(G, [(0, 4), (1, 5), (2, 6), (3, 7)])
        out = clean_claw_matching(G, part, F1, 1, Fraction(2), Fraction(1, 2), Fraction(2))
        assert isinstance(out, CleanForest)
        assert out.swaps == 0
        assert out.dropped == ()
        assert out.bad_pair_history == (0,)
        assert out.coverage == 1
        assert out.forest.edges() == F1.edges()

    def test_big_vertices_drop_their_claws(self):
        G, part = eight_cycle()
        F1 = Forest(G, [(0, 4), (1, 5), (2, 6), (3, 7)])
        out = clean_claw_matching(G, part, F1, 1, Fraction(1, 2), Fraction(1, 2), Fraction(2))
        assert len(out.dropped) == 4
        assert out.forest.is_empty()
        assert out.coverage == 0

    def test_swaps_clear_bad_pairs(self):
        G, part = star_of_squares()
        F1 = Forest(G, [(i, 5 + i) for i in range(5)])
        eps1, d1 = Fraction(1, 2), Fraction(4)
        out = clean_claw_matching(G, part, F1, 1, Fraction(2), eps1, d1)
        assert isinstance(out, CleanForest)
        assert out.swaps == 1
        assert out.bad_pair_history == (4, 1)
        history = out.bad_pair_history
        assert all(a > b for a, b in zip(history, history[1:]))
        assert out.forest.edges() == [(0, 6), (1, 5), (2, 7), (3, 8), (4, 9)]
        assert out.violations == ()
        ell = 1
        assert contraction_loss(G, out.forest) == 6
        assert contraction_loss(G, out.forest) <= ell**2 * eps1 * d1 * G.n

    def test_bad_pair_below_limit_is_kept(self):
        G = Graph.from_edges(4, [(0, 2), (1, 3), (0, 3), (1, 2)])
        part = Bipartition.of([2, 3], [0, 1])
        F1 = Forest(G, [(0, 2), (1, 3)])
        out = clean_claw_matching(G, part, F1, 1, Fraction(2), Fraction(1, 2), Fraction(2))
        assert out.bad_pair_history == (1,)
        assert out.swaps == 0

    def test_mates_inside_a_claw(self):
        G, part = complete_bipartite([2, 3, 4, 5], [0, 1])
        F1 = Forest(G, [(0, 2), (0, 3), (1, 4), (1, 5)])
        with pytest.raises(PreconditionError, match="mate-free"):
            clean_claw_matching(G, part, F1, 2, Fraction(2), Fraction(1, 2), Fraction(2))
        out = clean_claw_matching(G, part, F1, 2, Fraction(2), Fraction(1, 2), Fraction(2), Mode.RELAXED)
        assert sum("mate-free" in v for v in out.violations) == 2

    def test_must_cover_both_sides(self):
        G, part = eight_cycle()
        F1 = Forest(G, [(0, 4), (1, 5), (2, 6)])
        with pytest.raises(PreconditionError, match="cover"):
            clean_claw_matching(G, part, F1, 1, Fraction(2), Fraction(1, 2), Fraction(2))


class TestBipartiteDenseMinor:
    def test_bounded_minor_on_eight_cycle(self):
        G, part = eight_cycle()
        out = bipartite_dense_minor(G, part, 1, Fraction(2), Fraction(3, 4), Fraction(2))
        assert isinstance(out, BoundedMinor)
        assert out.model.width == 2
        assert sorted(map(sorted, out.model.branch_sets)) == [[0, 4], [1, 5], [2, 6], [3, 7]]
        assert out.measured_density == 1
        assert out.bounds["bipartite"] == Fraction(-5, 4)
        assert out.met == ("bipartite", "bipartite_stated")
        assert out.violations == ()

    def test_theorem_mode_needs_enough_degree(self):
        G, part = complete_bipartite([2, 3, 4, 5], [0, 1])
        with pytest.raises(PreconditionError, match="1/eps0"):
            bipartite_dense_minor(G, part, 2, Fraction(2), Fraction(1, 4), Fraction(2))

    def test_relaxed_mode_returns_small_dense(self):
        G, part = complete_bipartite([2, 3, 4, 5], [0, 1])
        out = bipartite_dense_minor(G, part, 2, Fraction(2), Fraction(1, 4), Fraction(2), Mode.RELAXED)
        assert isinstance(out, SmallDense)
        assert (out.subgraph.n, out.subgraph.e) == (6, 8)
        assert out.bounds_hold()

    def test_x_side_degree(self):
        G, part = eight_cycle()
        with pytest.raises(PreconditionError, match="neighbours in Y"):
            bipartite_dense_minor(G, part, 1, Fraction(2), Fraction(3, 4), Fraction(3))

    def test_missed_bound_fails_in_theorem_mode(self, monkeypatch):
        monkeypatch.setattr("minoramp.claw_matcher.bipartite_theorem_bound", lambda ell, eps0, d0: Fraction(2))
        G, part = eight_cycle()
        with pytest.raises(InvariantViolation, match="density 1 below 2"):
            bipartite_dense_minor(G, part, 1, Fraction(2), Fraction(3, 4), Fraction(2))

    def test_missed_bound_is_recorded_in_relaxed_mode(self, monkeypatch):
        monkeypatch.setattr("minoramp.claw_matcher.bipartite_theorem_bound", lambda ell, eps0, d0: Fraction(2))
        G, part = eight_cycle()
        out = bipartite_dense_minor(G, part, 1, Fraction(2), Fraction(3, 4), Fraction(2), Mode.RELAXED)
        assert isinstance(out, BoundedMinor)
        assert out.met == ("bipartite_stated",)
        assert out.violations == ("bounded minor density 1 below 2",)
