import itertools
from fractions import Fraction

import pytest

from minoramp.errors import InvariantViolation, PreconditionError
from minoramp.forest_lab import Forest, is_mate_free, is_shrubbery, peripheral_piece
from minoramp.generators import gen_disjoint_cliques, gen_disjoint_petersen
from minoramp.graph_core import Graph, contraction_loss
from minoramp.params import Mode
from minoramp.shrubbery_builder import (
    MoveRecord,
    Moved,
    Shrubbery,
    SmallDenseExit,
    UnbalancedBipartite,
    _Builder,
    build_shrubbery,
    move_attach_small_component,
    move_graft_peripheral,
    move_grow_star,
)

PETERSEN_EPS = Fraction(3, 4)
PETERSEN_D = Fraction(3, 2)


def subdivided_k5() -> Graph:
    # branch vertices 0..4 have degree 4; subdivision vertices 5..14 have degree 2
    edges = []
    for idx, (i, j) in enumerate(itertools.combinations(range(5), 2)):
        edges += [(i, 5 + idx), (j, 5 + idx)]
    return Graph.from_edges(15, edges)


def path_edges(start: int, length: int) -> list[tuple[int, int]]:
    return [(start + i, start + i + 1) for i in range(length - 1)]


def two_paths_and_a_hub() -> tuple[Graph, Forest]:
    # paths 0..5 and 6..11 are full 6-vertex trees; 12 sees the non-centroid vertices 1 and 7
    paths = path_edges(0, 6) + path_edges(6, 6)
    G = Graph.from_edges(13, paths + [(1, 12), (7, 12)])
    return G, Forest(G, paths)


class TestMoves:
    def test_grow_star_on_petersen(self):
        G = gen_disjoint_petersen(1)
        moved = move_grow_star(G, Forest(G), 0, 4, Fraction(2), PETERSEN_EPS, PETERSEN_D)
        assert isinstance(moved, Moved)
        assert moved.forest.edges() == [(0, 1), (0, 4)]
        assert (moved.record.kind, moved.record.gained, moved.record.loss_increase) == ("grow", 3, 2)

    def test_attach_to_small_component(self):
        G = gen_disjoint_petersen(1)
        F = Forest(G, [(0, 1)])
        moved = move_attach_small_component(G, F, 2, 4, Fraction(2), PETERSEN_EPS, PETERSEN_D)
        assert isinstance(moved, Moved)
        assert moved.forest.edges() == [(0, 1), (1, 2)]
        assert moved.record.loss_increase == 1
        # the input forest is left alone
        assert F.edges() == [(0, 1)]

    def test_grow_stalls_without_small_neighbours(self):
        G = subdivided_k5()
        eps, d = Fraction(4, 5), Fraction(4, 3)
        assert move_grow_star(G, Forest(G), 5, 5, Fraction(2), eps, d, strict=False) is None

    def test_graft_takes_peripheral_pieces(self):
        G, F = two_paths_and_a_hub()
        assert peripheral_piece(F.component_tree(F.component_of(0)), 1) == ((1, 2), frozenset({0, 1}))
        eps, d = Fraction(1, 2), Fraction(4)
        moved = move_graft_peripheral(G, F, 12, 6, Fraction(2), eps, d)
        assert isinstance(moved, Moved)
        assert moved.record == MoveRecord("graft", 12, 1, 0)
        assert moved.forest.component_of(12) == frozenset({0, 1, 6, 7, 12})
        sizes = sorted(len(c) for c in moved.forest.components())
        assert sizes == [4, 4, 5]
        assert all(3 < s <= 6 for s in sizes)
        assert contraction_loss(G, moved.forest) - contraction_loss(G, F) <= eps * d + 1
        assert 12 not in F

    def test_graft_stalls_with_one_full_component(self):
        G = Graph.from_edges(7, path_edges(0, 6) + [(1, 6)])
        F = Forest(G, path_edges(0, 6))
        eps, d = Fraction(1, 2), Fraction(4)
        with pytest.raises(InvariantViolation, match="graft: tree at 6 stalled at 3 vertices"):
            move_graft_peripheral(G, F, 6, 6, Fraction(2), eps, d)
        assert move_graft_peripheral(G, F, 6, 6, Fraction(2), eps, d, strict=False) is None


class TestBuildShrubbery:
    def test_petersen_hosts_give_a_shrubbery(self):
        out = build_shrubbery(gen_disjoint_petersen(3), 2, 1, 2, PETERSEN_EPS, Mode.RELAXED)
        assert isinstance(out, Shrubbery)
        assert out.d == PETERSEN_D
        assert out.forest.edges() == [(0, 1)]
        assert [m.kind for m in out.moves] == ["grow"]
        assert is_shrubbery(out.forest, 2)
        assert is_mate_free(out.core, out.forest, PETERSEN_EPS, out.d)
        assert len(out.violations) == 3

    def test_petersen_with_large_k_is_unbalanced(self):
        out = build_shrubbery(gen_disjoint_petersen(2), 5, 1, 2, PETERSEN_EPS, Mode.RELAXED)
        assert isinstance(out, UnbalancedBipartite)
        assert out.X == frozenset(range(20))
        assert out.Y == frozenset()
        assert out.moves == ()

    def test_cliques_exit_small_dense(self):
        out = build_shrubbery(gen_disjoint_cliques(2, 13), 2, 2, 2, Fraction(1, 3))
        assert isinstance(out, SmallDenseExit)
        assert out.violations == ()
        assert (out.small.subgraph.n, out.small.subgraph.e) == (13, 78)
        assert out.small.bounds_hold()

    def test_big_branch_vertices_end_up_in_y(self):
        out = build_shrubbery(subdivided_k5(), 5, 1, 2, Fraction(4, 5), Mode.RELAXED)
        assert isinstance(out, UnbalancedBipartite)
        assert out.X == frozenset(range(5, 15))
        assert out.Y == frozenset(range(5))

    def test_theorem_mode_checks_density(self):
        with pytest.raises(PreconditionError, match="2/eps"):
            build_shrubbery(gen_disjoint_cliques(3, 5), 2, 2, 2, Fraction(1, 3))

    def test_relaxed_mode_records_failed_preconditions(self):
        out = build_shrubbery(gen_disjoint_cliques(3, 5), 2, 2, 2, Fraction(1, 3), Mode.RELAXED)
        assert isinstance(out, SmallDenseExit)
        assert any("2/eps" in v for v in out.violations)

    @pytest.mark.parametrize("k, ell, eps", [(1, 1, Fraction(1, 2)), (2, 0, Fraction(1, 2)), (2, 1, Fraction(1))])
    def test_rejects_bad_parameters(self, k, ell, eps):
        with pytest.raises(PreconditionError):
            build_shrubbery(gen_disjoint_cliques(2, 5), k, ell, 2, eps, Mode.RELAXED)


class TestExitsWithLargerEll:
    def test_petersen_shrubbery(self):
        out = build_shrubbery(gen_disjoint_petersen(3), 2, 2, 2, PETERSEN_EPS, Mode.RELAXED)
        assert isinstance(out, Shrubbery)
        assert out.forest.edges() == [(0, 1)]
        assert is_shrubbery(out.forest, 2)
        # K >= k >= ell >= 2 now holds; the remaining failures are eps and d
        assert len(out.violations) == 2

    def test_subdivided_k5_is_tightly_unbalanced(self):
        out = build_shrubbery(subdivided_k5(), 2, 2, 2, Fraction(4, 5), Mode.RELAXED)
        assert isinstance(out, UnbalancedBipartite)
        assert out.X == frozenset(range(5, 15))
        assert out.Y == frozenset(range(5))
        assert len(out.X) == 2 * len(out.Y)
        assert all(len(out.core.neighbors(x) & out.Y) == 2 for x in out.X)
        assert len(out.violations) == 2

    def test_x_side_keeps_most_of_its_degree(self):
        k, eps = 2, Fraction(1, 64)
        builder = _Builder(subdivided_k5(), k, 2, Fraction(2), eps, Mode.RELAXED)
        need = (1 - 8 * k * k * eps) * builder.d
        assert need == Fraction(2, 3)
        out = builder.unbalanced_exit(frozenset(range(5, 15)), frozenset())
        assert isinstance(out, UnbalancedBipartite)
        assert len(out.X) >= 2 * len(out.Y)
        assert all(len(out.core.neighbors(x) & out.Y) >= need for x in out.X)
        assert out.violations == ()

    def test_x_side_degree_enforced_in_theorem_mode(self):
        builder = _Builder(subdivided_k5(), 2, 2, Fraction(2), Fraction(1, 64), Mode.THEOREM)
        with pytest.raises(InvariantViolation, match="fewer than 2/3 neighbours in Y"):
            builder.unbalanced_exit(frozenset(range(5, 15)) | {0}, frozenset())
