"""Forests inside a host graph and the predicates the constructions rely on."""

from __future__ import annotations

import enum
import itertools
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import networkx as nx

from .errors import (
    EmptyForestError,
    NoCentralEdgeError,
    NotAForestError,
    NotATreeError,
    PreconditionError,
    StarShapeError,
)
from .graph_core import Bipartition, Edge, Graph, MinorModel, _edge, contraction_loss

logger = logging.getLogger(__name__)


class UnionFind:
    """Disjoint sets over ``0..n-1`` with union by rank and path halving."""

    def __init__(self, n: int) -> None:
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, element: int) -> int:
        parent = self.parent
        while parent[element] != element:
            parent[element] = parent[parent[element]]
            element = parent[element]
        return element

    def unite(self, first: int, second: int) -> bool:
        """Merge two sets; False when they were already one set."""
        a, b = self.find(first), self.find(second)
        if a == b:
            return False
        if self.rank[a] < self.rank[b]:
            a, b = b, a
        self.parent[b] = a
        if self.rank[a] == self.rank[b]:
            self.rank[a] += 1
        return True


class Forest:
    """A forest of a host graph: a vertex set plus an acyclic set of host edges.

    Components are tracked with a union-find that is rebuilt whenever an
    edge or a vertex is removed.
    """

    def __init__(self, host: Graph, edges: Iterable[Edge] = (), vertices: Iterable[int] = ()) -> None:
        self.host = host
        self._adj: dict[int, set[int]] = {}
        self._uf = UnionFind(host.n)
        self._components: list[frozenset[int]] | None = None
        for v in vertices:
            self.add_vertex(v)
        for u, v in edges:
            self.add_edge(u, v)

    def __repr__(self) -> str:
        return f"Forest(v={self.v}, e={self.e}, components={len(self.components())})"

    @property
    def v(self) -> int:
        return len(self._adj)

    @property
    def e(self) -> int:
        return sum(len(s) for s in self._adj.values()) // 2

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(self._adj)

    def is_empty(self) -> bool:
        return not self._adj

    def __contains__(self, v: object) -> bool:
        return v in self._adj

    def edges(self) -> list[Edge]:
        return sorted(_edge(u, w) for u, ws in self._adj.items() for w in ws if u < w)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj.get(u, ())

    def neighbors(self, v: int) -> frozenset[int]:
        return frozenset(self._adj.get(v, ()))

    def degree(self, v: int) -> int:
        return len(self._adj.get(v, ()))

    def add_vertex(self, v: int) -> None:
        self.host._check(v)
        if v not in self._adj:
            self._adj[v] = set()
            self._components = None

    def add_edge(self, u: int, v: int) -> None:
        if not self.host.has_edge(u, v):
            raise NotAForestError(f"({u}, {v}) is not an edge of the host")
        if self.has_edge(u, v):
            return
        if not self._uf.unite(u, v):
            raise NotAForestError(f"edge ({u}, {v}) closes a cycle")
        self._adj.setdefault(u, set()).add(v)
        self._adj.setdefault(v, set()).add(u)
        self._components = None

    def remove_edge(self, u: int, v: int) -> None:
        """Delete a forest edge; both endpoints stay in V(F)."""
        if not self.has_edge(u, v):
            raise NotAForestError(f"({u}, {v}) is not a forest edge")
        self._adj[u].discard(v)
        self._adj[v].discard(u)
        self._rebuild()

    def remove_vertices(self, vertices: Iterable[int]) -> None:
        for v in vertices:
            for w in self._adj.pop(v, ()):
                self._adj[w].discard(v)
        self._rebuild()

    def toggle(self, edges: Iterable[Edge]) -> None:
        """Replace the edge set by its symmetric difference with ``edges``."""
        wanted = {_edge(u, v) for u, v in edges}
        removed = {uv for uv in wanted if self.has_edge(*uv)}
        for u, v in removed:
            self._adj[u].discard(v)
            self._adj[v].discard(u)
        self._rebuild()
        for u, v in sorted(wanted - removed):
            self.add_edge(u, v)

    def _rebuild(self) -> None:
        self._uf = UnionFind(self.host.n)
        for u, ws in self._adj.items():
            for w in ws:
                if u < w:
                    self._uf.unite(u, w)
        self._components = None

    def components(self) -> list[frozenset[int]]:
        """Vertex sets of the trees, ordered by smallest member."""
        if self._components is None:
            groups: dict[int, set[int]] = defaultdict(set)
            for v in self._adj:
                groups[self._uf.find(v)].add(v)
            self._components = sorted((frozenset(g) for g in groups.values()), key=min)
        return self._components

    def component_of(self, v: int) -> frozenset[int]:
        if v not in self._adj:
            raise PreconditionError(f"vertex {v} is not in the forest")
        root = self._uf.find(v)
        return next(c for c in self.components() if self._uf.find(min(c)) == root)

    def same_component(self, u: int, v: int) -> bool:
        return u in self._adj and v in self._adj and self._uf.find(u) == self._uf.find(v)

    def component_tree(self, component: Iterable[int]) -> nx.Graph:
        comp = set(component)
        tree = nx.Graph()
        tree.add_nodes_from(sorted(comp))
        tree.add_edges_from((u, w) for u in comp for w in self._adj[u] if u < w)
        return tree

    def component_edges(self, component: Iterable[int]) -> list[Edge]:
        comp = set(component)
        return sorted((u, w) for u in comp for w in self._adj[u] if u < w)

    def as_model(self, width: int | None = None) -> MinorModel:
        return MinorModel.of(self.components(), width)

    def copy(self) -> "Forest":
        clone = Forest(self.host)
        clone._adj = {v: set(ws) for v, ws in self._adj.items()}
        clone._rebuild()
        return clone


class StarMode(enum.Enum):
    AT_MOST = "at_most"
    EXACTLY = "exactly"


@dataclass(frozen=True)
class StarShape:
    center: int
    leaves: frozenset[int]


def star_shape(F: Forest, component: frozenset[int], part: Bipartition) -> StarShape | None:
    """The star a component forms with centre in B and leaves in A, if it does."""
    if len(component) < 2:
        return None
    if len(component) == 2:
        a, b = sorted(component)
        if a in part.A and b in part.A:
            raise StarShapeError(f"single-edge component ({a}, {b}) has both ends in A")
        centers = [x for x in (a, b) if x in part.B]
        if len(centers) != 1:
            return None
        center = centers[0]
    else:
        hubs = [x for x in component if F.degree(x) == len(component) - 1]
        if len(hubs) != 1:
            return None
        center = hubs[0]
    leaves = component - {center}
    if center not in part.B or not all(x in part.A for x in leaves):
        return None
    return StarShape(center, frozenset(leaves))


def star_shapes(F: Forest, part: Bipartition) -> list[StarShape] | None:
    shapes = []
    for comp in F.components():
        shape = star_shape(F, comp, part)
        if shape is None:
            return None
        shapes.append(shape)
    return shapes


def is_star_matching(F: Forest, part: Bipartition, ell: int, mode: StarMode = StarMode.AT_MOST) -> bool:
    shapes = star_shapes(F, part)
    if shapes is None:
        return False
    if mode is StarMode.EXACTLY:
        return all(len(s.leaves) == ell for s in shapes)
    return all(1 <= len(s.leaves) <= ell for s in shapes)


def is_claw_matching(
    G: Graph, F: Forest, part: Bipartition, ell: int, mode: StarMode = StarMode.AT_MOST
) -> bool:
    try:
        if not is_star_matching(F, part, ell, mode):
            return False
        shapes = star_shapes(F, part)
    except StarShapeError:
        return False
    return all(
        not G.has_edge(x, y)
        for s in shapes
        for x, y in itertools.combinations(sorted(s.leaves), 2)
    )


def is_small_forest(G: Graph, F: Forest, K: Fraction, d: Fraction) -> bool:
    """Every vertex of V(F) has degree <= K*d inside G[V(F)]."""
    inside = F.vertices
    bound = Fraction(K) * d
    return all(len(G.neighbors(v) & inside) <= bound for v in inside)


def is_mate_free(G: Graph, F: Forest, eps: Fraction, d: Fraction) -> bool:
    threshold = Fraction(eps) * d
    for comp in F.components():
        for u, v in itertools.combinations(sorted(comp), 2):
            if len(G.neighbors(u) & G.neighbors(v)) >= threshold:
                return False
    return True


def is_clean(G: Graph, F: Forest, c: Fraction, d: Fraction) -> bool:
    if F.is_empty():
        raise EmptyForestError()
    return contraction_loss(G, F) <= Fraction(c) * d * F.v


def is_shrubbery(F: Forest, k: int) -> bool:
    if F.is_empty():
        raise EmptyForestError()
    return all(k < 2 * len(comp) <= 2 * k for comp in F.components())


def is_k_bounded(F: Forest, k: int) -> bool:
    return all(len(comp) <= k for comp in F.components())


def _tree_sides(T: nx.Graph) -> tuple[int, dict[int, dict[int, int]]]:
    """For every vertex v and neighbour w, the size of v's side of T - vw."""
    if T.number_of_nodes() == 0 or not nx.is_tree(T):
        raise NotATreeError("input is not a non-empty tree")
    n = T.number_of_nodes()
    root = min(T.nodes)
    order = list(nx.dfs_preorder_nodes(T, root))
    parent = nx.dfs_predecessors(T, root)
    size = dict.fromkeys(order, 1)
    for v in reversed(order):
        if v in parent:
            size[parent[v]] += size[v]
    sides: dict[int, dict[int, int]] = {}
    for v in order:
        sides[v] = {
            w: size[v] if parent.get(v) == w else n - size[w]
            for w in T.neighbors(v)
        }
    return n, sides


def centroids(T: nx.Graph) -> frozenset[int]:
    """Sinks of the orientation that points every edge at its heavier side."""
    n, sides = _tree_sides(T)
    # v is a sink when no incident edge points away, i.e. each v-side keeps >= n/2
    return frozenset(v for v, nb in sides.items() if all(2 * s >= n for s in nb.values()))


def peripheral_piece(T: nx.Graph, v: int) -> tuple[Edge, frozenset[int]]:
    """Central edge of a non-centroid ``v`` and the small side of the tree it cuts off."""
    n, sides = _tree_sides(T)
    if v not in sides:
        raise NotATreeError(f"vertex {v} is not in the tree")
    qualifying = [(s, w) for w, s in sides[v].items() if 2 * s <= n - 1]
    if not qualifying:
        raise NoCentralEdgeError(v)
    _, w = min(qualifying)
    cut = T.copy()
    cut.remove_edge(v, w)
    return _edge(v, w), frozenset(nx.node_connected_component(cut, v))


def edge_contraction_loss(G: Graph, u: int, v: int) -> int:
    if not G.has_edge(u, v):
        raise PreconditionError(f"({u}, {v}) is not an edge")
    return 1 + len(G.neighbors(u) & G.neighbors(v))


BadPair = frozenset[Edge]


def bad_pairs(G: Graph, F: Forest) -> set[BadPair]:
    """Pairs of forest edges in different trees whose trees meet only along a 4-cycle through both."""
    index: dict[int, int] = {}
    for i, comp in enumerate(F.components()):
        for v in comp:
            index[v] = i
    crossing: dict[tuple[int, int], list[Edge]] = defaultdict(list)
    for x in sorted(index):
        for y in sorted(G.neighbors(x)):
            if y in index and index[x] < index[y]:
                crossing[(index[x], index[y])].append((x, y))
    pairs: set[BadPair] = set()
    for (_, _), between in crossing.items():
        if len(between) != 2:
            continue
        (x1, y1), (x2, y2) = between
        if x1 != x2 and y1 != y2 and F.has_edge(x1, x2) and F.has_edge(y1, y2):
            pairs.add(frozenset((_edge(x1, x2), _edge(y1, y2))))
    return pairs


def bad_pair_counts(pairs: Iterable[BadPair]) -> Counter[Edge]:
    counts: Counter[Edge] = Counter()
    for pair in pairs:
        counts.update(pair)
    return counts
