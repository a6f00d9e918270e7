"""Graphs, densities, small/big vertices, mates, contraction and minor models.

Vertex ids are dense integers ``0..n-1``. A subgraph gets its own dense ids
plus a ``labels`` table that maps each of them back to the root host, so
any result can be reported in the ids of the graph it came from.
"""

from __future__ import annotations

import enum
import hashlib
import heapq
import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import TYPE_CHECKING, Iterable, Iterator, Sequence

import networkx as nx
import numpy as np

from .errors import (
    EmptyGraphError,
    InvalidGraphError,
    InvalidModelError,
    InvalidWitnessError,
    PreconditionError,
    UnknownVertexError,
)
from .params import ceil_fraction

if TYPE_CHECKING:
    from .forest_lab import Forest

logger = logging.getLogger(__name__)

Edge = tuple[int, int]

# rows of the common-neighbour product computed per numpy call
_COMMON_CHUNK = 512


def _edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    n: int
    adjacency: tuple[frozenset[int], ...]
    labels: tuple[int, ...] | None = field(default=None, compare=False)

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[tuple[int, int]],
        labels: Sequence[int] | None = None,
    ) -> "Graph":
        if n < 0:
            raise InvalidGraphError(f"negative vertex count {n}")
        adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise UnknownVertexError(u if not 0 <= u < n else v)
            if u == v:
                raise InvalidGraphError(f"self-loop at vertex {u}")
            adj[u].add(v)
            adj[v].add(u)
        if labels is not None and len(labels) != n:
            raise InvalidGraphError("label table does not match vertex count")
        return cls(n, tuple(frozenset(s) for s in adj), None if labels is None else tuple(labels))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls.from_edges(n, ((u, v) for u in range(n) for v in range(u + 1, n)))

    @cached_property
    def e(self) -> int:
        return sum(len(s) for s in self.adjacency) // 2

    def vertices(self) -> range:
        return range(self.n)

    def _check(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise UnknownVertexError(v)

    def neighbors(self, v: int) -> frozenset[int]:
        self._check(v)
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        self._check(v)
        return len(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        self._check(u)
        self._check(v)
        return v in self.adjacency[u]

    def edges(self) -> Iterator[Edge]:
        """Edges as ``(u, v)`` with ``u < v`` in ascending order."""
        for u in range(self.n):
            for v in sorted(self.adjacency[u]):
                if u < v:
                    yield (u, v)

    @cached_property
    def edge_array(self) -> np.ndarray:
        arr = np.fromiter(
            (x for uv in self.edges() for x in uv), dtype=np.int64, count=2 * self.e
        )
        return arr.reshape(-1, 2)

    def host_id(self, v: int) -> int:
        self._check(v)
        return v if self.labels is None else self.labels[v]

    def root_ids(self, vertices: Iterable[int]) -> list[int]:
        return sorted(self.host_id(v) for v in vertices)

    @cached_property
    def _index(self) -> dict[int, int]:
        if self.labels is None:
            return {v: v for v in range(self.n)}
        return {h: v for v, h in enumerate(self.labels)}

    def index_of(self, root_id: int) -> int:
        try:
            return self._index[root_id]
        except KeyError:
            raise UnknownVertexError(root_id) from None

    def subgraph(self, vertices: Iterable[int], edges: Iterable[Edge] | None = None) -> "Graph":
        """Induced subgraph on ``vertices`` (or the given subset of its edges)."""
        keep = sorted(set(vertices))
        for v in keep:
            self._check(v)
        local = {v: i for i, v in enumerate(keep)}
        if edges is None:
            chosen = [
                (local[u], local[w])
                for u in keep
                for w in self.adjacency[u]
                if u < w and w in local
            ]
        else:
            chosen = []
            for u, w in edges:
                if u not in local or w not in local or w not in self.adjacency[u]:
                    raise InvalidGraphError(f"({u}, {w}) is not an edge inside the subgraph")
                chosen.append((local[u], local[w]))
        labels = [self.host_id(v) for v in keep]
        return Graph.from_edges(len(keep), chosen, labels=labels)

    def to_networkx(self, vertices: Iterable[int] | None = None) -> nx.Graph:
        g = nx.Graph()
        if vertices is None:
            g.add_nodes_from(range(self.n))
            g.add_edges_from(self.edges())
            return g
        keep = set(vertices)
        g.add_nodes_from(sorted(keep))
        g.add_edges_from((u, w) for u in keep for w in self.adjacency[u] if u < w and w in keep)
        return g

    def induced_edge_count(self, vertices: Iterable[int]) -> int:
        keep = set(vertices)
        return sum(1 for u in keep for w in self.adjacency[u] if w in keep) // 2


@dataclass(frozen=True)
class Bipartition:
    A: frozenset[int]
    B: frozenset[int]

    def __post_init__(self) -> None:
        if self.A & self.B:
            raise PreconditionError("bipartition sides intersect")

    @classmethod
    def of(cls, A: Iterable[int], B: Iterable[int]) -> "Bipartition":
        return cls(frozenset(A), frozenset(B))

    def within(self, G: Graph) -> bool:
        return all(0 <= v < G.n for v in self.A | self.B)

    def bipartite_subgraph(self, G: Graph) -> Graph:
        """``G(A, B)``: the vertices of both sides and only the edges between them."""
        edges = [(a, b) for a in sorted(self.A) for b in G.neighbors(a) if b in self.B]
        return G.subgraph(self.A | self.B, edges)


@dataclass(frozen=True)
class MinorModel:
    branch_sets: tuple[frozenset[int], ...]
    width: int

    @classmethod
    def of(cls, branch_sets: Iterable[Iterable[int]], width: int | None = None) -> "MinorModel":
        sets = tuple(frozenset(s) for s in branch_sets)
        if width is None:
            width = max((len(s) for s in sets), default=1)
        if width < 1:
            raise InvalidModelError(f"width must be positive, got {width}")
        return cls(sets, width)


@dataclass(frozen=True)
class MateWitness:
    v: int
    mates: tuple[int, ...]


@dataclass(frozen=True)
class Violation:
    index: int
    reason: str
    detail: str = ""


class DegreeClass(enum.Enum):
    SMALL = "small"
    BIG = "big"


def density(G: Graph) -> Fraction:
    if G.n < 1:
        raise EmptyGraphError()
    return Fraction(G.e, G.n)


def dense_core(G: Graph) -> Graph:
    """Peel the smallest-id vertex of degree <= current density until none is left.

    The result has density >= d(G) and every vertex has degree >= d(G).
    """
    if G.e < 1:
        raise EmptyGraphError("dense core of an edgeless graph")
    deg = [len(s) for s in G.adjacency]
    alive = [True] * G.n
    n_cur, e_cur = G.n, G.e
    by_degree = [(deg[v], v) for v in range(G.n)]
    heapq.heapify(by_degree)
    qualified: list[int] = []
    marked = [False] * G.n

    while n_cur > 1:
        # deg <= e/n  <=>  deg * n <= e; density never drops so a marked vertex stays marked
        while by_degree and by_degree[0][0] * n_cur <= e_cur:
            dv, v = heapq.heappop(by_degree)
            if alive[v] and not marked[v] and dv == deg[v]:
                marked[v] = True
                heapq.heappush(qualified, v)
        if not qualified:
            break
        v = heapq.heappop(qualified)
        alive[v] = False
        n_cur -= 1
        e_cur -= deg[v]
        for w in G.adjacency[v]:
            if alive[w]:
                deg[w] -= 1
                if not marked[w]:
                    heapq.heappush(by_degree, (deg[w], w))

    core = G.subgraph(v for v in range(G.n) if alive[v])
    logger.debug("dense core keeps %d of %d vertices", core.n, G.n)
    return core


def degree_class(G: Graph, v: int, K: Fraction, d: Fraction) -> DegreeClass:
    return DegreeClass.SMALL if G.degree(v) <= Fraction(K) * d else DegreeClass.BIG


def small_vertices(G: Graph, K: Fraction, d: Fraction) -> list[int]:
    bound = Fraction(K) * d
    return [v for v in range(G.n) if len(G.adjacency[v]) <= bound]


def mate_threshold(eps: Fraction, d: Fraction) -> int:
    """Smallest integer common-neighbour count that makes two vertices mates."""
    t = Fraction(eps) * d
    if t <= 0:
        raise PreconditionError(f"eps*d must be positive, got {t}")
    return ceil_fraction(t)


def common_neighbors(G: Graph, u: int, v: int) -> int:
    return len(G.neighbors(u) & G.neighbors(v))


def are_mates(G: Graph, u: int, v: int, eps: Fraction, d: Fraction) -> bool:
    if u == v:
        raise PreconditionError("a vertex is never its own mate")
    return common_neighbors(G, u, v) >= Fraction(eps) * d


def mates_of(G: Graph, v: int, eps: Fraction, d: Fraction) -> list[int]:
    threshold = mate_threshold(eps, d)
    counts: Counter[int] = Counter()
    for w in G.neighbors(v):
        counts.update(G.adjacency[w])
    counts.pop(v, None)
    return sorted(z for z, c in counts.items() if c >= threshold)


def _adjacency_matrix(G: Graph) -> np.ndarray:
    mat = np.zeros((G.n, G.n), dtype=np.float64)
    if G.e:
        arr = G.edge_array
        mat[arr[:, 0], arr[:, 1]] = 1.0
        mat[arr[:, 1], arr[:, 0]] = 1.0
    return mat


def unmated_or_witness(G: Graph, K: Fraction, eps: Fraction, d: Fraction) -> MateWitness | None:
    """``None`` when G is (K, eps, d)-unmated, else the witness of the smallest violating id."""
    threshold = mate_threshold(eps, d)
    small = small_vertices(G, K, d)
    if not small or G.e == 0:
        return None
    mat = _adjacency_matrix(G)
    for start in range(0, len(small), _COMMON_CHUNK):
        rows = np.asarray(small[start:start + _COMMON_CHUNK], dtype=np.int64)
        # entries are integer counts <= n, exact in float64
        common = mat[rows] @ mat
        common[np.arange(len(rows)), rows] = 0.0
        is_mate = common >= threshold
        counts = is_mate.sum(axis=1)
        hits = np.nonzero(counts >= threshold)[0]
        if hits.size:
            i = int(hits[0])
            v = int(rows[i])
            mates = tuple(int(z) for z in np.nonzero(is_mate[i])[0])
            logger.debug("vertex %d has %d mates (threshold %d)", v, len(mates), threshold)
            return MateWitness(v, mates)
    return None


def small_dense_from_witness(
    G: Graph, w: MateWitness, K: Fraction, eps: Fraction, d: Fraction
) -> Graph:
    """The subgraph G[v + N(v) + first ceil(eps*d) mates] of a valid witness."""
    threshold = mate_threshold(eps, d)
    if degree_class(G, w.v, K, d) is not DegreeClass.SMALL:
        raise InvalidWitnessError(f"witness vertex {w.v} is not (K,d)-small")
    mates = sorted(set(w.mates))
    if len(mates) < Fraction(eps) * d:
        raise InvalidWitnessError(f"witness lists {len(mates)} mates, fewer than eps*d")
    for z in mates:
        if z == w.v or common_neighbors(G, w.v, z) < threshold:
            raise InvalidWitnessError(f"{z} is not a mate of {w.v}")
    chosen = mates[:threshold]
    return G.subgraph({w.v} | set(G.neighbors(w.v)) | set(chosen))


def validate_model(G: Graph, model: MinorModel) -> Violation | None:
    seen: dict[int, int] = {}
    for i, bs in enumerate(model.branch_sets):
        if not bs:
            return Violation(i, "empty")
        outside = [v for v in bs if not 0 <= v < G.n]
        if outside:
            return Violation(i, "range", f"vertex {min(outside)} not in host")
        if len(bs) > model.width:
            return Violation(i, "width", f"{len(bs)} > {model.width}")
        for v in bs:
            if v in seen:
                return Violation(i, "disjointness", f"vertex {v} also in branch set {seen[v]}")
            seen[v] = i
        if len(bs) > 1 and not nx.is_connected(G.to_networkx(bs)):
            return Violation(i, "connectivity")
    return None


def _require_valid(G: Graph, model: MinorModel) -> None:
    violation = validate_model(G, model)
    if violation is not None:
        raise InvalidModelError(
            f"branch set {violation.index}: {violation.reason} {violation.detail}".strip()
        )


def model_labels(G: Graph, model: MinorModel) -> tuple[np.ndarray, list[frozenset[int]]]:
    """Contracted id of every host vertex, plus the host set behind every contracted id.

    Branch set ``i`` becomes vertex ``i``; uncovered host vertices follow in ascending id.
    """
    labels = np.full(G.n, -1, dtype=np.int64)
    members: list[frozenset[int]] = []
    for i, bs in enumerate(model.branch_sets):
        for v in bs:
            labels[v] = i
        members.append(bs)
    for v in np.nonzero(labels < 0)[0]:
        labels[v] = len(members)
        members.append(frozenset((int(v),)))
    return labels, members


def _quotient_edges(G: Graph, labels: np.ndarray, size: int) -> np.ndarray:
    if G.e == 0:
        return np.zeros((0, 2), dtype=np.int64)
    arr = G.edge_array
    a, b = labels[arr[:, 0]], labels[arr[:, 1]]
    keep = (a != b) & (a >= 0) & (b >= 0)
    lo, hi = np.minimum(a[keep], b[keep]), np.maximum(a[keep], b[keep])
    keys = np.unique(lo * size + hi)
    return np.stack((keys // size, keys % size), axis=1)


def contracted_edge_count(G: Graph, labels: np.ndarray, size: int) -> int:
    return int(_quotient_edges(G, labels, size).shape[0])


def contract(G: Graph, model: MinorModel) -> Graph:
    _require_valid(G, model)
    labels, members = model_labels(G, model)
    edges = _quotient_edges(G, labels, len(members))
    return Graph.from_edges(len(members), map(tuple, edges.tolist()))


def model_minor(G: Graph, model: MinorModel) -> Graph:
    """The minor whose vertices are exactly the branch sets of ``model``."""
    _require_valid(G, model)
    labels, members = model_labels(G, model)
    nb = len(model.branch_sets)
    labels = np.where(labels < nb, labels, -1)
    edges = _quotient_edges(G, labels, max(nb, 1))
    return Graph.from_edges(nb, map(tuple, edges.tolist()))


def contraction_loss(G: Graph, F: "Forest") -> int:
    """e(G) - e(G/F) with G/F materialised."""
    if F.host is not G and F.host != G:
        raise InvalidModelError("forest belongs to another host")
    labels, members = model_labels(G, F.as_model())
    return G.e - contracted_edge_count(G, labels, len(members))


def _spanning_edges(G: Graph, vertices: frozenset[int]) -> list[Edge]:
    induced = G.to_networkx(vertices)
    if not nx.is_connected(induced):
        raise InvalidModelError("branch set is not connected")
    return [_edge(u, w) for u, w in nx.bfs_edges(induced, min(vertices), sort_neighbors=sorted)]


def lift_subgraph(G: Graph, model: MinorModel, H: Graph) -> Graph:
    """Pull a subgraph of ``contract(G, model)`` back to a subgraph of ``G``.

    ``H.labels`` (or identity, when absent) gives the contracted id of each vertex of H.
    """
    _require_valid(G, model)
    _, members = model_labels(G, model)
    contracted = [H.host_id(x) for x in range(H.n)]
    for x in contracted:
        if not 0 <= x < len(members):
            raise UnknownVertexError(x)
    vertices: set[int] = set()
    edges: set[Edge] = set()
    for x in contracted:
        vertices |= members[x]
        if len(members[x]) > 1:
            edges.update(_spanning_edges(G, members[x]))
    for hx, hy in H.edges():
        x, y = contracted[hx], contracted[hy]
        witness = next(
            (
                _edge(u, w)
                for u in sorted(members[x])
                for w in sorted(G.adjacency[u])
                if w in members[y]
            ),
            None,
        )
        if witness is None:
            raise InvalidModelError(f"no host edge between contracted vertices {x} and {y}")
        edges.add(witness)
    return G.subgraph(vertices, sorted(edges))


class QuotientView:
    """Exact lazy neighbourhoods of ``G/model`` for targeted mate queries."""

    def __init__(self, G: Graph, model: MinorModel) -> None:
        self.G = G
        self.model = model
        self.labels, self.members = model_labels(G, model)
        self._nbrs: dict[int, frozenset[int]] = {}

    @classmethod
    def of_forest(cls, G: Graph, F: "Forest") -> "QuotientView":
        return cls(G, F.as_model())

    @property
    def n(self) -> int:
        return len(self.members)

    def vertex_of(self, v: int) -> int:
        return int(self.labels[v])

    def neighbors(self, x: int) -> frozenset[int]:
        cached = self._nbrs.get(x)
        if cached is None:
            labels = self.labels
            cached = frozenset(
                int(labels[w]) for u in self.members[x] for w in self.G.adjacency[u]
            ) - {x}
            self._nbrs[x] = cached
        return cached

    def degree(self, x: int) -> int:
        return len(self.neighbors(x))

    def common(self, x: int, y: int) -> int:
        return len(self.neighbors(x) & self.neighbors(y))

    def mates_of(self, x: int, eps: Fraction, d: Fraction) -> list[int]:
        threshold = mate_threshold(eps, d)
        counts: Counter[int] = Counter()
        for y in self.neighbors(x):
            counts.update(self.neighbors(y))
        counts.pop(x, None)
        return sorted(z for z, c in counts.items() if c >= threshold)

    def are_mates(self, x: int, y: int, eps: Fraction, d: Fraction) -> bool:
        return self.common(x, y) >= Fraction(eps) * d

    def materialize(self) -> Graph:
        edges = _quotient_edges(self.G, self.labels, self.n)
        return Graph.from_edges(self.n, map(tuple, edges.tolist()))

    def edge_count(self) -> int:
        return contracted_edge_count(self.G, self.labels, self.n)


@dataclass(frozen=True)
class HostFingerprint:
    n: int
    e: int
    digest: str


def host_fingerprint(G: Graph) -> HostFingerprint:
    """(n, e, 64-bit BLAKE2b of the sorted little-endian edge array)."""
    raw = np.ascontiguousarray(G.edge_array, dtype="<i8").tobytes()
    return HostFingerprint(G.n, G.e, hashlib.blake2b(raw, digest_size=8).hexdigest())


@dataclass(frozen=True)
class SmallDense:
    """A small dense subgraph together with the bounds it was extracted under."""

    subgraph: Graph
    v_bound: Fraction
    e_bound: Fraction

    def bounds_hold(self) -> bool:
        return self.subgraph.n <= self.v_bound and self.subgraph.e >= self.e_bound


def witness_v_bound(K: Fraction, eps: Fraction, d: Fraction, width: int = 1) -> Fraction:
    """width * (1 + K*d + ceil(eps*d)): vertices of an extracted (and lifted) subgraph."""
    return width * (1 + Fraction(K) * d + mate_threshold(eps, d))


def witness_e_bound(eps: Fraction, d: Fraction) -> Fraction:
    return (Fraction(eps) * d) ** 2 / 2


def small_dense(G: Graph, w: MateWitness, K: Fraction, eps: Fraction, d: Fraction) -> SmallDense:
    sub = small_dense_from_witness(G, w, K, eps, d)
    return SmallDense(sub, witness_v_bound(K, eps, d), witness_e_bound(eps, d))


def lifted_small_dense(
    G: Graph, model: MinorModel, w: MateWitness, K: Fraction, eps: Fraction, d: Fraction
) -> SmallDense:
    """Extract from ``contract(G, model)`` around ``w`` and pull the result back to G."""
    quotient = contract(G, model)
    sub = small_dense_from_witness(quotient, w, K, eps, d)
    lifted = lift_subgraph(G, model, sub)
    return SmallDense(lifted, witness_v_bound(K, eps, d, model.width), witness_e_bound(eps, d))
