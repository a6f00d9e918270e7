"""Seeded host generators.

Every generator draws from ``numpy.random.Generator(PCG64(seed))``, so a
fixed seed gives the same graph on every platform. Probabilities are
exact rationals: an edge is kept when an integer drawn uniformly from
``[0, q)`` falls below ``p``.
"""

from __future__ import annotations

import logging
from fractions import Fraction

import networkx as nx
import numpy as np

from .errors import PreconditionError, UsageError
from .graph_core import Bipartition, Edge, Graph
from .params import parse_rational

logger = logging.getLogger(__name__)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _check_probability(p: Fraction) -> Fraction:
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise PreconditionError(f"p must lie in [0, 1], got {p}")
    if p.denominator >= 2**63:
        raise PreconditionError(f"denominator of p is too large: {p.denominator}")
    return p


def _bernoulli(rng: np.random.Generator, p: Fraction, size: int) -> np.ndarray:
    return rng.integers(0, p.denominator, size=size, dtype=np.int64) < p.numerator


def gen_gnp(n: int, p: Fraction, seed: int = 0) -> Graph:
    """Erdős–Rényi G(n, p), pairs drawn in lexicographic order."""
    if n < 1:
        raise PreconditionError(f"n must be positive, got {n}")
    p = _check_probability(p)
    rng = _rng(seed)
    rows, cols = np.triu_indices(n, k=1)
    keep = _bernoulli(rng, p, rows.shape[0])
    edges = zip(rows[keep].tolist(), cols[keep].tolist())
    G = Graph.from_edges(n, edges)
    logger.debug("gnp(%d, %s) seed %d: %d edges", n, p, seed, G.e)
    return G


def _attach(rng: np.random.Generator, sources: range, targets: range, degree: int) -> list[Edge]:
    edges: list[Edge] = []
    pool = np.arange(targets.start, targets.stop, dtype=np.int64)
    for s in sources:
        chosen = rng.choice(pool, size=degree, replace=False)
        edges.extend((s, int(t)) for t in np.sort(chosen))
    return edges


def gen_bipartite_host(nB: int, ell: int, degB: int, seed: int = 0) -> tuple[Graph, Bipartition]:
    """|A| = ell*nB vertices (ids first), each joined to degB distinct B-vertices."""
    if nB < 1 or ell < 1:
        raise PreconditionError(f"need nB >= 1 and ell >= 1, got nB={nB}, ell={ell}")
    if not 0 <= degB <= nB:
        raise PreconditionError(f"degB must lie in [0, nB], got {degB}")
    nA = ell * nB
    rng = _rng(seed)
    A, B = range(nA), range(nA, nA + nB)
    G = Graph.from_edges(nA + nB, _attach(rng, A, B, degB))
    return G, Bipartition.of(A, B)


def gen_claw_host(
    nB: int, ell: int, degB: int, a_degree: int, seed: int = 0
) -> tuple[Graph, Bipartition]:
    """A bipartite host plus planted A-side edges of maximum degree ``a_degree``.

    Each planting round pairs up a fresh permutation of A, so a round adds
    at most one A-neighbour per vertex.
    """
    base, part = gen_bipartite_host(nB, ell, degB, seed)
    rng = _rng(seed + 1)
    edges = set(base.edges())
    A = np.arange(len(part.A), dtype=np.int64)
    for _ in range(a_degree):
        order = rng.permutation(A)
        for i in range(0, len(order) - 1, 2):
            u, v = int(order[i]), int(order[i + 1])
            edges.add((min(u, v), max(u, v)))
    return Graph.from_edges(base.n, sorted(edges)), part


def gen_disjoint_cliques(count: int, size: int) -> Graph:
    if count < 0 or size < 1:
        raise PreconditionError(f"need count >= 0 and size >= 1, got {count}, {size}")
    edges = [
        (base + i, base + j)
        for base in range(0, count * size, size)
        for i in range(size)
        for j in range(i + 1, size)
    ]
    return Graph.from_edges(count * size, edges)


def gen_disjoint_petersen(count: int) -> Graph:
    """``count`` disjoint Petersen graphs: 3-regular, girth 5, so no two vertices share two neighbours."""
    petersen = sorted(nx.petersen_graph().edges())
    edges = [(10 * c + u, 10 * c + v) for c in range(count) for u, v in petersen]
    return Graph.from_edges(10 * count, edges)


def gen_pendant_host(core: int, p: Fraction, leaves: int, deg: int, seed: int = 0) -> Graph:
    """A dense G(core, p) with ``leaves`` extra vertices, each joined to ``deg`` core vertices."""
    if not 0 <= deg <= core:
        raise PreconditionError(f"deg must lie in [0, core], got {deg}")
    dense = gen_gnp(core, p, seed)
    rng = _rng(seed + 1)
    pendant = _attach(rng, range(core, core + leaves), range(core), deg)
    return Graph.from_edges(core + leaves, list(dense.edges()) + pendant)


def gen_random_tree(n: int, seed: int = 0) -> Graph:
    """Uniform labelled tree on n vertices via a random Prüfer sequence."""
    if n < 1:
        raise PreconditionError(f"n must be positive, got {n}")
    if n == 1:
        return Graph.from_edges(1, [])
    if n == 2:
        return Graph.from_edges(2, [(0, 1)])
    sequence = _rng(seed).integers(0, n, size=n - 2, dtype=np.int64).tolist()
    T = nx.from_prufer_sequence(sequence)
    return Graph.from_edges(n, sorted((min(u, v), max(u, v)) for u, v in T.edges()))


_GENERATORS = {
    "gnp": (("int", "rational"), lambda a, seed: gen_gnp(a[0], a[1], seed)),
    "bip": (("int", "int", "int"), lambda a, seed: gen_bipartite_host(a[0], a[1], a[2], seed)[0]),
    "claw": (("int", "int", "int", "int"), lambda a, seed: gen_claw_host(*a, seed=seed)[0]),
    "cliques": (("int", "int"), lambda a, seed: gen_disjoint_cliques(a[0], a[1])),
    "petersen": (("int",), lambda a, seed: gen_disjoint_petersen(a[0])),
    "pendant": (("int", "rational", "int", "int"), lambda a, seed: gen_pendant_host(*a, seed=seed)),
    "tree": (("int",), lambda a, seed: gen_random_tree(a[0], seed)),
}


def parse_generator_spec(spec: str, seed: int = 0) -> Graph:
    """Build a host from ``name:arg,arg,...``, e.g. ``gnp:1500,0.18`` or ``cliques:200,4``."""
    name, _, raw = spec.partition(":")
    if name not in _GENERATORS:
        raise UsageError(f"unknown generator {name!r}; choose from {', '.join(sorted(_GENERATORS))}")
    kinds, build = _GENERATORS[name]
    parts = [x.strip() for x in raw.split(",")] if raw else []
    if len(parts) != len(kinds):
        raise UsageError(f"generator {name!r} takes {len(kinds)} arguments, got {len(parts)}")
    args: list[int | Fraction] = []
    for kind, text in zip(kinds, parts):
        if kind == "int":
            try:
                args.append(int(text))
            except ValueError:
                raise UsageError(f"not an integer: {text!r}") from None
        else:
            args.append(parse_rational(text))
    try:
        return build(args, seed)
    except PreconditionError as exc:
        raise UsageError(f"generator {name!r}: {exc}") from exc
