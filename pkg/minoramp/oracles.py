"""Brute-force oracles and the ``selftest`` suite that runs them against the fast paths."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx
import numpy as np

from .errors import NotAForestError
from .forest_lab import BadPair, Forest, bad_pairs, centroids, edge_contraction_loss
from .generators import gen_gnp, gen_random_tree
from .graph_core import (
    Graph,
    MinorModel,
    _edge,
    contract,
    contraction_loss,
    dense_core,
    density,
    unmated_or_witness,
)

logger = logging.getLogger(__name__)


def brute_centroids(T: nx.Graph) -> frozenset[int]:
    """Vertices whose removal leaves no component larger than half the tree."""
    n = T.number_of_nodes()
    found = set()
    for v in T.nodes:
        rest = nx.restricted_view(T, [v], [])
        if all(2 * len(c) <= n for c in nx.connected_components(rest)):
            found.add(v)
    return frozenset(found)


def brute_contraction_loss(G: Graph, F: Forest) -> int:
    H = G.to_networkx()
    for comp in F.components():
        root, *others = sorted(comp)
        for w in others:
            H = nx.contracted_nodes(H, root, w, self_loops=False)
    return G.e - H.number_of_edges()


def brute_edge_loss(G: Graph, u: int, v: int, H: nx.Graph | None = None) -> int:
    """Edges lost by contracting uv, measured on a networkx copy (``H`` may be passed in)."""
    base = G.to_networkx() if H is None else H
    merged = nx.contracted_nodes(base, u, v, self_loops=False)
    return G.e - merged.number_of_edges()


def brute_bad_pairs(G: Graph, F: Forest) -> set[BadPair]:
    """Every pair of forest edges closing a 4-cycle that carries all edges between their trees."""
    comps = F.components()
    owner = {v: i for i, comp in enumerate(comps) for v in comp}
    found: set[BadPair] = set()
    for f1, f2 in itertools.combinations(F.edges(), 2):
        i, j = owner[f1[0]], owner[f2[0]]
        if i == j:
            continue
        between = [
            (x, y) for x in comps[i] for y in comps[j] if G.has_edge(x, y)
        ]
        if len(between) != 2:
            continue
        (a, c), (b, e) = f1, f2
        for matching in (((a, b), (c, e)), ((a, e), (c, b))):
            if all(G.has_edge(x, y) for x, y in matching) and set(matching) == set(between):
                found.add(frozenset((f1, f2)))
    return found


def brute_mates(G: Graph, v: int, eps: Fraction, d: Fraction) -> list[int]:
    return [
        u
        for u in range(G.n)
        if u != v and sum(1 for w in range(G.n) if G.has_edge(u, w) and G.has_edge(v, w)) >= eps * d
    ]


def brute_unmated_witness(G: Graph, K: Fraction, eps: Fraction, d: Fraction) -> int | None:
    """Smallest small vertex with at least eps*d mates, or None."""
    for v in range(G.n):
        if G.degree(v) <= K * d and len(brute_mates(G, v, eps, d)) >= eps * d:
            return v
    return None


def brute_quotient(G: Graph, model: MinorModel) -> nx.Graph:
    labels = {}
    for i, bs in enumerate(model.branch_sets):
        for v in bs:
            labels[v] = i
    nxt = len(model.branch_sets)
    for v in range(G.n):
        if v not in labels:
            labels[v] = nxt
            nxt += 1
    Q = nx.Graph()
    Q.add_nodes_from(range(nxt))
    Q.add_edges_from((labels[u], labels[v]) for u, v in G.edges() if labels[u] != labels[v])
    return Q


def brute_dense_core_density(G: Graph) -> Fraction:
    """Largest density over all induced subgraphs; only for tiny graphs."""
    best = Fraction(0)
    for size in range(1, G.n + 1):
        for subset in itertools.combinations(range(G.n), size):
            best = max(best, Fraction(G.induced_edge_count(subset), size))
    return best


def random_forest(G: Graph, rng: np.random.Generator, keep: Fraction = Fraction(1, 2)) -> Forest:
    F = Forest(G)
    edges = list(G.edges())
    for idx in rng.permutation(len(edges)).tolist():
        if rng.integers(0, keep.denominator) >= keep.numerator:
            continue
        try:
            F.add_edge(*edges[idx])
        except NotAForestError:
            pass
    return F


@dataclass
class OracleResult:
    name: str
    cases: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def check(self, condition: bool, detail: str) -> None:
        self.cases += 1
        if not condition:
            self.failures.append(detail)
            logger.warning("%s: %s", self.name, detail)


def selftest(seed: int = 0, rounds: int = 20) -> list[OracleResult]:
    """Compare every fast path against its brute-force oracle on seeded small hosts."""
    rng = np.random.Generator(np.random.PCG64(seed))
    results = []

    res = OracleResult("centroids")
    for i in range(rounds):
        n = int(rng.integers(1, 40))
        T = gen_random_tree(n, seed + i).to_networkx()
        res.check(centroids(T) == brute_centroids(T), f"tree seed {seed + i}")
    results.append(res)

    res = OracleResult("edge loss")
    for i in range(rounds):
        G = gen_gnp(30, Fraction(1, 4), seed + i)
        for u, v in list(G.edges())[:10]:
            res.check(edge_contraction_loss(G, u, v) == brute_edge_loss(G, u, v), f"edge {u}-{v} seed {seed + i}")
    results.append(res)

    res = OracleResult("contraction")
    for i in range(rounds):
        G = gen_gnp(20, Fraction(1, 5), seed + i)
        F = random_forest(G, rng)
        res.check(contraction_loss(G, F) == brute_contraction_loss(G, F), f"loss seed {seed + i}")
        Q = contract(G, F.as_model())
        res.check(set(Q.edges()) == {_edge(*e) for e in brute_quotient(G, F.as_model()).edges()}, f"quotient seed {seed + i}")
    results.append(res)

    res = OracleResult("bad pairs")
    for i in range(rounds):
        for p in (Fraction(1, 5), Fraction(2, 5), Fraction(3, 5)):
            G = gen_gnp(10, p, seed + i)
            F = random_forest(G, rng)
            res.check(bad_pairs(G, F) == brute_bad_pairs(G, F), f"p={p} seed {seed + i}")
    results.append(res)

    res = OracleResult("unmated")
    for i in range(rounds):
        G = gen_gnp(16, Fraction(1, 3), seed + i)
        if G.e == 0:
            continue
        d = density(G)
        K, eps = Fraction(2), Fraction(1, 2)
        if eps * d <= 0:
            continue
        w = unmated_or_witness(G, K, eps, d)
        res.check((None if w is None else w.v) == brute_unmated_witness(G, K, eps, d), f"seed {seed + i}")
    results.append(res)

    res = OracleResult("dense core")
    for i in range(rounds):
        G = gen_gnp(9, Fraction(2, 5), seed + i)
        if G.e == 0:
            continue
        core = dense_core(G)
        res.check(density(core) >= density(G), f"core thinner than host, seed {seed + i}")
        res.check(density(core) <= brute_dense_core_density(G), f"core above optimum, seed {seed + i}")
    results.append(res)

    for r in results:
        logger.info("selftest %s: %d cases, %d failures", r.name, r.cases, len(r.failures))
    return results
