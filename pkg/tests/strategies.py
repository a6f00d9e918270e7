"""Hypothesis strategies for hosts, trees and forests."""

from __future__ import annotations

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from minoramp.errors import NotAForestError
from minoramp.forest_lab import Forest
from minoramp.graph_core import Graph

PROPERTY_SETTINGS = settings(
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)


@st.composite
def graphs(draw, min_n: int = 1, max_n: int = 12, min_edges: int = 0) -> Graph:
    n = draw(st.integers(min_value=min_n, max_value=max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, min_size=min(min_edges, len(pairs)))) if pairs else []
    return Graph.from_edges(n, chosen)


@st.composite
def trees(draw, min_n: int = 1, max_n: int = 30) -> Graph:
    n = draw(st.integers(min_value=min_n, max_value=max_n))
    parents = [draw(st.integers(min_value=0, max_value=v - 1)) for v in range(1, n)]
    return Graph.from_edges(n, [(p, v) for v, p in enumerate(parents, start=1)])


@st.composite
def hosts_with_forests(draw, min_n: int = 2, max_n: int = 12) -> tuple[Graph, Forest]:
    G = draw(graphs(min_n=min_n, max_n=max_n, min_edges=1))
    edges = list(G.edges())
    picked = draw(st.lists(st.sampled_from(edges), unique=True)) if edges else []
    F = Forest(G)
    for u, v in picked:
        try:
            F.add_edge(u, v)
        except NotAForestError:
            pass
    return G, F
