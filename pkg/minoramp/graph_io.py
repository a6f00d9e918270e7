"""Edge-list and DIMACS readers and writers."""

from __future__ import annotations

import logging
import re
from pathlib import Path

from .errors import GraphFormatError
from .graph_core import Edge, Graph, _edge

logger = logging.getLogger(__name__)

DIMACS_SUFFIXES = (".dimacs", ".col", ".dim")

_VERTEX_COUNT = re.compile(r"#\s*vertices\s+(\d+)\s*$")


def _vertex(token: str, lineno: int) -> int:
    try:
        v = int(token)
    except ValueError:
        raise GraphFormatError(f"not a vertex id: {token!r}", lineno) from None
    if v < 0:
        raise GraphFormatError(f"negative vertex id {v}", lineno)
    return v


def parse_edge_list(text: str) -> Graph:
    """Lines ``u v``; ``#`` starts a comment; duplicate edges collapse.

    A ``# vertices N`` comment keeps trailing isolated vertices.
    """
    edges: set[Edge] = set()
    n = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        header = _VERTEX_COUNT.match(raw.strip())
        if header:
            n = max(n, int(header.group(1)))
            continue
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"expected two vertex ids, got {len(parts)} fields", lineno)
        u, v = _vertex(parts[0], lineno), _vertex(parts[1], lineno)
        if u == v:
            raise GraphFormatError("self-loop", lineno)
        edges.add(_edge(u, v))
        n = max(n, u + 1, v + 1)
    return Graph.from_edges(n, sorted(edges))


def parse_dimacs(text: str) -> Graph:
    """DIMACS ``p edge n m`` with 1-indexed ``e u v`` lines, shifted to 0-based ids."""
    n: int | None = None
    declared = 0
    edges: set[Edge] = set()
    duplicates = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split()
        if not parts or parts[0] == "c":
            continue
        tag = parts[0]
        if tag == "p":
            if n is not None:
                raise GraphFormatError("second header", lineno)
            if len(parts) != 4 or parts[1] not in ("edge", "col"):
                raise GraphFormatError("malformed header, expected 'p edge n m'", lineno)
            n, declared = _vertex(parts[2], lineno), _vertex(parts[3], lineno)
        elif tag == "e":
            if n is None:
                raise GraphFormatError("edge line before header", lineno)
            if len(parts) != 3:
                raise GraphFormatError("malformed edge line, expected 'e u v'", lineno)
            u, v = _vertex(parts[1], lineno), _vertex(parts[2], lineno)
            if not (1 <= u <= n and 1 <= v <= n):
                raise GraphFormatError(f"vertex out of range 1..{n}", lineno)
            if u == v:
                raise GraphFormatError("self-loop", lineno)
            edge = _edge(u - 1, v - 1)
            if edge in edges:
                duplicates += 1
            edges.add(edge)
        else:
            raise GraphFormatError(f"unknown line type {tag!r}", lineno)
    if n is None:
        raise GraphFormatError("missing header")
    if duplicates:
        logger.warning("dimacs: %d duplicate edges collapsed", duplicates)
    if declared != len(edges):
        logger.warning("dimacs: header declares %d edges, found %d", declared, len(edges))
    return Graph.from_edges(n, sorted(edges))


def write_edge_list(G: Graph) -> str:
    return f"# vertices {G.n}\n" + "".join(f"{u} {v}\n" for u, v in G.edges())


def write_dimacs(G: Graph) -> str:
    lines = [f"p edge {G.n} {G.e}"]
    lines.extend(f"e {u + 1} {v + 1}" for u, v in G.edges())
    return "\n".join(lines) + "\n"


def read_graph(path: str | Path) -> Graph:
    """Read a host graph, choosing the format by file suffix."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    if path.suffix.lower() in DIMACS_SUFFIXES:
        return parse_dimacs(text)
    return parse_edge_list(text)


def write_graph(G: Graph, path: str | Path) -> None:
    path = Path(path)
    text = write_dimacs(G) if path.suffix.lower() in DIMACS_SUFFIXES else write_edge_list(G)
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
