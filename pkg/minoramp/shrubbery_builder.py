"""Grow a small, mate-free, clean k-shrubbery by exchange moves.

The builder works on the dense core of its input. Each round either
stops (shrubbery large enough, or every uncovered small vertex looks
into big vertices and centroids) or performs one move that strictly
enlarges the forest while keeping it mate-free and clean. A move that
runs out of candidates turns the mate surplus it found into a small
dense subgraph instead.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .errors import InvariantViolation, PreconditionError
from .forest_lab import (
    Forest,
    centroids,
    is_clean,
    is_mate_free,
    is_shrubbery,
    is_small_forest,
    peripheral_piece,
)
from .graph_core import (
    Edge,
    Graph,
    MateWitness,
    QuotientView,
    SmallDense,
    contraction_loss,
    dense_core,
    density,
    lifted_small_dense,
    mates_of,
    small_dense,
    small_vertices,
    unmated_or_witness,
)
from .params import Mode

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MoveRecord:
    kind: str
    vertex: int
    gained: int
    loss_increase: int


@dataclass(frozen=True)
class Moved:
    forest: Forest
    record: MoveRecord


@dataclass(frozen=True)
class ShrubberyOutcome:
    core: Graph
    d: Fraction
    moves: tuple[MoveRecord, ...]
    violations: tuple[str, ...]


@dataclass(frozen=True)
class SmallDenseExit(ShrubberyOutcome):
    small: SmallDense


@dataclass(frozen=True)
class UnbalancedBipartite(ShrubberyOutcome):
    X: frozenset[int]
    Y: frozenset[int]


@dataclass(frozen=True)
class Shrubbery(ShrubberyOutcome):
    forest: Forest


MoveResult = Moved | SmallDense | None


class _MateBook:
    """Memoised (eps, d)-mates in G."""

    def __init__(self, G: Graph, eps: Fraction, d: Fraction) -> None:
        self.G, self.eps, self.d = G, eps, d
        self._mates: dict[int, frozenset[int]] = {}

    def of(self, v: int) -> frozenset[int]:
        found = self._mates.get(v)
        if found is None:
            found = frozenset(mates_of(self.G, v, self.eps, self.d))
            self._mates[v] = found
        return found

    def clash(self, group: frozenset[int] | set[int], other: frozenset[int] | set[int]) -> bool:
        return any(self.of(x) & other for x in group)


def _stalled(strict: bool, message: str) -> None:
    if strict:
        raise InvariantViolation(message)
    logger.debug("%s", message)


def _quotient_witness(
    view: QuotientView, x: int, k: int, K: Fraction, eps: Fraction, d: Fraction
) -> SmallDense | None:
    """Lift the mate surplus of contracted vertex ``x`` when it is small with >= eps*d mates."""
    mates = view.mates_of(x, eps, d)
    if len(mates) < eps * d or view.degree(x) > K * k * d:
        return None
    logger.debug("contracted vertex %d has %d mates", x, len(mates))
    return lifted_small_dense(view.G, view.model, MateWitness(x, tuple(mates)), K * k, eps, d)


def _check_step(strict: bool, kind: str, step: int, eps: Fraction, d: Fraction) -> bool:
    if step <= eps * d + 1:
        return True
    _stalled(strict, f"{kind}: contraction loss grew by {step} > eps*d + 1")
    return False


def move_attach_small_component(
    G: Graph,
    F: Forest,
    v: int,
    k: int,
    K: Fraction,
    eps: Fraction,
    d: Fraction,
    *,
    strict: bool = True,
    mates: _MateBook | None = None,
) -> MoveResult:
    """Hang ``v`` onto a component with fewer than k vertices."""
    mates = mates or _MateBook(G, eps, d)
    mates_v = mates.of(v)
    candidates = [
        comp
        for comp in F.components()
        if len(comp) < k and G.neighbors(v) & comp and not (mates_v & comp)
    ]
    view = QuotientView(G, F.as_model(k))
    qv = view.vertex_of(v)
    for comp in candidates:
        if view.are_mates(qv, view.vertex_of(min(comp)), eps, d):
            continue
        w = min(G.neighbors(v) & comp)
        before = contraction_loss(G, F)
        grown = F.copy()
        grown.add_edge(v, w)
        step = contraction_loss(G, grown) - before
        if not _check_step(strict, "attach", step, eps, d):
            continue
        return Moved(grown, MoveRecord("attach", v, 1, step))
    witness = _quotient_witness(view, qv, k, K, eps, d)
    if witness is not None:
        return witness
    _stalled(strict, f"attach: no admissible small component next to {v}")
    return None


def move_grow_star(
    G: Graph,
    F: Forest,
    v: int,
    k: int,
    K: Fraction,
    eps: Fraction,
    d: Fraction,
    *,
    strict: bool = True,
    mates: _MateBook | None = None,
) -> MoveResult:
    """Start a new star at ``v`` from uncovered small neighbours until it has > k/2 vertices."""
    mates = mates or _MateBook(G, eps, d)
    small = set(small_vertices(G, K, d))
    uncovered = small - F.vertices
    pool = sorted(w for w in G.neighbors(v) if w in uncovered and w not in mates.of(v))
    star: set[int] = {v}
    grown = F.copy()
    grown.add_vertex(v)
    base = contraction_loss(G, F)
    loss = contraction_loss(G, grown)
    while 2 * (len(star) - 1) < k:
        view = QuotientView(G, grown.as_model(k))
        q_star = view.vertex_of(v)
        chosen = None
        for w in pool:
            if w in star or mates.clash({w}, star):
                continue
            if view.are_mates(q_star, view.vertex_of(w), eps, d):
                continue
            chosen = w
            break
        if chosen is None:
            witness = _quotient_witness(view, q_star, k, K, eps, d)
            if witness is not None:
                return witness
            _stalled(strict, f"grow: star at {v} stalled at {len(star)} vertices")
            return None
        grown.add_edge(v, chosen)
        star.add(chosen)
        after = contraction_loss(G, grown)
        if not _check_step(strict, "grow", after - loss, eps, d):
            return None
        loss = after
    leaves = len(star) - 1
    if loss - base > 2 * eps * d * leaves:
        _stalled(strict, f"grow: cumulative loss {loss - base} > 2*eps*d*{leaves}")
        return None
    return Moved(grown, MoveRecord("grow", v, len(star), loss - base))


@dataclass(frozen=True)
class _Graft:
    neighbor: int
    central_edge: Edge
    piece: frozenset[int]
    component: frozenset[int]


def _graft_candidates(G: Graph, F: Forest, v: int, k: int, mates_v: frozenset[int]) -> list[_Graft]:
    grafts = []
    for comp in F.components():
        if len(comp) != k or mates_v & comp:
            continue
        tree = F.component_tree(comp)
        central = centroids(tree)
        touching = sorted(w for w in G.neighbors(v) & comp if w not in central)
        if not touching:
            continue
        edge, piece = peripheral_piece(tree, touching[0])
        grafts.append(_Graft(touching[0], edge, piece, comp))
    return grafts


def move_graft_peripheral(
    G: Graph,
    F: Forest,
    v: int,
    k: int,
    K: Fraction,
    eps: Fraction,
    d: Fraction,
    *,
    strict: bool = True,
    mates: _MateBook | None = None,
) -> MoveResult:
    """Build a tree at ``v`` from peripheral pieces cut off full components."""
    mates = mates or _MateBook(G, eps, d)
    grafts = _graft_candidates(G, F, v, k, mates.of(v))
    tree: set[int] = {v}
    grown = F.copy()
    grown.add_vertex(v)
    base = contraction_loss(G, F)
    loss = contraction_loss(G, grown)
    used: set[frozenset[int]] = set()
    while 2 * len(tree) <= k:
        view = QuotientView(G, grown.as_model(k))
        q_tree = view.vertex_of(v)
        chosen = None
        for graft in grafts:
            if graft.component in used or mates.clash(graft.piece, tree):
                continue
            if view.are_mates(q_tree, view.vertex_of(graft.neighbor), eps, d):
                continue
            chosen = graft
            break
        if chosen is None:
            witness = _quotient_witness(view, q_tree, k, K, eps, d)
            if witness is not None:
                return witness
            _stalled(strict, f"graft: tree at {v} stalled at {len(tree)} vertices")
            return None
        grown.remove_edge(*chosen.central_edge)
        grown.add_edge(v, chosen.neighbor)
        tree |= chosen.piece
        used.add(chosen.component)
        after = contraction_loss(G, grown)
        if not _check_step(strict, "graft", after - loss, eps, d):
            return None
        loss = after
    return Moved(grown, MoveRecord("graft", v, 1, loss - base))


MoveFn = Callable[..., MoveResult]


def _check_theorem_preconditions(k: int, ell: int, K: Fraction, eps: Fraction, d: Fraction) -> list[str]:
    failures = []
    if not K >= k >= ell >= 2:
        failures.append(f"K >= k >= ell >= 2 fails (K={K}, k={k}, ell={ell})")
    if not 0 < eps < Fraction(1, k):
        failures.append(f"eps in (0, 1/k) fails (eps={eps})")
    if d < 2 / eps:
        failures.append(f"d >= 2/eps fails (d={d})")
    return failures


class _Builder:
    def __init__(self, G: Graph, k: int, ell: int, K: Fraction, eps: Fraction, mode: Mode) -> None:
        self.k, self.ell, self.K, self.eps = k, ell, Fraction(K), Fraction(eps)
        self.strict = mode.strict
        self.core = dense_core(G)
        self.d = density(self.core)
        self.n = self.core.n
        self.mates = _MateBook(self.core, self.eps, self.d)
        small = set(small_vertices(self.core, self.K, self.d))
        self.A = frozenset(small)
        self.B = frozenset(range(self.n)) - self.A
        self.forest = Forest(self.core)
        self.moves: list[MoveRecord] = []
        self.violations: list[str] = []
        # vertices whose move was refused in relaxed mode
        self.rejected: set[int] = set()

    def fail(self, message: str, exc: type[Exception] = InvariantViolation) -> None:
        if self.strict:
            raise exc(message)
        logger.warning("%s", message)
        self.violations.append(message)

    def outcome(self, cls: type, **fields) -> ShrubberyOutcome:
        return cls(
            core=self.core,
            d=self.d,
            moves=tuple(self.moves),
            violations=tuple(self.violations),
            **fields,
        )

    def dense_exit(self, small: SmallDense) -> ShrubberyOutcome:
        bound = 3 * self.k**2 * self.K * self.d
        if small.subgraph.n > bound or small.subgraph.e < (self.eps * self.d) ** 2 / 2:
            self.fail(f"small dense exit misses its bounds (v={small.subgraph.n}, e={small.subgraph.e})")
        logger.info("shrubbery: small dense subgraph on %d vertices", small.subgraph.n)
        return self.outcome(SmallDenseExit, small=small)

    def centroid_set(self) -> frozenset[int]:
        found: set[int] = set()
        for comp in self.forest.components():
            if len(comp) == self.k:
                found |= centroids(self.forest.component_tree(comp))
        return frozenset(found)

    def commit(self, moved: Moved) -> None:
        F, before = moved.forest, self.forest.v
        if F.v <= before:
            raise InvariantViolation(f"{moved.record.kind} move did not enlarge the forest")
        checks = {
            "shrubbery": is_shrubbery(F, self.k),
            "mate-free": is_mate_free(self.core, F, self.eps, self.d),
            "clean": is_clean(self.core, F, 2 * self.k * self.eps, self.d),
            "inside A": F.vertices <= self.A,
        }
        broken = [name for name, ok in checks.items() if not ok]
        if broken:
            self.fail(f"{moved.record.kind} move broke: {', '.join(broken)}")
            if not self.strict and "shrubbery" in broken:
                self.rejected.add(moved.record.vertex)
                return
        self.forest = F
        self.moves.append(moved.record)
        if len(self.moves) > self.n:
            raise InvariantViolation("more moves than vertices")
        logger.debug(
            "move %d: %s at %d, v(F) %d -> %d",
            len(self.moves),
            moved.record.kind,
            moved.record.vertex,
            before,
            F.v,
        )

    def try_move(self, fn: MoveFn, v: int, strict: bool) -> MoveResult:
        return fn(self.core, self.forest, v, self.k, self.K, self.eps, self.d, strict=strict, mates=self.mates)

    def unbalanced_exit(self, X: frozenset[int], C: frozenset[int]) -> ShrubberyOutcome:
        Y = self.B | C
        if len(X) < self.ell * len(Y):
            self.fail(f"|X| = {len(X)} < ell*|Y| = {self.ell * len(Y)}")
        if self.k * len(self.B) > 2 * self.n:
            self.fail(f"|B| = {len(self.B)} exceeds 2v/k")
        if self.k * len(C) > 2 * self.n:
            self.fail(f"|C| = {len(C)} exceeds 2v/k")
        need = (1 - 8 * self.k**2 * self.eps) * self.d
        short = [x for x in sorted(X) if len(self.core.neighbors(x) & Y) < need]
        if short:
            self.fail(f"{len(short)} X-vertices have fewer than {need} neighbours in Y")
        logger.info("shrubbery: unbalanced bipartite exit |X|=%d |Y|=%d", len(X), len(Y))
        return self.outcome(UnbalancedBipartite, X=X, Y=frozenset(Y))

    def shrubbery_exit(self) -> ShrubberyOutcome:
        F = self.forest
        coverage_need = (1 - Fraction(2 + 4 * self.ell, self.k)) * self.n
        checks = {
            "shrubbery": is_shrubbery(F, self.k),
            "small": is_small_forest(self.core, F, self.K, self.d),
            "mate-free": is_mate_free(self.core, F, self.eps, self.d),
            "clean": is_clean(self.core, F, 2 * self.k * self.eps, self.d),
            "coverage": F.v >= coverage_need,
        }
        broken = [name for name, ok in checks.items() if not ok]
        if broken:
            self.fail(f"shrubbery exit fails: {', '.join(broken)}")
        logger.info("shrubbery: %d components covering %d of %d vertices", len(F.components()), F.v, self.n)
        return self.outcome(Shrubbery, forest=F)

    def forced_move(self, uncovered: list[int]) -> MoveResult:
        for v in uncovered:
            if v in self.rejected:
                continue
            result = self.try_move(move_grow_star, v, strict=False)
            if result is not None:
                return result
        return None

    def run(self) -> ShrubberyOutcome:
        witness = unmated_or_witness(self.core, self.K, self.eps, self.d)
        if witness is not None:
            return self.dense_exit(small_dense(self.core, witness, self.K, self.eps, self.d))

        k, eps, d = self.k, self.eps, self.d
        leftover_bound = 8 * k * k * eps * d
        branches: list[tuple[str, MoveFn, Fraction]] = [
            ("attach", move_attach_small_component, 2 * k * eps * d),
            ("grow", move_grow_star, 4 * k * eps * d),
            ("graft", move_graft_peripheral, 4 * k * k * eps * d),
        ]
        while True:
            F = self.forest
            uncovered = sorted(self.A - F.vertices)
            C = self.centroid_set()
            if len(uncovered) * k <= 4 * self.ell * self.n:
                if not F.is_empty():
                    return self.shrubbery_exit()
                result = self.forced_move(uncovered)
                if isinstance(result, SmallDense):
                    return self.dense_exit(result)
                if result is None:
                    logger.info("shrubbery: no forced move available on an empty forest")
                    return self.unbalanced_exit(frozenset(uncovered), C)
                self.commit(result)
                continue

            outside = self.B | C
            violating = [
                v for v in uncovered if len(self.core.neighbors(v) - outside) > leftover_bound
            ]
            if not violating:
                return self.unbalanced_exit(frozenset(uncovered), C)

            result = self.dispatch(violating, branches, C)
            if isinstance(result, SmallDense):
                return self.dense_exit(result)
            if result is None:
                self.violations.append(f"{len(violating)} uncovered vertices exceed the leftover bound")
                return self.unbalanced_exit(frozenset(uncovered), C)
            self.commit(result)

    def dispatch(
        self, violating: list[int], branches: list[tuple[str, MoveFn, Fraction]], C: frozenset[int]
    ) -> MoveResult:
        F = self.forest
        uncovered = self.A - F.vertices
        in_small = {x for comp in F.components() if len(comp) < self.k for x in comp}
        in_full = {x for comp in F.components() if len(comp) == self.k for x in comp} - C
        pools = {"attach": in_small, "grow": uncovered, "graft": in_full}
        for v in violating if self.strict else [x for x in violating if x not in self.rejected]:
            fired = False
            for name, fn, threshold in branches:
                count = len(self.core.neighbors(v) & pools[name])
                if count > threshold or (not self.strict and count > 0):
                    fired = True
                    result = self.try_move(fn, v, strict=self.strict)
                    if result is not None:
                        return result
            if self.strict and not fired:
                raise InvariantViolation(f"vertex {v} exceeds the leftover bound but no move applies")
        return None


def build_shrubbery(
    G: Graph, k: int, ell: int, K: Fraction | int, eps: Fraction, mode: Mode = Mode.THEOREM
) -> ShrubberyOutcome:
    """Run the exchange loop on the dense core of G.

    Theorem mode raises on violated preconditions and on any broken
    guarantee; relaxed mode records both in ``violations``.
    """
    K, eps = Fraction(K), Fraction(eps)
    if k < 2 or ell < 1:
        raise PreconditionError(f"need k >= 2 and ell >= 1, got k={k}, ell={ell}")
    if not 0 < eps < 1:
        raise PreconditionError(f"eps must lie in (0, 1), got {eps}")
    builder = _Builder(G, k, ell, K, eps, mode)
    failures = _check_theorem_preconditions(k, ell, K, eps, builder.d)
    for failure in failures:
        builder.fail(failure, PreconditionError)
    logger.info("shrubbery: core has %d of %d vertices, d = %s", builder.n, G.n, builder.d)
    return builder.run()
