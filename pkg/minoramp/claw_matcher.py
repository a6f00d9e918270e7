"""Claw-matchings in unbalanced bipartite graphs and the bounded minors they give.

The pipeline is: alternating-path augmentation of a star matching, the
mate-free variant over the mate-augmented graph, bad-pair cleaning, and
finally contraction of the cleaned claws into an (ell+1)-bounded minor.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .errors import InvariantViolation, PreconditionError
from .forest_lab import (
    Forest,
    StarMode,
    bad_pair_counts,
    bad_pairs,
    is_claw_matching,
    is_clean,
    is_mate_free,
    is_small_forest,
    star_shape,
)
from .graph_core import (
    Bipartition,
    Edge,
    Graph,
    MateWitness,
    MinorModel,
    QuotientView,
    SmallDense,
    _edge,
    density,
    lifted_small_dense,
    mates_of,
    model_minor,
    small_dense,
    unmated_or_witness,
)
from .params import Mode, ceil_fraction

logger = logging.getLogger(__name__)

AugmentHook = Callable[[Forest, tuple[Edge, ...]], None]

_wording_logged = False


@dataclass
class AlternationState:
    forest: Forest
    origin: int
    reach: dict[int, int] = field(default_factory=dict)
    entered: dict[int, int] = field(default_factory=dict)
    depth: dict[int, int] = field(default_factory=dict)

    def path_to(self, v: int) -> list[int]:
        """Vertices of the alternating path from the origin to ``v``."""
        if v not in self.reach:
            raise PreconditionError(f"{v} is not reachable from {self.origin}")
        path = [v]
        x = self.reach[v]
        while True:
            path.append(x)
            if x == self.origin:
                break
            y = self.entered[x]
            path.append(y)
            x = self.reach[y]
        path.reverse()
        return path

    def path_edges(self, v: int) -> list[Edge]:
        path = self.path_to(v)
        return [_edge(a, b) for a, b in zip(path, path[1:])]


def _closes_forest_triangle(G: Graph, F0: Forest, x: int, y: int) -> bool:
    """True if xy sits in a triangle of G together with an edge of F0."""
    for z in F0.neighbors(x):
        if z != y and G.has_edge(z, y):
            return True
    for z in F0.neighbors(y):
        if z != x and G.has_edge(z, x):
            return True
    return False


def alternating_reachability(G: Graph, part: Bipartition, F0: Forest, u: int) -> AlternationState:
    if u not in part.A:
        raise PreconditionError(f"origin {u} is not in A")
    if u in F0:
        raise PreconditionError(f"origin {u} is already covered")
    state = AlternationState(F0, u)
    depth_a = {u: 0}
    queue = deque([u])
    while queue:
        x = queue.popleft()
        for y in sorted(G.neighbors(x)):
            if y not in part.B or y in state.reach or F0.has_edge(x, y):
                continue
            if _closes_forest_triangle(G, F0, x, y):
                continue
            state.reach[y] = x
            state.depth[y] = depth_a[x] + 1
            if F0.degree(y) == 1:
                (z,) = F0.neighbors(y)
                if z not in depth_a:
                    depth_a[z] = state.depth[y] + 1
                    state.entered[z] = y
                    queue.append(z)
    return state


def _check_claw_preconditions(G: Graph, part: Bipartition, ell: int, dA: Fraction) -> None:
    if ell < 1:
        raise PreconditionError(f"ell must be positive, got {ell}")
    if len(part.A) < ell * len(part.B):
        raise PreconditionError(f"|A| = {len(part.A)} < ell*|B| = {ell * len(part.B)}")
    for a in sorted(part.A):
        nbrs = G.neighbors(a)
        into_b = len(nbrs & part.B)
        into_a = len(nbrs & part.A)
        if into_b <= ell * dA:
            raise PreconditionError(f"vertex {a} has {into_b} B-neighbours, needs > {ell * dA}")
        if into_a > dA:
            raise PreconditionError(f"vertex {a} has {into_a} A-neighbours, allowed {dA}")


def _check_augmentation(
    G: Graph, part: Bipartition, ell: int, F0: Forest, path: list[Edge], covered: int
) -> None:
    if len(F0.vertices & part.A) != covered + 1:
        raise InvariantViolation("augmentation did not cover exactly one new A-vertex")
    touched = {x for e in path for x in e}
    for comp in {F0.component_of(x) for x in touched if x in F0}:
        shape = star_shape(F0, comp, part)
        if shape is None or not 1 <= len(shape.leaves) <= ell:
            raise InvariantViolation(f"augmentation broke the star around {sorted(comp)}")
        leaves = sorted(shape.leaves)
        for i, x in enumerate(leaves):
            if any(G.has_edge(x, y) for y in leaves[i + 1:]):
                raise InvariantViolation(f"augmentation made the star at {shape.center} non-induced")


def _log_size_wording() -> None:
    global _wording_logged
    if not _wording_logged:
        _wording_logged = True
        logger.warning(
            "blocked B-vertices carry exactly ell leaves (ell+1 vertices per component), "
            "not ell vertices as the size wording suggests"
        )


def build_claw_matching(
    G: Graph,
    part: Bipartition,
    ell: int,
    dA: Fraction | int,
    on_augment: AugmentHook | None = None,
) -> Forest:
    """Grow an ell-claw-matching from B to A by alternating-path augmentation.

    Uncovered A-vertices are processed in ascending order. The first one
    that cannot be augmented ends the search; the stars around the
    B-vertices it can reach are returned.
    """
    dA = Fraction(dA)
    _check_claw_preconditions(G, part, ell, dA)
    F0 = Forest(G)
    result: Forest | None = None
    augmentations = 0
    for u in sorted(part.A):
        if u in F0:
            continue
        state = alternating_reachability(G, part, F0, u)
        open_ends = [v for v in state.reach if F0.degree(v) <= ell - 1]
        if open_ends:
            v = min(open_ends, key=lambda b: (state.depth[b], b))
            path = state.path_edges(v)
            covered = len(F0.vertices & part.A)
            grown = F0.copy()
            grown.toggle(path)
            _check_augmentation(G, part, ell, grown, path, covered)
            F0 = grown
            augmentations += 1
            logger.debug("augmented %d -> %d along %d edges", u, v, len(path))
            if on_augment is not None:
                on_augment(F0, tuple(path))
            continue
        blocked = set(state.reach)
        for v in sorted(blocked):
            if F0.degree(v) != ell:
                raise InvariantViolation(f"blocked B-vertex {v} has {F0.degree(v)} leaves, expected {ell}")
        _log_size_wording()
        kept = [c for c in F0.components() if c & blocked]
        result = Forest(G, [e for c in kept for e in F0.component_edges(c)])
        logger.debug("vertex %d blocked; keeping %d claws", u, len(kept))
        break
    if result is None:
        result = F0
    logger.info("claw matching: %d augmentations, %d claws", augmentations, len(result.components()))

    if not result.is_empty() and not is_claw_matching(G, result, part, ell, StarMode.EXACTLY):
        raise InvariantViolation("result is not an ell-claw-matching")
    covered_b = result.vertices & part.B
    for a in sorted(result.vertices & part.A):
        outside = len((G.neighbors(a) & part.B) - covered_b)
        if outside > dA:
            raise InvariantViolation(f"leaf {a} has {outside} B-neighbours outside the matching")
    return result


def bipartite_edges(G: Graph, part: Bipartition) -> Graph:
    """Spanning subgraph of G keeping only A-B edges (same ids and labels)."""
    edges = [(a, b) for a in sorted(part.A) for b in sorted(G.neighbors(a)) if b in part.B]
    return Graph.from_edges(G.n, edges, labels=G.labels)


def mate_free_claw_matching(
    G: Graph, part: Bipartition, ell: int, eps0: Fraction, d0: Fraction
) -> Forest | MateWitness:
    eps0, d0 = Fraction(eps0), Fraction(d0)
    if not 0 < eps0 < Fraction(1, ell):
        raise PreconditionError(f"eps0 must lie in (0, 1/ell), got {eps0}")
    bip = bipartite_edges(G, part)
    if len(part.A) < ell * len(part.B):
        raise PreconditionError(f"|A| = {len(part.A)} < ell*|B| = {ell * len(part.B)}")
    for a in sorted(part.A):
        if bip.degree(a) < d0:
            raise PreconditionError(f"vertex {a} has {bip.degree(a)} B-neighbours, needs {d0}")

    mate_edges: list[Edge] = []
    dA = 0
    for a in sorted(part.A):
        mates = [z for z in mates_of(bip, a, eps0, d0) if z in part.A]
        if len(mates) >= eps0 * d0:
            logger.debug("A-vertex %d has %d mates", a, len(mates))
            return MateWitness(a, tuple(mates))
        dA = max(dA, len(mates))
        mate_edges.extend((a, z) for z in mates if a < z)

    augmented = Graph.from_edges(G.n, list(bip.edges()) + mate_edges, labels=G.labels)
    claws = build_claw_matching(augmented, part, ell, dA)
    return Forest(G, claws.edges())


def regularize_a_side(G: Graph, part: Bipartition, F: Forest, target: Fraction) -> Graph:
    """Keep, for every A-vertex, its forest edges plus lowest-id B-neighbours up to ceil(target)."""
    want = ceil_fraction(Fraction(target))
    edges: list[Edge] = []
    for a in sorted(part.A):
        keep = [b for b in sorted(F.neighbors(a)) if b in part.B]
        for b in sorted(G.neighbors(a)):
            if len(keep) >= want:
                break
            if b in part.B and b not in keep:
                keep.append(b)
        edges.extend((a, b) for b in keep)
    return Graph.from_edges(G.n, edges, labels=G.labels)


@dataclass(frozen=True)
class CleanForest:
    forest: Forest
    swaps: int
    dropped: tuple[frozenset[int], ...]
    bad_pair_history: tuple[int, ...]
    coverage: Fraction
    violations: tuple[str, ...] = ()


@dataclass(frozen=True)
class BoundedMinor:
    model: MinorModel
    measured_density: Fraction
    bounds: dict[str, Fraction]
    met: tuple[str, ...]
    clean: CleanForest
    violations: tuple[str, ...] = ()


def _violation(strict: bool, violations: list[str], message: str, exc: type[Exception] = PreconditionError) -> None:
    if strict:
        raise exc(message)
    logger.warning("%s", message)
    violations.append(message)


def _crossing_edges(G: Graph, left: frozenset[int], right: frozenset[int]) -> list[Edge]:
    return sorted(_edge(x, y) for x in left for y in G.neighbors(x) if y in right)


def clean_claw_matching(
    G: Graph,
    part: Bipartition,
    F1: Forest,
    ell: int,
    K: Fraction,
    eps1: Fraction,
    d1: Fraction,
    mode: Mode = Mode.THEOREM,
) -> CleanForest | SmallDense:
    """Drop claws with a big vertex, then swap along 4-cycles until no edge is in too many bad pairs."""
    K, eps1, d1 = Fraction(K), Fraction(eps1), Fraction(d1)
    strict = mode.strict
    violations: list[str] = []
    domain = part.A | part.B
    if F1.vertices != domain:
        raise PreconditionError("the claw matching must cover both sides exactly")
    if len(part.A) != ell * len(part.B):
        _violation(strict, violations, f"|A| = {len(part.A)} differs from ell*|B| = {ell * len(part.B)}")
    if eps1 * d1 < 1:
        _violation(strict, violations, f"d1 >= 1/eps1 fails (eps1*d1 = {eps1 * d1})")
    if not is_claw_matching(G, F1, part, ell, StarMode.EXACTLY):
        raise PreconditionError("input is not an ell-claw-matching")
    if not is_mate_free(G, F1, eps1, d1):
        _violation(strict, violations, "input claw matching is not mate-free")

    bound = K * d1
    big = {v for v in domain if G.degree(v) > bound}
    dropped = tuple(c for c in F1.components() if c & big)
    F = F1.copy()
    F.remove_vertices(v for c in dropped for v in c)
    logger.info("cleaning: dropped %d claws containing big vertices", len(dropped))

    limit = ell * (eps1 * d1 + 1)
    pairs = bad_pairs(G, F)
    history = [len(pairs)]
    swaps = 0
    while True:
        counts = bad_pair_counts(pairs)
        worst = sorted(e for e, c in counts.items() if c > limit)
        if not worst:
            break
        e = worst[0]
        model = F.as_model(ell + 1)
        view = QuotientView(G, model)
        witness = unmated_or_witness(view.materialize(), K * (ell + 1), eps1, d1)
        if witness is not None:
            logger.info("cleaning: mate witness in the contracted graph after %d swaps", swaps)
            return lifted_small_dense(G, model, witness, K * (ell + 1), eps1, d1)

        home = F.component_of(e[0])
        v_home = view.vertex_of(e[0])
        candidates = []
        for pair in pairs:
            if e not in pair:
                continue
            (other,) = pair - {e}
            mate = view.are_mates(v_home, view.vertex_of(other[0]), eps1, d1)
            candidates.append((mate, other))
        candidates.sort()

        swapped = False
        for _, other in candidates:
            away = F.component_of(other[0])
            cycle = [e, other] + _crossing_edges(G, home, away)
            trial = F.copy()
            trial.toggle(cycle)
            if not is_claw_matching(G, trial, part, ell, StarMode.EXACTLY):
                continue
            changed = [trial.component_of(x) for x in e]
            if not all(is_mate_free(G, Forest(G, trial.component_edges(c)), eps1, d1) for c in changed):
                continue
            trial_pairs = bad_pairs(G, trial)
            if len(trial_pairs) >= len(pairs):
                continue
            F, pairs = trial, trial_pairs
            swaps += 1
            history.append(len(pairs))
            swapped = True
            logger.debug("swap %d on %s/%s: %d bad pairs left", swaps, e, other, len(pairs))
            break
        if not swapped:
            _violation(
                strict,
                violations,
                f"no improving swap for edge {e} in {counts[e]} bad pairs",
                InvariantViolation,
            )
            break

    coverage = Fraction(F.v, len(domain)) if domain else Fraction(0)
    literal = 1 - Fraction(ell, ell + 1) / K
    if coverage < literal:
        logger.warning("cleaning kept %s of the vertices, below the stated %s", coverage, literal)
        violations.append(f"coverage {coverage} below {literal}")
    if not F.is_empty():
        if not is_clean(G, F, ell * ell * eps1, d1):
            _violation(strict, violations, "cleaned claw matching is not clean", InvariantViolation)
        if not is_small_forest(G, F, K, d1):
            _violation(strict, violations, "cleaned claw matching is not small", InvariantViolation)
        if not is_mate_free(G, F, eps1, d1):
            _violation(strict, violations, "cleaned claw matching is not mate-free", InvariantViolation)
    logger.info("cleaning: %d swaps, bad pairs %d -> %d", swaps, history[0], history[-1])
    return CleanForest(F, swaps, dropped, tuple(history), coverage, tuple(violations))


def bipartite_theorem_bound(ell: int, eps0: Fraction, d0: Fraction) -> Fraction:
    return Fraction(ell, 2) * (1 - 3 * ell**3 * eps0) * d0


def bipartite_stated_bound(ell: int, eps0: Fraction, d0: Fraction) -> Fraction:
    """The stronger form quoted when the bipartite step is used downstream."""
    return ell * (1 - 3 * ell**2 * eps0) * d0


def bipartite_dense_minor(
    H: Graph,
    part: Bipartition,
    ell: int,
    K: Fraction,
    eps0: Fraction,
    d0: Fraction,
    mode: Mode = Mode.THEOREM,
) -> SmallDense | BoundedMinor:
    """Small dense subgraph of H, or an (ell+1)-bounded minor of H of density about ell*d0."""
    K, eps0, d0 = Fraction(K), Fraction(eps0), Fraction(d0)
    strict = mode.strict
    violations: list[str] = []
    X, Y = part.A, part.B
    if not 0 < eps0 < Fraction(1, ell):
        raise PreconditionError(f"eps0 must lie in (0, 1/ell), got {eps0}")
    if len(X) < ell * len(Y):
        raise PreconditionError(f"|X| = {len(X)} < ell*|Y| = {ell * len(Y)}")
    for x in sorted(X):
        if len(H.neighbors(x) & Y) < d0:
            raise PreconditionError(f"vertex {x} has fewer than {d0} neighbours in Y")
    if K < ell:
        _violation(strict, violations, f"K >= ell fails (K = {K})")
    if d0 * eps0 < 1:
        _violation(strict, violations, f"d0 >= 1/eps0 fails (d0 = {d0})")
    if ceil_fraction(d0) > K * d0:
        raise PreconditionError(f"ceil(d0) = {ceil_fraction(d0)} exceeds K*d0; X-vertices would be big")

    regular = regularize_a_side(H, part, Forest(H), d0)
    witness = unmated_or_witness(regular, K, eps0, d0)
    if witness is None:
        found = mate_free_claw_matching(regular, part, ell, eps0, d0)
    else:
        found = witness
    if isinstance(found, MateWitness):
        logger.info("bipartite step: vertex %d has too many mates", found.v)
        return small_dense(regular, found, K, eps0, d0)

    F1 = found
    inner = Bipartition(F1.vertices & X, F1.vertices & Y)
    d1 = d0 * (1 - eps0)
    eps1 = eps0 / (1 - eps0)
    core = regularize_a_side(regular, inner, F1, d1)
    cleaned = clean_claw_matching(core, inner, Forest(core, F1.edges()), ell, K, eps1, d1, mode)
    if isinstance(cleaned, SmallDense):
        return cleaned

    F = cleaned.forest
    covered = F.vertices
    branch_sets = list(F.components()) + [frozenset((v,)) for v in sorted(inner.A | inner.B) if v not in covered]
    model = MinorModel.of(branch_sets, ell + 1)
    measured = density(model_minor(H, model))
    bounds = {
        "bipartite": bipartite_theorem_bound(ell, eps0, d0),
        "bipartite_stated": bipartite_stated_bound(ell, eps0, d0),
    }
    met = tuple(name for name, value in bounds.items() if measured >= value)
    if "bipartite" not in met:
        _violation(
            strict, violations, f"bounded minor density {measured} below {bounds['bipartite']}", InvariantViolation
        )
    if "bipartite_stated" not in met:
        logger.warning(
            "bounded minor density %s is below the stronger quoted bound %s",
            measured,
            bounds["bipartite_stated"],
        )
    logger.info("bipartite step: %d branch sets, density %s", len(branch_sets), measured)
    return BoundedMinor(
        model, measured, bounds, met, cleaned, tuple(violations) + cleaned.violations
    )
