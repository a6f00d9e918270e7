"""Density amplification pipeline, parameter arithmetic and forced-pair search."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

from .certificates import (
    ELL_MINOR,
    K_MINOR,
    SMALL_DENSE,
    Bound,
    Certificate,
    theorem_bounds,
    verify_certificate,
)
from .claw_matcher import BoundedMinor, bipartite_dense_minor
from .errors import EmptyGraphError, InvariantViolation, PreconditionError
from .graph_core import (
    Bipartition,
    Graph,
    MinorModel,
    SmallDense,
    dense_core,
    density,
    host_fingerprint,
    lift_subgraph,
    model_minor,
)
from .params import DEFAULT_DEPTH_LIMIT, ForcedParams, Mode, Params
from .shrubbery_builder import (
    Shrubbery,
    ShrubberyOutcome,
    SmallDenseExit,
    UnbalancedBipartite,
    build_shrubbery,
)

logger = logging.getLogger(__name__)


def _to_host(G: Graph, core: Graph, vertices) -> tuple[int, ...]:
    return tuple(sorted(G.index_of(core.host_id(v)) for v in vertices))


def _fail(strict: bool, violations: list[str], message: str) -> None:
    if strict:
        raise InvariantViolation(message)
    logger.warning("%s", message)
    violations.append(message)


class _CertificateBuilder:
    """Turns one shrubbery outcome into a certificate on the original host."""

    def __init__(self, G: Graph, params: Params, mode: Mode, outcome: ShrubberyOutcome) -> None:
        self.G = G
        self.params = params
        self.mode = mode
        self.strict = mode.strict
        self.outcome = outcome
        self.d = outcome.d
        self.violations: list[str] = list(outcome.violations)

    def _base(self, **fields) -> Certificate:
        return Certificate(
            mode=self.mode,
            params=self.params.with_density(self.d),
            fingerprint=host_fingerprint(self.G),
            reference_density=self.d,
            moves=len(self.outcome.moves),
            violations=tuple(dict.fromkeys(self.violations)),
            **fields,
        )

    def small(self, small: SmallDense, swaps: int = 0) -> Certificate:
        k, d = self.params.k, self.d
        sub = small.subgraph
        vertices = tuple(sorted(self.G.index_of(sub.host_id(x)) for x in range(sub.n)))
        v, e = len(vertices), self.G.induced_edge_count(vertices)
        v_rule, e_rule = theorem_bounds(SMALL_DENSE, self.params, d)
        bounds = (v_rule, Bound("v_le_3k3d", "vertices", "<=", 3 * k**3 * d), e_rule)
        met = tuple(b.name for b in bounds if b.holds(v if b.quantity == "vertices" else e))
        if self.strict:
            if "v_le_6k3d" not in met or "e_ge_eps2d2" not in met:
                raise InvariantViolation(f"small dense subgraph misses its bounds (v={v}, e={e})")
            v_bound, e_bound = bounds[0].value, bounds[2].value
        else:
            for b in bounds:
                if b.name not in met and b.name != "v_le_3k3d":
                    self.violations.append(f"{b.name} fails (v={v}, e={e})")
            v_bound, e_bound = Fraction(v), Fraction(e)
        logger.info("amplify: small dense subgraph, v=%d e=%d", v, e)
        return self._base(
            outcome=SMALL_DENSE,
            vertices=vertices,
            v_bound=v_bound,
            e_bound=e_bound,
            bounds=bounds,
            met=met,
            swaps=swaps,
        )

    def _minor(
        self, outcome: str, model: MinorModel, claim_name: str, bounds: tuple[Bound, ...], swaps: int = 0
    ) -> Certificate:
        core = self.outcome.core
        branch_sets = tuple(_to_host(self.G, core, bs) for bs in model.branch_sets)
        host_model = MinorModel.of(branch_sets, model.width)
        measured = density(model_minor(self.G, host_model))
        met = tuple(b.name for b in bounds if b.holds(measured))
        named = {b.name: b for b in bounds}
        if claim_name not in met:
            _fail(
                self.strict,
                self.violations,
                f"{outcome} density {measured} below {claim_name} bound {named[claim_name].value}",
            )
        claimed = named[claim_name].value if self.strict else measured
        logger.info("amplify: %s with %d branch sets, density %s", outcome, len(branch_sets), measured)
        return self._base(
            outcome=outcome,
            branch_sets=branch_sets,
            width=model.width,
            claimed_density=claimed,
            measured_density=measured,
            bounds=bounds,
            met=met,
            swaps=swaps,
        )

    def k_minor(self, forest_components, rest) -> Certificate:
        model = MinorModel.of(list(forest_components) + [frozenset((v,)) for v in rest], self.params.k)
        return self._minor(K_MINOR, model, "k_minor", theorem_bounds(K_MINOR, self.params, self.d))

    def ell_minor(self, found: BoundedMinor) -> Certificate:
        k, ell, eps, d = self.params.k, self.params.ell, self.params.eps, self.d
        self.violations.extend(found.violations)
        bounds = (
            *theorem_bounds(ELL_MINOR, self.params, d),
            Bound("bipartite_stated", "density", ">=", found.bounds["bipartite_stated"]),
            Bound("ell_minor", "density", ">=", ell * (1 - 14 * k * k * eps) * d),
        )
        cert = self._minor(ELL_MINOR, found.model, "bipartite", bounds, swaps=found.clean.swaps)
        if "ell_minor" not in cert.met:
            logger.warning(
                "bounded minor density %s misses the amplified bound %s; the bipartite bound is certified instead",
                cert.measured_density,
                bounds[2].value,
            )
        return cert

    def trivial(self, reason: str) -> Certificate:
        """The dense core itself as a width-1 minor, claimed at its measured density."""
        self.violations.append(reason)
        core = self.outcome.core
        return self.k_minor([], range(core.n))


def amplify(
    G: Graph,
    k: int,
    ell: int,
    eps: Fraction,
    mode: Mode = Mode.THEOREM,
    K: Fraction | int | None = None,
) -> Certificate:
    """Find a small dense subgraph or a bounded minor denser than G, and certify it.

    The returned certificate has already been accepted by
    :func:`verify_certificate` on ``G``.
    """
    if G.e == 0:
        raise EmptyGraphError("host has no edges")
    if ell > k:
        raise PreconditionError(f"need k >= ell, got k={k}, ell={ell}")
    params = Params.build(k, ell, Fraction(eps), K=K)
    d = density(dense_core(G))
    failures = params.theorem_checks(d)
    if failures and mode.strict:
        raise PreconditionError("; ".join(failures))
    for failure in failures:
        logger.warning("relaxed run: %s", failure)

    outcome = build_shrubbery(G, k, ell, params.K, params.eps, mode)
    builder = _CertificateBuilder(G, params, mode, outcome)
    builder.violations[:0] = failures

    if isinstance(outcome, SmallDenseExit):
        cert = builder.small(outcome.small)
    elif isinstance(outcome, Shrubbery):
        F = outcome.forest
        rest = sorted(set(range(outcome.core.n)) - F.vertices)
        cert = builder.k_minor(F.components(), rest)
    elif isinstance(outcome, UnbalancedBipartite):
        d0 = (1 - 8 * k * k * params.eps) * outcome.d
        try:
            found = bipartite_dense_minor(
                outcome.core, Bipartition(outcome.X, outcome.Y), ell, params.K, 2 * params.eps, d0, mode
            )
        except PreconditionError as exc:
            if mode.strict:
                raise
            logger.warning("bipartite step skipped: %s", exc)
            cert = builder.trivial(f"bipartite step skipped: {exc}")
        else:
            if isinstance(found, SmallDense):
                cert = builder.small(found)
            else:
                cert = builder.ell_minor(found)
    else:
        raise InvariantViolation(f"unexpected outcome {type(outcome).__name__}")

    verdict = verify_certificate(G, cert)
    if not verdict.accepted:
        raise InvariantViolation(f"produced certificate rejected: {verdict.reason}")
    return cert


def params_from_alpha(alpha: Fraction) -> tuple[int, int, Fraction]:
    """(ell, k, eps) = (2^(2/alpha) - 1, 2^(4/alpha^2), 1/(28 k^2))."""
    alpha = Fraction(alpha)
    if not 0 < alpha <= Fraction(1, 2):
        raise PreconditionError(f"alpha must lie in (0, 1/2], got {alpha}")
    inverse = 1 / alpha
    if inverse.denominator != 1:
        raise PreconditionError(f"1/alpha must be an integer, got {inverse}")
    m = inverse.numerator
    ell = 2 ** (2 * m) - 1
    k = 2 ** (4 * m * m)
    return ell, k, Fraction(1, 28 * k * k)


def _le_power(x: Fraction, base: Fraction, exponent: Fraction) -> bool:
    """x <= base**exponent for x >= 0, base > 0 and rational exponent, exactly."""
    p, q = exponent.numerator, exponent.denominator
    return Fraction(x) ** q <= Fraction(base) ** p


def _ge_power(x: Fraction, base: Fraction, exponent: Fraction) -> bool:
    """x >= base**exponent for base > 0 and rational exponent, exactly."""
    if x < 0:
        return False
    p, q = exponent.numerator, exponent.denominator
    return Fraction(x) ** q >= Fraction(base) ** p


def _le_product(x: Fraction, terms: list[tuple[Fraction, Fraction]]) -> bool:
    """x <= prod(base**exp) exactly, raising both sides to a common denominator."""
    common = math.lcm(*(Fraction(exp).denominator for _, exp in terms))
    rhs = Fraction(1)
    for base, exp in terms:
        rhs *= Fraction(base) ** int(Fraction(exp) * common)
    return Fraction(x) ** common <= rhs


@dataclass(frozen=True)
class InequalityCheck:
    name: str
    holds: bool
    discrepancy: bool = False
    detail: str = ""


@dataclass(frozen=True)
class AlphaReport:
    alpha: Fraction
    ell: int
    k: int
    eps: Fraction
    checks: tuple[InequalityCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.holds for c in self.checks if not c.discrepancy)

    @property
    def discrepancies(self) -> tuple[InequalityCheck, ...]:
        return tuple(c for c in self.checks if c.discrepancy)


def check_alpha_inequalities(alpha: Fraction, ell: int, k: int, eps: Fraction) -> AlphaReport:
    """Check every parameter inequality with exact arithmetic.

    A literal inequality that is false as written is reported with
    ``discrepancy=True`` next to the corrected form that does hold.
    """
    alpha, eps = Fraction(alpha), Fraction(eps)
    scale = 16 / alpha**2
    two = Fraction(2)
    checks = [
        InequalityCheck("6k^3 <= 2^(16/alpha^2)", _le_power(6 * Fraction(k) ** 3, two, scale)),
        InequalityCheck("3k^3 <= 2^(16/alpha^2)", _le_power(3 * Fraction(k) ** 3, two, scale)),
        InequalityCheck("14k^2 eps = 1/2", 14 * k * k * eps == Fraction(1, 2), detail=f"{14 * k * k * eps}"),
    ]
    half_eps_sq = eps * eps / 2
    literal = _ge_power(half_eps_sq, two, -scale)
    checks.append(
        InequalityCheck(
            "eps^2/2 >= 2^(-16/alpha^2)",
            literal,
            discrepancy=not literal,
            detail="" if literal else "false as written; the corrected form carries an extra 2^-11",
        )
    )
    corrected = _ge_power(half_eps_sq * 2**11, two, -scale)
    checks.append(InequalityCheck("eps^2/2 >= 2^-11 * 2^(-16/alpha^2)", corrected))

    ell_gain = ell * (1 - 14 * k * k * eps)
    holds = _ge_power(ell_gain, Fraction(ell + 1), 1 - alpha)
    checks.append(InequalityCheck("ell(1-14k^2 eps) >= (ell+1)^(1-alpha)", holds, detail=f"{ell_gain}"))

    k_gain = Fraction(k, 8 * ell) * (1 - 2 * k * eps)
    holds = _ge_power(k_gain, Fraction(k), 1 - alpha)
    checks.append(InequalityCheck("(k/8ell)(1-2k eps) >= k^(1-alpha)", holds, detail=f"{k_gain}"))

    for check in checks:
        if check.discrepancy:
            logger.warning("parameter inequality %s is false as written", check.name)
    return AlphaReport(alpha, ell, k, eps, tuple(checks))


def lift_exponent(alpha: Fraction) -> Fraction:
    """Exponent of the width left over after one lift: 1 - lambda*(1 - alpha), identically 0."""
    alpha = Fraction(alpha)
    lam = 1 / (1 - alpha)
    return 1 - lam * (1 - alpha)


@dataclass(frozen=True)
class LevelTrace:
    depth: int
    n: int
    e: int
    reference_density: Fraction
    r: Fraction
    outcome: str
    width: int | None
    claimed: Fraction | None
    measured: Fraction | None


@dataclass(frozen=True)
class LiftStep:
    depth: int
    width: int
    v: int
    d: Fraction
    v_bound: Fraction
    d_bound: Fraction


@dataclass(frozen=True)
class ForcedResult:
    subgraph: Graph
    levels: tuple[LevelTrace, ...]
    lifts: tuple[LiftStep, ...]
    v_bound: Fraction
    d_bound: Fraction
    checks: dict[str, bool]
    stalled: bool = False


def forced_search(
    G: Graph,
    fp: ForcedParams,
    mode: Mode = Mode.RELAXED,
    k: int | None = None,
    ell: int | None = None,
    eps: Fraction | None = None,
    K: Fraction | int | None = None,
    depth_limit: int = DEFAULT_DEPTH_LIMIT,
) -> ForcedResult:
    """Amplify repeatedly until a small dense subgraph appears, then lift it back to G.

    ``k``, ``ell`` and ``eps`` default to the values derived from ``fp.alpha``.
    """
    if k is None or ell is None or eps is None:
        ell, k, eps = params_from_alpha(fp.alpha)
    eps = Fraction(eps)
    if lift_exponent(fp.alpha) != 0:
        raise InvariantViolation("lift exponent is not zero")

    chain: list[tuple[Graph, MinorModel]] = []
    levels: list[LevelTrace] = []
    current = G
    r = fp.r
    base_density: Fraction | None = None
    stalled = False
    innermost: Graph | None = None
    while innermost is None:
        depth = len(chain)
        if depth > depth_limit:
            raise InvariantViolation(f"forced search exceeded depth limit {depth_limit}")
        cert = amplify(current, k, ell, eps, mode, K)
        if base_density is None:
            base_density = cert.reference_density
        else:
            r = fp.r * base_density / cert.reference_density
        levels.append(
            LevelTrace(
                depth,
                current.n,
                current.e,
                cert.reference_density,
                r,
                cert.outcome,
                cert.width,
                cert.claimed_density if cert.outcome != SMALL_DENSE else cert.e_bound,
                cert.measured_density,
            )
        )
        logger.info("forced search level %d: %s on %d vertices", depth, cert.outcome, current.n)
        if cert.outcome == SMALL_DENSE:
            innermost = current.subgraph(cert.vertices)
            break
        minor = model_minor(current, cert.model)
        if minor.e == 0 or minor.n >= current.n:
            logger.warning("forced search stalled at level %d; keeping the dense core", depth)
            stalled = True
            innermost = dense_core(current)
            break
        chain.append((current, cert.model))
        current = minor

    H = innermost
    v_bound, d_bound = Fraction(H.n), density(H)
    lifts: list[LiftStep] = []
    for depth in range(len(chain) - 1, -1, -1):
        host, model = chain[depth]
        H = lift_subgraph(host, model, H)
        v_bound *= model.width
        d_bound /= model.width
        step = LiftStep(depth, model.width, H.n, density(H), v_bound, d_bound)
        if step.v > step.v_bound or step.d < step.d_bound:
            raise InvariantViolation(f"lift at level {depth} breaks its accounting: {step}")
        lifts.append(step)

    scale = 16 / fp.alpha**2
    checks = {
        "v_le_forced": _le_product(Fraction(H.n), [(Fraction(2), scale), (fp.r, fp.lam), (fp.D, Fraction(1))]),
        "d_ge_forced": _le_product(fp.D, [(Fraction(2), scale), (fp.r, fp.lam), (density(H), Fraction(1))]),
        "r_admissible": fp.r_admissible(eps),
    }
    return ForcedResult(H, tuple(levels), tuple(lifts), v_bound, d_bound, checks, stalled)
