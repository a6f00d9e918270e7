"""Parameter bundles and exact rational parsing.

No floating-point value ever enters a threshold: everything is a
:class:`fractions.Fraction` or an ``int``.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, replace
from decimal import Decimal, localcontext
from fractions import Fraction

from .errors import PreconditionError, UsageError

DEFAULT_DEPTH_LIMIT = 64
DEFAULT_SEED = 0
BENCH_SCHEMA = "minoramp-bench/1"
CERTIFICATE_VERSION = 1

_RATIONAL_RE = re.compile(r"^\s*[+-]?(\d+(/\d+)?|\d*\.\d+|\d+\.\d*)\s*$")


class Mode(enum.Enum):
    THEOREM = "theorem"
    RELAXED = "relaxed"

    @property
    def strict(self) -> bool:
        return self is Mode.THEOREM


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse "p/q", an integer or a decimal string into an exact Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str) or not _RATIONAL_RE.match(text):
        raise UsageError(f"not an exact rational: {text!r}")
    try:
        return Fraction(text.strip())
    except ZeroDivisionError as exc:
        raise UsageError(f"zero denominator in {text!r}") from exc


def format_rational(value: Fraction | int) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def ceil_fraction(value: Fraction) -> int:
    return -((-value.numerator) // value.denominator)


def floor_fraction(value: Fraction) -> int:
    return value.numerator // value.denominator


@dataclass(frozen=True)
class Params:
    K: Fraction
    k: int
    ell: int
    eps: Fraction
    c: Fraction
    d: Fraction | None = None
    alpha: Fraction | None = None
    lam: Fraction | None = None
    D: Fraction | None = None
    r: Fraction | None = None

    @classmethod
    def build(
        cls,
        k: int,
        ell: int,
        eps: Fraction,
        K: Fraction | int | None = None,
        alpha: Fraction | None = None,
    ) -> "Params":
        if k < 2 or ell < 2:
            raise PreconditionError(f"need k >= 2 and ell >= 2, got k={k}, ell={ell}")
        eps = Fraction(eps)
        if not 0 < eps < 1:
            raise PreconditionError(f"eps must lie in (0,1), got {eps}")
        big_k = Fraction(k) if K is None else Fraction(K)
        if big_k < 1:
            raise PreconditionError(f"K must be >= 1, got {big_k}")
        lam = None if alpha is None else 1 / (1 - Fraction(alpha))
        return cls(K=big_k, k=k, ell=ell, eps=eps, c=2 * k * eps, alpha=alpha, lam=lam)

    def with_density(self, d: Fraction) -> "Params":
        return replace(self, d=Fraction(d))

    def theorem_checks(self, d: Fraction) -> list[str]:
        """Return the theorem-mode inequalities that fail for host density ``d``."""
        failures: list[str] = []
        if self.k < self.ell:
            failures.append(f"k >= ell fails ({self.k} < {self.ell})")
        if self.eps > Fraction(1, 16 * self.k * self.k):
            failures.append(f"eps <= 1/(16k^2) fails (eps = {self.eps})")
        if d < 2 / self.eps:
            failures.append(f"d >= 2/eps fails (d = {d}, 2/eps = {2 / self.eps})")
        if self.K < self.k:
            failures.append(f"K >= k fails (K = {self.K})")
        return failures


@dataclass(frozen=True)
class ForcedParams:
    D: Fraction
    t: int
    r: Fraction
    alpha: Fraction
    lam: Fraction

    @classmethod
    def build(cls, D: Fraction, t: int, alpha: Fraction, r: Fraction | None = None) -> "ForcedParams":
        alpha = Fraction(alpha)
        if not 0 < alpha < 1:
            raise PreconditionError(f"alpha must lie in (0,1), got {alpha}")
        if t < 1:
            raise PreconditionError(f"t must be positive, got {t}")
        r = Fraction(1) if r is None else Fraction(r)
        if r < 1:
            raise PreconditionError(f"r must be >= 1, got {r}")
        return cls(D=Fraction(D), t=t, r=r, alpha=alpha, lam=1 / (1 - alpha))

    def r_admissible(self, eps: Fraction) -> bool:
        return 1 <= self.r <= eps * self.D / 2


def default_forcing_density(t: int, constant: Fraction = Fraction(1)) -> Fraction:
    """D(t) = ceil(constant * t * sqrt(log2 t)), evaluated at fixed decimal precision."""
    if t < 2:
        return Fraction(ceil_fraction(Fraction(constant) * max(t, 1)))
    with localcontext() as ctx:
        ctx.prec = 50
        log2_t = Decimal(t).ln() / Decimal(2).ln()
        value = Decimal(constant.numerator) / Decimal(constant.denominator) * t * log2_t.sqrt()
        return Fraction(math.ceil(value))


@dataclass(frozen=True)
class RunConfig:
    """Validated command-line configuration for one CLI invocation."""

    command: str
    input_path: str | None = None
    gen_spec: str | None = None
    k: int | None = None
    ell: int | None = None
    eps: Fraction | None = None
    alpha: Fraction | None = None
    K: Fraction | None = None
    mode: Mode = Mode.THEOREM
    seed: int = DEFAULT_SEED
    seeds: int = 1
    out: str | None = None
    cert: str | None = None
    depth_limit: int = DEFAULT_DEPTH_LIMIT
    jobs: int = 1
    D: Fraction | None = None
    t: int | None = None

    @classmethod
    def from_namespace(cls, ns, need_input: bool = True, need_params: bool = True) -> "RunConfig":
        def opt(name: str):
            return getattr(ns, name, None)

        input_path, gen_spec = opt("input"), opt("gen")
        if need_input and (input_path is None) == (gen_spec is None):
            raise UsageError("give exactly one of --in and --gen")
        alpha = None if opt("alpha") is None else parse_rational(opt("alpha"))
        k, ell = opt("k"), opt("ell")
        eps = None if opt("eps") is None else parse_rational(opt("eps"))
        if alpha is not None:
            if k is not None or ell is not None or eps is not None:
                raise UsageError("--alpha excludes --k, --ell and --eps")
            from .amplifier import params_from_alpha

            try:
                ell, k, eps = params_from_alpha(alpha)
            except PreconditionError as exc:
                raise UsageError(str(exc)) from exc
        elif need_params and (k is None or ell is None or eps is None):
            raise UsageError("give --k, --ell and --eps, or --alpha")
        seed = DEFAULT_SEED if opt("seed") is None else opt("seed")
        if not 0 <= seed < 2**64:
            raise UsageError(f"seed must be a 64-bit unsigned integer, got {seed}")
        seeds = 1 if opt("seeds") is None else opt("seeds")
        jobs = 1 if opt("jobs") is None else opt("jobs")
        if seeds < 1 or jobs < 1:
            raise UsageError("--seeds and --jobs must be positive")
        return cls(
            command=ns.command,
            input_path=input_path,
            gen_spec=gen_spec,
            k=k,
            ell=ell,
            eps=eps,
            alpha=alpha,
            K=None if opt("K") is None else parse_rational(opt("K")),
            mode=Mode(opt("mode") or Mode.THEOREM.value),
            seed=seed,
            seeds=seeds,
            out=opt("out"),
            cert=opt("cert"),
            depth_limit=DEFAULT_DEPTH_LIMIT if opt("depth_limit") is None else opt("depth_limit"),
            jobs=jobs,
            D=None if opt("D") is None else parse_rational(opt("D")),
            t=opt("t"),
        )
