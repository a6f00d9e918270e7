"""Certificates for amplification outcomes and their independent verifier.

A certificate binds to its host through a fingerprint and carries every
claimed quantity as an exact rational. The verifier recomputes all of
them from the host alone.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

from .errors import CertificateError, MinorAmpError
from .graph_core import (
    Graph,
    HostFingerprint,
    MinorModel,
    dense_core,
    density,
    host_fingerprint,
    model_minor,
    validate_model,
)
from .params import CERTIFICATE_VERSION, Mode, Params, format_rational, parse_rational

logger = logging.getLogger(__name__)

SMALL_DENSE = "small_dense"
ELL_MINOR = "ell_minor"
K_MINOR = "k_minor"
OUTCOMES = (SMALL_DENSE, ELL_MINOR, K_MINOR)

_QUANTITIES = ("vertices", "edges", "density")


@dataclass(frozen=True)
class Bound:
    name: str
    quantity: str
    relation: str
    value: Fraction

    def holds(self, measured: Fraction | int) -> bool:
        if self.relation == "<=":
            return measured <= self.value
        return measured >= self.value


@dataclass(frozen=True)
class Certificate:
    outcome: str
    mode: Mode
    params: Params
    fingerprint: HostFingerprint
    reference_density: Fraction
    vertices: tuple[int, ...] = ()
    v_bound: Fraction | None = None
    e_bound: Fraction | None = None
    branch_sets: tuple[tuple[int, ...], ...] = ()
    width: int | None = None
    claimed_density: Fraction | None = None
    measured_density: Fraction | None = None
    bounds: tuple[Bound, ...] = ()
    met: tuple[str, ...] = ()
    moves: int = 0
    swaps: int = 0
    violations: tuple[str, ...] = ()

    @property
    def model(self) -> MinorModel:
        return MinorModel.of(self.branch_sets, self.width)

    def summary(self) -> str:
        if self.outcome == SMALL_DENSE:
            return (
                f"{self.outcome}: {len(self.vertices)} vertices, "
                f"claimed v <= {format_rational(self.v_bound)}, e >= {format_rational(self.e_bound)}"
            )
        return (
            f"{self.outcome}: {len(self.branch_sets)} branch sets of width <= {self.width}, "
            f"measured density {format_rational(self.measured_density)}, "
            f"claimed {format_rational(self.claimed_density)}"
        )


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    reason: str | None = None

    def __str__(self) -> str:
        return "Accept" if self.accepted else f"Reject({self.reason})"


def _rational(value: Fraction | None) -> str | None:
    return None if value is None else format_rational(value)


def to_dict(cert: Certificate) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "version": CERTIFICATE_VERSION,
        "outcome": cert.outcome,
        "mode": cert.mode.value,
        "params": {
            "k": cert.params.k,
            "ell": cert.params.ell,
            "K": format_rational(cert.params.K),
            "eps": format_rational(cert.params.eps),
            "c": format_rational(cert.params.c),
        },
        "fingerprint": asdict(cert.fingerprint),
        "reference_density": format_rational(cert.reference_density),
        "bounds": [
            {"name": b.name, "quantity": b.quantity, "relation": b.relation, "value": format_rational(b.value)}
            for b in cert.bounds
        ],
        "met": sorted(cert.met),
        "stats": {"moves": cert.moves, "swaps": cert.swaps, "violations": list(cert.violations)},
    }
    if cert.outcome == SMALL_DENSE:
        payload["vertices"] = sorted(cert.vertices)
        payload["claimed"] = {"v_bound": _rational(cert.v_bound), "e_bound": _rational(cert.e_bound)}
    else:
        payload["branch_sets"] = sorted(sorted(bs) for bs in cert.branch_sets)
        payload["width"] = cert.width
        payload["claimed"] = {"density": _rational(cert.claimed_density)}
        payload["measured"] = {"density": _rational(cert.measured_density)}
    return payload


def _need(payload: dict[str, Any], key: str) -> Any:
    try:
        return payload[key]
    except (KeyError, TypeError):
        raise CertificateError(f"missing field {key!r}") from None


def _parse(text: Any, field: str) -> Fraction:
    try:
        return parse_rational(text)
    except MinorAmpError as exc:
        raise CertificateError(f"field {field!r}: {exc}") from exc


def from_dict(payload: dict[str, Any]) -> Certificate:
    if not isinstance(payload, dict):
        raise CertificateError("certificate must be a JSON object")
    if payload.get("version") != CERTIFICATE_VERSION:
        raise CertificateError(f"unsupported certificate version {payload.get('version')!r}")
    outcome = _need(payload, "outcome")
    if outcome not in OUTCOMES:
        raise CertificateError(f"unknown outcome {outcome!r}")
    try:
        mode = Mode(_need(payload, "mode"))
        raw = _need(payload, "params")
        params = Params.build(
            int(_need(raw, "k")),
            int(_need(raw, "ell")),
            _parse(_need(raw, "eps"), "eps"),
            K=_parse(_need(raw, "K"), "K"),
        )
        fp = _need(payload, "fingerprint")
        fingerprint = HostFingerprint(int(_need(fp, "n")), int(_need(fp, "e")), str(_need(fp, "digest")))
        bounds = tuple(
            Bound(str(b["name"]), str(b["quantity"]), str(b["relation"]), _parse(b["value"], "bounds"))
            for b in payload.get("bounds", [])
        )
        stats = payload.get("stats", {})
        common = dict(
            outcome=outcome,
            mode=mode,
            params=params,
            fingerprint=fingerprint,
            reference_density=_parse(_need(payload, "reference_density"), "reference_density"),
            bounds=bounds,
            met=tuple(payload.get("met", [])),
            moves=int(stats.get("moves", 0)),
            swaps=int(stats.get("swaps", 0)),
            violations=tuple(stats.get("violations", [])),
        )
        claimed = _need(payload, "claimed")
        if outcome == SMALL_DENSE:
            return Certificate(
                vertices=tuple(int(v) for v in _need(payload, "vertices")),
                v_bound=_parse(_need(claimed, "v_bound"), "v_bound"),
                e_bound=_parse(_need(claimed, "e_bound"), "e_bound"),
                **common,
            )
        measured = payload.get("measured", {}).get("density")
        return Certificate(
            branch_sets=tuple(tuple(int(v) for v in bs) for bs in _need(payload, "branch_sets")),
            width=int(_need(payload, "width")),
            claimed_density=_parse(_need(claimed, "density"), "density"),
            measured_density=None if measured is None else _parse(measured, "measured"),
            **common,
        )
    except (ValueError, TypeError, KeyError) as exc:
        raise CertificateError(f"malformed certificate: {exc}") from exc
    except MinorAmpError as exc:
        if isinstance(exc, CertificateError):
            raise
        raise CertificateError(f"malformed certificate: {exc}") from exc


def dumps(cert: Certificate) -> str:
    return json.dumps(to_dict(cert), indent=2, sort_keys=True) + "\n"


def loads(text: str) -> Certificate:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CertificateError(f"invalid JSON: {exc}") from exc
    return from_dict(payload)


def save(cert: Certificate, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps(cert))


def load(path: str | Path) -> Certificate:
    with open(path, "r", encoding="utf-8") as f:
        return loads(f.read())


def _measure(quantity: str, G: Graph, cert: Certificate) -> Fraction | int:
    if cert.outcome == SMALL_DENSE:
        if quantity == "vertices":
            return len(cert.vertices)
        if quantity == "edges":
            return G.induced_edge_count(cert.vertices)
        return Fraction(G.induced_edge_count(cert.vertices), len(cert.vertices))
    if quantity != "density":
        raise CertificateError(f"minor certificates carry no {quantity} bound")
    return density(model_minor(G, cert.model))


def theorem_bounds(outcome: str, params: Params, d: Fraction) -> tuple[Bound, ...]:
    """The bounds a theorem-mode certificate for ``outcome`` must claim at reference density ``d``."""
    k, ell, eps = params.k, params.ell, params.eps
    if outcome == SMALL_DENSE:
        return (
            Bound("v_le_6k3d", "vertices", "<=", 6 * k**3 * d),
            Bound("e_ge_eps2d2", "edges", ">=", (eps * d) ** 2 / 2),
        )
    if outcome == K_MINOR:
        return (Bound("k_minor", "density", ">=", Fraction(k, 8 * ell) * (1 - 2 * k * eps) * d),)
    bipartite = Fraction(ell, 2) * (1 - 6 * ell**3 * eps) * (1 - 8 * k * k * eps) * d
    return (Bound("bipartite", "density", ">=", bipartite),)


def _theorem_claims_hold(cert: Certificate) -> bool:
    required = theorem_bounds(cert.outcome, cert.params, cert.reference_density)
    named = {b.name: b for b in cert.bounds}
    if any(named.get(b.name) != b or b.name not in cert.met for b in required):
        return False
    if cert.outcome == SMALL_DENSE:
        return cert.v_bound == required[0].value and cert.e_bound == required[1].value
    return cert.claimed_density == required[0].value


def verify_certificate(G: Graph, cert: Certificate) -> Verdict:
    """Accept iff every claim in ``cert`` holds on ``G``, recomputed from scratch.

    Theorem-mode certificates must also claim exactly the bounds that
    :func:`theorem_bounds` derives from their parameters.
    """
    if host_fingerprint(G) != cert.fingerprint:
        return Verdict(False, "fingerprint")
    if G.e == 0 or density(dense_core(G)) != cert.reference_density:
        return Verdict(False, "reference density")

    if cert.outcome == SMALL_DENSE:
        vertices = cert.vertices
        if not vertices or len(set(vertices)) != len(vertices) or not all(0 <= v < G.n for v in vertices):
            return Verdict(False, "range")
        if cert.v_bound is None or len(vertices) > cert.v_bound:
            return Verdict(False, "vertex bound")
        if cert.e_bound is None or G.induced_edge_count(vertices) < cert.e_bound:
            return Verdict(False, "edge bound")
    else:
        limit = cert.params.ell + 1 if cert.outcome == ELL_MINOR else cert.params.k
        if cert.width is None or cert.width < 1 or cert.width > limit:
            return Verdict(False, "width")
        if not cert.branch_sets:
            return Verdict(False, "empty")
        violation = validate_model(G, cert.model)
        if violation is not None:
            return Verdict(False, violation.reason)
        measured = density(model_minor(G, cert.model))
        if cert.claimed_density is None or measured < cert.claimed_density:
            return Verdict(False, "density bound")

    if cert.mode is Mode.THEOREM and not _theorem_claims_hold(cert):
        return Verdict(False, "theorem bound")

    named = {b.name: b for b in cert.bounds}
    for name in cert.met:
        bound = named.get(name)
        if bound is None or bound.quantity not in _QUANTITIES:
            return Verdict(False, "theorem bound")
        if not bound.holds(_measure(bound.quantity, G, cert)):
            return Verdict(False, "theorem bound")
    return Verdict(True)
