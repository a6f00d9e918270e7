"""Command-line entry point: ``minoramp <command> ...``."""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import __version__
from .amplifier import amplify, forced_search
from .certificates import SMALL_DENSE, dumps, load, save, verify_certificate
from .claw_matcher import build_claw_matching
from .errors import MinorAmpError, UsageError
from .forest_lab import StarMode, is_claw_matching, is_clean, is_mate_free, is_shrubbery, is_small_forest
from .generators import parse_generator_spec
from .graph_core import Bipartition, Graph, dense_core, density
from .graph_io import read_graph, write_edge_list, write_graph
from .oracles import selftest
from .params import (
    BENCH_SCHEMA,
    DEFAULT_DEPTH_LIMIT,
    DEFAULT_SEED,
    ForcedParams,
    Mode,
    RunConfig,
    default_forcing_density,
    format_rational,
    parse_rational,
)
from .shrubbery_builder import Shrubbery, SmallDenseExit, UnbalancedBipartite, build_shrubbery

logger = logging.getLogger(__name__)

BENCH_COLUMNS = (
    "seed",
    "n",
    "e",
    "d",
    "k",
    "ell",
    "eps",
    "outcome",
    "measured_density",
    "claimed_density",
    "moves",
    "swaps",
    "verdict",
    "ms",
)

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def _add_host(p: argparse.ArgumentParser) -> None:
    p.add_argument("--in", dest="input", help="host graph (edge list, or DIMACS by suffix)")
    p.add_argument("--gen", help="generator spec such as gnp:1500,0.18 or cliques:200,4")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="generator seed (64-bit)")


def _add_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int)
    p.add_argument("--ell", type=int)
    p.add_argument("--eps", help='exact rational, "p/q" or decimal')
    p.add_argument("--alpha", help="derive k, ell and eps from alpha (1/alpha integer)")
    p.add_argument("--K", help="small-vertex multiplier, defaults to k")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.THEOREM.value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="minoramp", description="Density amplification for minor-free graphs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("amplify", help="run the amplifier and write a certificate")
    _add_host(p)
    _add_params(p)
    p.add_argument("--out", help="certificate path (stdout when omitted)")

    p = sub.add_parser("verify", help="check a certificate against its host")
    _add_host(p)
    p.add_argument("--cert", required=True)

    p = sub.add_parser("gen", help="emit a generated host as an edge list")
    p.add_argument("--gen", required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out")

    p = sub.add_parser("shrub", help="run the shrubbery builder and report its checks")
    _add_host(p)
    _add_params(p)

    p = sub.add_parser("claw", help="build a claw matching and report its checks")
    _add_host(p)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--split", type=int, required=True, help="ids below SPLIT form side A, the rest side B")
    p.add_argument("--dA", help="A-side degree bound, defaults to the measured maximum")

    p = sub.add_parser("selftest", help="compare fast paths with brute-force oracles")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--rounds", type=int, default=20)

    p = sub.add_parser("bench", help="sweep seeds and emit one CSV row per run")
    p.add_argument("--gen", required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="first seed")
    p.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="CSV path (stdout when omitted)")
    _add_params(p)

    p = sub.add_parser("forced", help="iterate the amplifier and lift the final subgraph")
    _add_host(p)
    _add_params(p)
    p.add_argument("--D", help="forcing density, defaults to D(t)")
    p.add_argument("--t", type=int, default=2)
    p.add_argument("--r", default="1")
    p.add_argument("--lift-alpha", default="1/2", help="exponent used for r bookkeeping when --alpha is absent")
    p.add_argument("--depth-limit", type=int, default=DEFAULT_DEPTH_LIMIT)
    return parser


def _setup_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)


def _host(cfg: RunConfig) -> Graph:
    if cfg.input_path is not None:
        return read_graph(cfg.input_path)
    return parse_generator_spec(cfg.gen_spec, cfg.seed)


def cmd_amplify(cfg: RunConfig) -> int:
    G = _host(cfg)
    start = time.perf_counter()
    cert = amplify(G, cfg.k, cfg.ell, cfg.eps, cfg.mode, cfg.K)
    ms = (time.perf_counter() - start) * 1000
    if cfg.out:
        save(cert, cfg.out)
    else:
        sys.stdout.write(dumps(cert))
    print(f"{cert.summary()} ({ms:.0f} ms)", file=sys.stderr if not cfg.out else sys.stdout)
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    G = _host(cfg)
    cert = load(cfg.cert)
    verdict = verify_certificate(G, cert)
    print(verdict)
    return 0 if verdict.accepted else 1


def cmd_gen(cfg: RunConfig) -> int:
    G = parse_generator_spec(cfg.gen_spec, cfg.seed)
    if cfg.out:
        write_graph(G, cfg.out)
    else:
        sys.stdout.write(write_edge_list(G))
    return 0


def _report(checks: dict[str, bool]) -> int:
    for name, ok in checks.items():
        print(f"  {name}: {'ok' if ok else 'FAIL'}")
    return 0 if all(checks.values()) else 1


def cmd_shrub(cfg: RunConfig) -> int:
    G = _host(cfg)
    K = Fraction(cfg.k) if cfg.K is None else cfg.K
    out = build_shrubbery(G, cfg.k, cfg.ell, K, cfg.eps, cfg.mode)
    print(f"{type(out).__name__}: core {out.core.n} vertices, d = {format_rational(out.d)}, {len(out.moves)} moves")
    checks: dict[str, bool] = {"no violations": not out.violations}
    if isinstance(out, Shrubbery):
        F, core, d = out.forest, out.core, out.d
        checks.update(
            {
                "shrubbery": is_shrubbery(F, cfg.k),
                "small": is_small_forest(core, F, K, d),
                "mate-free": is_mate_free(core, F, cfg.eps, d),
                "clean": is_clean(core, F, 2 * cfg.k * cfg.eps, d),
            }
        )
    elif isinstance(out, UnbalancedBipartite):
        checks["|X| >= ell|Y|"] = len(out.X) >= cfg.ell * len(out.Y)
    elif isinstance(out, SmallDenseExit):
        checks["bounds"] = out.small.bounds_hold()
    for v in out.violations:
        print(f"  violation: {v}")
    return _report(checks)


def cmd_claw(cfg: RunConfig, split: int, dA_text: str | None) -> int:
    G = _host(cfg)
    if not 0 < split < G.n:
        raise UsageError(f"--split must lie in (0, {G.n})")
    part = Bipartition.of(range(split), range(split, G.n))
    if dA_text is None:
        dA = Fraction(max((len(G.neighbors(a) & part.A) for a in part.A), default=0))
    else:
        dA = parse_rational(dA_text)
    steps: list[int] = []
    F = build_claw_matching(G, part, cfg.ell, dA, on_augment=lambda F0, path: steps.append(len(path)))
    covered_b = F.vertices & part.B
    print(f"{len(F.components())} claws, {len(F.vertices & part.A)} A-vertices covered, {len(steps)} augmentations")
    checks = {
        "claw matching": F.is_empty() or is_claw_matching(G, F, part, cfg.ell, StarMode.EXACTLY),
        "leaf bound": all(len((G.neighbors(a) & part.B) - covered_b) <= dA for a in F.vertices & part.A),
    }
    return _report(checks)


def cmd_selftest(seed: int, rounds: int) -> int:
    results = selftest(seed, rounds)
    for r in results:
        print(f"{r.name}: {r.cases} cases, {'ok' if r.ok else f'{len(r.failures)} failures'}")
        for detail in r.failures:
            print(f"  {detail}")
    return 0 if all(r.ok for r in results) else 1


def _bench_cell(job: tuple[str, int, int, int, Fraction, Fraction | None, str]) -> dict[str, str]:
    spec, seed, k, ell, eps, K, mode = job
    G = parse_generator_spec(spec, seed)
    row = {"seed": str(seed), "n": str(G.n), "e": str(G.e), "k": str(k), "ell": str(ell), "eps": format_rational(eps)}
    start = time.perf_counter()
    try:
        row["d"] = format_rational(density(dense_core(G)))
        cert = amplify(G, k, ell, eps, Mode(mode), K)
        verdict = verify_certificate(G, cert)
    except MinorAmpError as exc:
        logger.warning("bench seed %d failed: %s", seed, exc)
        row.setdefault("d", "")
        row.update(dict.fromkeys(("measured_density", "claimed_density", "moves", "swaps", "verdict"), ""))
        row["outcome"] = f"error:{type(exc).__name__}"
    else:
        small = cert.outcome == SMALL_DENSE
        row.update(
            outcome=cert.outcome,
            measured_density="" if small else format_rational(cert.measured_density),
            claimed_density="" if small else format_rational(cert.claimed_density),
            moves=str(cert.moves),
            swaps=str(cert.swaps),
            verdict=str(verdict),
        )
    row["ms"] = f"{(time.perf_counter() - start) * 1000:.0f}"
    return row


def cmd_bench(cfg: RunConfig) -> int:
    jobs = [
        (cfg.gen_spec, seed, cfg.k, cfg.ell, cfg.eps, cfg.K, cfg.mode.value)
        for seed in range(cfg.seed, cfg.seed + cfg.seeds)
    ]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_bench_cell, jobs))
    else:
        rows = [_bench_cell(job) for job in jobs]
    buf = io.StringIO()
    buf.write(f"# {BENCH_SCHEMA}\n")
    writer = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as f:
            f.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0 if all(r["verdict"] == "Accept" for r in rows) else 1


def cmd_forced(cfg: RunConfig, ns: argparse.Namespace) -> int:
    G = _host(cfg)
    alpha = cfg.alpha if cfg.alpha is not None else parse_rational(ns.lift_alpha)
    D = cfg.D if cfg.D is not None else default_forcing_density(ns.t)
    fp = ForcedParams.build(D, ns.t, alpha, parse_rational(ns.r))
    result = forced_search(G, fp, cfg.mode, cfg.k, cfg.ell, cfg.eps, cfg.K, cfg.depth_limit)
    for level in result.levels:
        print(
            f"level {level.depth}: n={level.n} e={level.e} d={format_rational(level.reference_density)} "
            f"r={format_rational(level.r)} -> {level.outcome}"
        )
    for step in result.lifts:
        print(
            f"lift {step.depth} (x{step.width}): v={step.v} <= {format_rational(step.v_bound)}, "
            f"d={format_rational(step.d)} >= {format_rational(step.d_bound)}"
        )
    H = result.subgraph
    print(f"subgraph: {H.n} vertices, {H.e} edges{' (stalled)' if result.stalled else ''}")
    return _report(result.checks)


def cli(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code is None else int(exc.code)
    _setup_logging(ns.verbose)
    command = ns.command
    try:
        if command == "selftest":
            return cmd_selftest(ns.seed, ns.rounds)
        need_input = command not in ("gen", "bench")
        need_params = command in ("amplify", "shrub", "bench", "forced")
        cfg = RunConfig.from_namespace(ns, need_input=need_input, need_params=need_params)
        if command == "amplify":
            return cmd_amplify(cfg)
        if command == "verify":
            return cmd_verify(cfg)
        if command == "gen":
            return cmd_gen(cfg)
        if command == "shrub":
            return cmd_shrub(cfg)
        if command == "claw":
            return cmd_claw(cfg, ns.split, ns.dA)
        if command == "bench":
            return cmd_bench(cfg)
        return cmd_forced(cfg, ns)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except MinorAmpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> int:
    return cli(sys.argv[1:])


if __name__ == "__main__":
    raise SystemExit(main())
