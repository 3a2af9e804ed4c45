"""Command-line interface.

Every subcommand prints a JSON report on stdout.  Exit codes: 0 on success,
1 on a domain error (bad curve file, parameter out of range), 2 on a usage
error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .decider import EpsilonSchedule, complete_decide
from .exact import exact_frechet, free_space_intervals
from .geometry import GeometryError
from .io import RunReport, curve_digest, parse_curve_file, serialize_curve
from .optimizer import approx_frechet
from .packedness import companion_curve, generate_c_packed_curve, sampled_packedness
from .simplify import simplify

EXACT_SIZE_WARNING = 10**7
FREESPACE_LIMIT = 10**6


def _curve_args(p: argparse.ArgumentParser, names: tuple[str, ...]) -> None:
    for n in names:
        p.add_argument(n, type=Path, help="curve file (.csv or .json)")
    p.add_argument("--format", choices=["csv", "json"], help="override the format inferred from suffixes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="packed-frechet",
        description="Approximate Frechet distance between a c-packed curve and a general curve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("approx", help="(1+eps)-approximate Frechet distance")
    _curve_args(p, ("P", "Q"))
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--witness", action="store_true", help="include the witness alignment")
    p.add_argument("--dump-alignment", type=Path, metavar="FILE", help="write the witness as JSON")

    p = sub.add_parser("decide", help="three-way approximate decision at radius r")
    _curve_args(p, ("P", "Q"))
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--dump-freespace", type=Path, metavar="FILE", help="write free-space intervals at r")

    p = sub.add_parser("exact", help="exact Frechet distance (quadratic reference)")
    _curve_args(p, ("P", "Q"))
    p.add_argument("--dump-freespace", type=Path, metavar="FILE", help="write free-space intervals at d_F")

    p = sub.add_parser("simplify", help="greedy mu-simplification")
    _curve_args(p, ("P",))
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--out", type=Path, help="write the simplified curve")

    p = sub.add_parser("packedness", help="sampled packedness lower bound")
    _curve_args(p, ("P",))

    p = sub.add_parser("generate", help="deterministic c-packed curve")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--companion", type=int, metavar="M", help="emit an M-vertex curve following the generated one instead")
    p.add_argument("--out", type=Path, help="output file (default stdout)")
    p.add_argument("--format", choices=["csv", "json"], default=None)

    p = sub.add_parser("bench", help="scaling table for approx on generated inputs")
    p.add_argument("--sizes", type=int, nargs="+", default=[1000, 2000, 4000])
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--c", type=float, default=4.0)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _load(args, name: str):
    return parse_curve_file(getattr(args, name), args.format)


def _emit(report: RunReport) -> None:
    print(report.to_json())


def _cmd_approx(args) -> int:
    P, Q = _load(args, "P"), _load(args, "Q")
    t = time.perf_counter()
    res = approx_frechet(P, Q, args.eps)
    wall = time.perf_counter() - t
    witness = res.witness.to_json()
    if args.dump_alignment:
        args.dump_alignment.write_text(json.dumps({"value": res.value, "pairs": witness}, indent=1))
    _emit(RunReport(
        "approx", curve_digest(P, Q, extra={"eps": args.eps}),
        {"value": res.value, "method": res.method, "eps": args.eps},
        witness=witness if args.witness else None, probes=res.stats.probes, wall_time=wall,
    ))
    return 0


def _cmd_decide(args) -> int:
    P, Q = _load(args, "P"), _load(args, "Q")
    if not args.r > 0:
        raise GeometryError(f"r must be positive, got {args.r}")
    sched = EpsilonSchedule(args.eps)
    t = time.perf_counter()
    out = complete_decide(P, Q, args.r, sched)
    wall = time.perf_counter() - t
    if args.dump_freespace:
        _dump_freespace(P, Q, args.r, args.dump_freespace)
    outcome = {"verdict": str(out), "r": args.r, "eps": args.eps}
    if out.value is not None:
        outcome["value"] = out.value
    _emit(RunReport("decide", curve_digest(P, Q, extra={"r": args.r, "eps": args.eps}), outcome,
                    probes=1, wall_time=wall))
    return 0


def _dump_freespace(P, Q, r: float, path: Path) -> None:
    if len(P) * len(Q) > FREESPACE_LIMIT:
        raise GeometryError(f"free-space dump limited to n*m <= {FREESPACE_LIMIT}")
    path.write_text(json.dumps(free_space_intervals(P, Q, r)))


def _cmd_exact(args) -> int:
    P, Q = _load(args, "P"), _load(args, "Q")
    if len(P) * len(Q) > EXACT_SIZE_WARNING:
        print(f"warning: exact oracle on n*m = {len(P) * len(Q)} cells may be slow", file=sys.stderr)
    t = time.perf_counter()
    d = exact_frechet(P, Q)
    wall = time.perf_counter() - t
    if args.dump_freespace:
        _dump_freespace(P, Q, max(d, 1e-300), args.dump_freespace)
    _emit(RunReport("exact", curve_digest(P, Q), {"value": d}, wall_time=wall))
    return 0


def _cmd_simplify(args) -> int:
    P = _load(args, "P")
    simp = simplify(P, args.mu)
    if args.out:
        args.out.write_text(serialize_curve(simp.curve, args.out.suffix.lstrip(".") or "json"))
    _emit(RunReport(
        "simplify", curve_digest(P, extra={"mu": args.mu}),
        {"mu": args.mu, "marked": list(simp.marked), "n_vertices": len(simp.curve)},
    ))
    return 0


def _cmd_packedness(args) -> int:
    P = _load(args, "P")
    est = sampled_packedness(P)
    _emit(RunReport(
        "packedness", curve_digest(P),
        {"value": est.value, "ball_family": est.ball_family, "center": est.center, "radius": est.radius},
    ))
    return 0


def _cmd_generate(args) -> int:
    curve = generate_c_packed_curve(args.n, args.c, args.dim, args.seed)
    if args.companion is not None:
        curve = companion_curve(curve, args.companion, args.seed + 1)
    fmt = args.format or (args.out.suffix.lstrip(".") if args.out else "json") or "json"
    text = serialize_curve(curve, fmt)
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_bench(args) -> int:
    rows = []
    approx_frechet(*_bench_pair(200, args), args.eps)  # compile kernels outside the timings
    for n in args.sizes:
        P, Q = _bench_pair(n, args)
        t = time.perf_counter()
        res = approx_frechet(P, Q, args.eps)
        rows.append({
            "n": n, "m": n, "seconds": time.perf_counter() - t,
            "value": res.value, "probes": res.stats.probes, "fuzzy_calls": res.stats.fuzzy_calls,
        })
    for a, b in zip(rows, rows[1:]):
        b["growth"] = b["seconds"] / a["seconds"] if a["seconds"] > 0 else None
    print(json.dumps({"command": "bench", "eps": args.eps, "c": args.c, "dim": args.dim, "rows": rows}, indent=2))
    return 0


def _bench_pair(n: int, args):
    P = generate_c_packed_curve(n, args.c, args.dim, args.seed)
    return P, companion_curve(P, n, args.seed + 1)


COMMANDS = {
    "approx": _cmd_approx,
    "decide": _cmd_decide,
    "exact": _cmd_exact,
    "simplify": _cmd_simplify,
    "packedness": _cmd_packedness,
    "generate": _cmd_generate,
    "bench": _cmd_bench,
}


def run_cli(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return COMMANDS[args.command](args)
    except (GeometryError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main(argv: list[str] | None = None) -> int:
    return run_cli(argv)


if __name__ == "__main__":
    raise SystemExit(main())
