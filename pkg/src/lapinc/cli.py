"""
Command-line entry point: ``lapinc {solve,evolve,stats,bench,generate}``.

Every flag falls back to an environment variable named ``LAPINC_<FLAG>``
(upper case, dashes as underscores), e.g. ``LAPINC_BASE_SIZE=128``.

Exit codes: 0 ok, 1 parse/domain error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import bench
from .dac import SolveConfig, solve, solve_matrix
from .dense import (
    centrality_ranking,
    format_matrix,
    kirchhoff_index,
    laplacian,
    moore_penrose_residuals,
    pinv_baseline,
    resistance_matrix,
    topological_centrality,
    write_matrix,
)
from .errors import LapincError
from .generators import GenSpec, er_graph, pa_graph
from .graph import connected_components, read_edge_list, write_edge_list
from .incremental import DynamicState, format_events, parse_events

EXIT_OK, EXIT_ERROR, EXIT_VERIFY = 0, 1, 2
MP_TOL = 1e-8


class VerificationFailed(Exception):
    pass


def _env(flag: str, default, cast=str):
    raw = os.environ.get("LAPINC_" + flag.upper().replace("-", "_"))
    if raw is None:
        return default
    if cast is bool:
        return raw.strip().lower() in ("1", "true", "yes", "on")
    return cast(raw)


def _int_list(text: str) -> list[int]:
    return [int(x) for x in str(text).replace(",", " ").split()]


# -- solve ----------------------------------------------------------------------


def _solve_full(g, method: str, base_size: int) -> np.ndarray:
    if method == "dense":
        return DynamicState(g).to_dense()
    return solve(g, SolveConfig(base_size=base_size)).to_dense()


def cmd_solve(args) -> int:
    g = read_edge_list(args.input)
    ncomp = connected_components(g).count
    if ncomp != 1 and not args.per_component:
        raise LapincError(f"graph has {ncomp} components; pass --per-component to solve each")
    P = _solve_full(g, args.method, args.base_size)
    write_matrix(P, args.output)
    print(f"solved n={g.n} m={g.m} components={ncomp} method={args.method}")
    if args.check:
        res = moore_penrose_residuals(laplacian(g), P)
        worst = max(res.values())
        print("moore-penrose residuals: " + " ".join(f"{k}={v:.3e}" for k, v in res.items()))
        print(f"max residual: {worst:.3e}")
        if worst > MP_TOL:
            raise VerificationFailed(f"residual {worst:.3e} exceeds {MP_TOL:g}")
    return EXIT_OK


# -- evolve ---------------------------------------------------------------------


def cmd_evolve(args) -> int:
    with open(args.events, "r", encoding="utf-8") as fh:
        events = parse_events(fh)
    state = DynamicState(auto_refresh=not args.no_auto_refresh)
    snap_dir = Path(args.snapshot_dir) if args.snapshot_every else None
    if snap_dir is not None:
        snap_dir.mkdir(parents=True, exist_ok=True)
    for step, (lineno, ev) in enumerate(events, start=1):
        try:
            state.apply(ev)
        except LapincError as exc:
            raise LapincError(f"line {lineno}: {ev.format()!r} failed: {exc}") from exc
        if len(state.last_ops) and "delete_bridge" in state.last_ops:
            print(f"line {lineno}: bridge deleted, component split "
                  f"({state.component_count} matrices)")
        if snap_dir is not None and step % args.snapshot_every == 0:
            write_matrix(state.to_dense(), snap_dir / f"step_{step:06d}.txt")
    print(f"replayed {len(events)} events: n={state.n} m={state.graph.m} "
          f"components={state.component_count} matrices={state.component_count} "
          f"refreshes={state.refresh_count}")
    if args.output:
        write_matrix(state.to_dense(), args.output)
    if args.verify_final and state.n:
        drift = state.drift()
        print(f"max drift vs baseline: {drift:.3e}")
        if drift > args.tol:
            raise VerificationFailed(f"drift {drift:.3e} exceeds {args.tol:g}")
    return EXIT_OK


# -- stats ----------------------------------------------------------------------


def cmd_stats(args) -> int:
    g = read_edge_list(args.input)
    ncomp = connected_components(g).count
    if ncomp != 1:
        raise LapincError(f"graph has {ncomp} components; stats need a connected graph")
    P = pinv_baseline(laplacian(g)) if args.method == "dense" else solve_matrix(
        g, SolveConfig(base_size=args.base_size))
    cent = topological_centrality(P)
    print(f"n={g.n} m={g.m} volume={g.volume!r}")
    print(f"kirchhoff_index: {float(kirchhoff_index(P))!r}")
    print(f"top {min(args.top, g.n)} by topological centrality:")
    for rank, x in enumerate(centrality_ranking(P)[: args.top], start=1):
        print(f"  {rank}. node {g.label(x)} centrality={float(cent[x])!r}")
    if args.omega_csv:
        omega = resistance_matrix(P)
        with open(args.omega_csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["u", "v", "resistance", "commute_time"])
            vol = g.volume
            for x in range(g.n):
                for y in range(x + 1, g.n):
                    w.writerow([g.label(x), g.label(y), repr(float(omega[x, y])),
                                repr(float(vol * omega[x, y]))])
    return EXIT_OK


# -- bench ----------------------------------------------------------------------


def cmd_bench(args) -> int:
    ns = _int_list(args.n)
    seeds = _int_list(args.seeds)
    if args.parallel_cells:
        print("note: --parallel-cells set; timings are not valid measurements", file=sys.stderr)
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor() as pool:
            chunks = list(pool.map(
                lambda n: bench.run_suite(args.suite, [n], seeds, args.repeats), ns))
        rows = [r for chunk in chunks for r in chunk]
        for r in rows:
            r.note = (r.note + " parallel-cells").strip()
    else:
        rows = bench.run_suite(args.suite, ns, seeds, args.repeats)
    if args.csv:
        bench.write_csv(rows, args.csv)
    else:
        sys.stdout.write(bench.format_csv(rows))
    return EXIT_OK


# -- generate -------------------------------------------------------------------


def cmd_generate(args) -> int:
    if args.kind == "pa":
        spec = GenSpec("pa", args.n, kappa=args.kappa, seed=args.seed)
        g, events = pa_graph(spec)
    else:
        spec = GenSpec("er", args.n, rho=args.rho, seed=args.seed)
        g = er_graph(spec, connected=args.connected)
        events = None
    if args.edges:
        write_edge_list(g, args.edges, header=spec.header())
    if args.events:
        if events is None:
            raise LapincError("event logs are only produced by the 'pa' generator")
        Path(args.events).write_text(format_events(events, header=spec.header()))
    print(f"generated {spec.kind} n={g.n} m={g.m} seed={spec.seed}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lapinc", description=__doc__.split("\n\n")[0].strip())
    p.add_argument("-v", "--verbose", action="store_true", default=_env("verbose", False, bool))
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="compute L+ of an edge list")
    s.add_argument("input")
    s.add_argument("output")
    s.add_argument("--method", choices=("dense", "dac"), default=_env("method", "dense"))
    s.add_argument("--base-size", type=int, default=_env("base_size", 64, int))
    s.add_argument("--check", action="store_true", default=_env("check", False, bool))
    s.add_argument("--per-component", action="store_true",
                   default=_env("per_component", False, bool))
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("evolve", help="replay an event log from an empty graph")
    e.add_argument("events")
    e.add_argument("--snapshot-every", type=int, default=_env("snapshot_every", 0, int))
    e.add_argument("--snapshot-dir", default=_env("snapshot_dir", "snapshots"))
    e.add_argument("--verify-final", action="store_true",
                   default=_env("verify_final", False, bool))
    e.add_argument("--tol", type=float, default=_env("tol", 1e-6, float))
    e.add_argument("--output", default=_env("output", None))
    e.add_argument("--no-auto-refresh", action="store_true",
                   default=_env("no_auto_refresh", False, bool))
    e.set_defaults(func=cmd_evolve)

    t = sub.add_parser("stats", help="Kirchhoff index, centrality and resistances")
    t.add_argument("input")
    t.add_argument("--top", type=int, default=_env("top", 10, int))
    t.add_argument("--omega-csv", default=_env("omega_csv", None))
    t.add_argument("--method", choices=("dense", "dac"), default=_env("method", "dense"))
    t.add_argument("--base-size", type=int, default=_env("base_size", 64, int))
    t.set_defaults(func=cmd_stats)

    b = sub.add_parser("bench", help="timing suites, CSV output")
    b.add_argument("--suite", choices=bench.SUITES, default=_env("suite", "update-scaling"))
    b.add_argument("--n", default=_env("n", "250,500"))
    b.add_argument("--seeds", default=_env("seeds", "1"))
    b.add_argument("--repeats", type=int, default=_env("repeats", 5, int))
    b.add_argument("--csv", default=_env("csv", None))
    b.add_argument("--parallel-cells", action="store_true",
                   default=_env("parallel_cells", False, bool))
    b.set_defaults(func=cmd_bench)

    gen = sub.add_parser("generate", help="write a random graph and/or event log")
    gen.add_argument("kind", choices=("pa", "er"))
    gen.add_argument("--n", type=int, default=_env("n", 100, int))
    gen.add_argument("--kappa", type=int, default=_env("kappa", 2, int))
    gen.add_argument("--rho", type=float, default=_env("rho", 0.1, float))
    gen.add_argument("--seed", type=int, default=_env("seed", 0, int))
    gen.add_argument("--connected", action="store_true", default=_env("connected", False, bool))
    gen.add_argument("--edges", default=_env("edges", None))
    gen.add_argument("--events", default=_env("events", None))
    gen.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except VerificationFailed as exc:
        print(f"lapinc: verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (LapincError, OSError) as exc:
        print(f"lapinc: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
