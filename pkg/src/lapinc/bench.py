"""Timing harness comparing rank-one updates and divide-and-conquer against the baseline."""

from __future__ import annotations

import csv
import io
import math
import os
import statistics
import time
from dataclasses import astuple, dataclass, fields
from typing import Callable, Iterable

import numpy as np

from .dac import SolveConfig, solve_matrix
from .dense import laplacian, pinv_baseline
from .errors import DomainError
from .generators import GenSpec, er_graph, pa_graph, rng_for
from .incremental import fire_edge

CSV_HEADER = ["method", "n", "param", "seed", "wall_time", "max_err", "note"]
SUITES = ("update-scaling", "dac-vs-dense", "er-grid")


@dataclass
class BenchRecord:
    method: str
    n: int
    param: float
    seed: int
    wall_time: float
    max_err: float = math.nan
    note: str = ""


assert [f.name for f in fields(BenchRecord)] == CSV_HEADER


def median_time(fn: Callable[[], object], repeats: int = 5) -> tuple[float, object]:
    """Median wall time of ``repeats`` calls (monotonic clock) and the last result."""
    times = []
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), result


def random_non_edge(g, rng: np.random.Generator) -> tuple[int, int]:
    if g.m >= g.n * (g.n - 1) // 2:
        raise DomainError(f"complete graph on {g.n} nodes has no non-edge")
    while True:
        i, j = (int(x) for x in rng.choice(g.n, size=2, replace=False))
        if not g.has_edge(i, j):
            return i, j


def update_scaling(n: int, seed: int, rho: float = 0.05, repeats: int = 5) -> list[BenchRecord]:
    """One fire_edge versus a full baseline solve on a connected G(n, rho)."""
    g = er_graph(GenSpec("er", n, rho=rho, seed=seed), connected=True)
    L = laplacian(g)
    t_base, p = median_time(lambda: pinv_baseline(L), repeats)
    i, j = random_non_edge(g, rng_for(seed + 7919))
    t_fire, p2 = median_time(lambda: fire_edge(p, i, j, 1.0), repeats)
    g.add_edge(i, j)
    ref = pinv_baseline(laplacian(g))
    return [
        BenchRecord("baseline", n, rho, seed, t_base),
        BenchRecord("incremental", n, rho, seed, t_fire, float(np.abs(p2 - ref).max()),
                    f"fire_edge({i},{j})"),
    ]


def dac_vs_dense(n: int, seed: int, kappa: int = 2, base_size: int = 64,
                 repeats: int = 5) -> list[BenchRecord]:
    g, _ = pa_graph(GenSpec("pa", n, kappa=kappa, seed=seed))
    L = laplacian(g)
    t_base, ref = median_time(lambda: pinv_baseline(L), repeats)
    cfg = SolveConfig(base_size=base_size)
    t_dac, p = median_time(lambda: solve_matrix(g, cfg), repeats)
    return [
        BenchRecord("baseline", n, kappa, seed, t_base),
        BenchRecord("dac", n, kappa, seed, t_dac, float(np.abs(p - ref).max()), "pa graph"),
    ]


def er_grid(n: int, seed: int, rhos: Iterable[float] = (0.05, 0.3, 0.5),
            repeats: int = 5) -> list[BenchRecord]:
    out = []
    for rho in rhos:
        g = er_graph(GenSpec("er", n, rho=rho, seed=seed), connected=True)
        L = laplacian(g)
        t_base, ref = median_time(lambda: pinv_baseline(L), repeats)
        t_dac, p = median_time(lambda: solve_matrix(g), repeats)
        out.append(BenchRecord("baseline", n, rho, seed, t_base))
        out.append(BenchRecord("dac", n, rho, seed, t_dac, float(np.abs(p - ref).max())))
    return out


def run_suite(suite: str, ns: Iterable[int], seeds: Iterable[int],
              repeats: int = 5) -> list[BenchRecord]:
    """Run every (n, seed) cell; a failing cell becomes a NaN row with a note."""
    runner = {"update-scaling": update_scaling, "dac-vs-dense": dac_vs_dense,
              "er-grid": er_grid}[suite]
    rows = []
    for n in ns:
        for seed in seeds:
            try:
                rows.extend(runner(n, seed, repeats=repeats))
            except Exception as exc:  # recorded, not raised
                rows.append(BenchRecord(suite, n, math.nan, seed, math.nan, math.nan,
                                        f"failed: {type(exc).__name__}: {exc}"))
    return rows


def write_csv(rows: Iterable[BenchRecord], path: str | os.PathLike) -> None:
    """Append rows; the header is written only when the file is new or empty."""
    fresh = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if fresh:
            w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow(astuple(r))


def format_csv(rows: Iterable[BenchRecord]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(astuple(r))
    return out.getvalue()
