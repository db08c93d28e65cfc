"""End-to-end acceptance checks.  Each test prints one PASS/FAIL line."""

import contextlib
import json
import statistics
import time

import numpy as np
import pytest

import conftest
from helpers import base, clique, disjoint_union, random_connected, star, star_fraction
from lapinc.dac import SolveConfig, reassemble, rich_club_split, solve_matrix
from lapinc.dense import (
    clique_pinv,
    laplacian,
    moore_penrose_residuals,
    pinv_baseline,
    resistance_matrix,
    sqrt_resistance_triangle_violation,
    star_pinv,
)
from lapinc.generators import GenSpec, er_graph, evolve, pa_graph
from lapinc.graph import Graph, bridge_sides, is_bridge
from lapinc.incremental import (
    DynamicState,
    JoinSpec,
    bridge_trace,
    delete_bridge,
    delete_non_bridge,
    fire_edge,
    first_join,
    join_trace,
)


@contextlib.contextmanager
def criterion(number, title, budget=None):
    info = {}
    t0 = time.perf_counter()
    try:
        yield info
        elapsed = time.perf_counter() - t0
        if budget is not None:
            assert elapsed < budget, f"took {elapsed:.1f}s, budget {budget}s"
    except BaseException as exc:
        line = f"[FAIL] {number:>2}. {title}: {exc}".splitlines()[0]
        conftest.ACCEPTANCE_LINES.append(line)
        print(line)
        raise
    detail = ", ".join(f"{k}={v}" for k, v in info.items())
    line = f"[PASS] {number:>2}. {title} ({time.perf_counter() - t0:.2f}s{', ' + detail if detail else ''})"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)


def sample_graph(rng, n):
    if rng.random() < 0.5:
        # Sparse but above the connectivity threshold ln(n)/n.
        rho = min(0.5, float(rng.uniform(1.5, 3.0)) * np.log(n) / n)
        return er_graph(GenSpec("er", n, rho=rho, seed=int(rng.integers(2**31))), connected=True)
    g, _ = pa_graph(GenSpec("pa", n, kappa=int(rng.integers(1, 4)), seed=int(rng.integers(2**31))))
    return g


def side_graph(rng, n):
    # Generators need a few nodes; tiny sides are paths.
    if n > 3:
        return sample_graph(rng, n)
    return Graph.from_edges(n, [(k, k + 1) for k in range(n - 1)])


def random_free_pair(rng, g):
    while True:
        i, j = (int(x) for x in rng.choice(g.n, 2, replace=False))
        if not g.has_edge(i, j):
            return i, j


def one_trial(rng, op):
    """Apply ``op`` once; return ((result, oracle) pairs, trace error or None, graphs used)."""
    n = int(rng.integers(20, 151))
    if op in ("first_join", "delete_bridge"):
        n1 = int(rng.integers(1, n))
        g1, g2 = side_graph(rng, n1), side_graph(rng, n - n1)
        i, j = int(rng.integers(n1)), int(rng.integers(n - n1))
        w = float(rng.uniform(0.5, 2.0))
        joined = disjoint_union(g1, g2)
        joined.add_edge(i, n1 + j, w)
        p1, p2 = base(g1), base(g2)
        if op == "first_join":
            spec = JoinSpec(i, j, 1.0 / w, n1, n - n1)
            out = first_join(p1, p2, spec, check=False)
            terr = abs(np.trace(out) - join_trace(p1, p2, spec))
            return [(out, base(joined))], terr, [g1, g2, joined]
        P = base(joined)
        side2, side3 = bridge_sides(joined, i, n1 + j)
        a, b = delete_bridge(P, side2, side3, check=False)
        terr = max(abs(np.trace(a) - bridge_trace(P, side2)), abs(np.trace(b) - bridge_trace(P, side3)))
        return [(a, p1), (b, p2)], terr, [joined, g1, g2]
    g = sample_graph(rng, n)
    P = base(g)
    h = g.copy()
    if op == "fire_edge":
        i, j = random_free_pair(rng, g)
        w = float(rng.uniform(0.5, 2.0))
        h.add_edge(i, j, w)
        out = fire_edge(P, i, j, 1.0 / w)
    else:
        cands = [e for e in g.edges() if not is_bridge(g, e[0], e[1])]
        if not cands:
            return one_trial(rng, "fire_edge")
        i, j, w = cands[int(rng.integers(len(cands)))]
        h.remove_edge(i, j)
        out = delete_non_bridge(P, i, j, 1.0 / w)
    return [(out, base(h))], None, [g, h]


@pytest.fixture(scope="module")
def atomic_trials():
    rng = np.random.default_rng(2024)
    ops = ("first_join", "fire_edge", "delete_non_bridge", "delete_bridge")
    t0 = time.perf_counter()
    trials = [(ops[k % 4],) + one_trial(rng, ops[k % 4]) for k in range(200)]
    return trials, time.perf_counter() - t0


def test_c01_closed_forms():
    with criterion(1, "closed-form star/clique exactness", budget=1.0) as info:
        worst = 0.0
        for n in range(2, 41):
            worst = max(worst, np.abs(star_pinv(n) - pinv_baseline(laplacian(star(n)))).max(),
                        np.abs(clique_pinv(n) - pinv_baseline(laplacian(clique(n)))).max())
        assert worst <= 1e-10, worst
        P = star_pinv(5)
        for (x, y), expect in {(0, 0): 4 / 25, (0, 3): -1 / 25, (2, 2): 19 / 25, (1, 4): -6 / 25}.items():
            assert P[x, y] == expect == float(star_fraction(5, x, y))
        info["max_err"] = f"{worst:.1e}"


def test_c02_atomic_oracle(atomic_trials):
    trials, secs = atomic_trials
    with criterion(2, "atomic-update oracle equivalence (200 trials)") as info:
        assert secs < 60, f"trials took {secs:.1f}s"
        worst = max(np.abs(a - b).max() for _, pairs, _, _ in trials for a, b in pairs)
        assert worst <= 1e-8, worst
        counts = {}
        for op, *_ in trials:
            counts[op] = counts.get(op, 0) + 1
        assert len(counts) == 4
        info["max_err"] = f"{worst:.1e}"
        info["trials_s"] = f"{secs:.1f}"


def test_c03_round_trips():
    with criterion(3, "fire/delete and join/split round trips (100 trials)", budget=30) as info:
        rng = np.random.default_rng(303)
        worst = 0.0
        for k in range(100):
            if k % 2 == 0:
                g = sample_graph(rng, int(rng.integers(20, 151)))
                P = base(g)
                i, j = random_free_pair(rng, g)
                r = float(rng.uniform(0.5, 2.0))
                back = delete_non_bridge(fire_edge(P, i, j, r), i, j, r)
                worst = max(worst, np.abs(back - P).max())
            else:
                g1 = random_connected(rng, int(rng.integers(2, 80)), weighted=True)
                g2 = random_connected(rng, int(rng.integers(2, 80)), weighted=True)
                p1, p2 = base(g1), base(g2)
                spec = JoinSpec(int(rng.integers(g1.n)), int(rng.integers(g2.n)),
                                float(rng.uniform(0.5, 2.0)), g1.n, g2.n)
                P = first_join(p1, p2, spec)
                a, b = delete_bridge(P, list(range(g1.n)), list(range(g1.n, g1.n + g2.n)))
                worst = max(worst, np.abs(a - p1).max(), np.abs(b - p2).max())
        assert worst <= 1e-9, worst
        info["max_err"] = f"{worst:.1e}"


def test_c04_trace_identities(atomic_trials):
    trials, _ = atomic_trials
    with criterion(4, "trace identities on join and bridge-delete trials") as info:
        errs = [terr for _, _, terr, _ in trials if terr is not None]
        assert len(errs) == 100
        assert max(errs) <= 1e-10, max(errs)
        info["max_err"] = f"{max(errs):.1e}"


def test_c05_order_independence():
    with criterion(5, "order independence of a 4-cut-edge bi-partition") as info:
        rng = np.random.default_rng(505)
        g1 = random_connected(rng, 30, weighted=True)
        g2 = random_connected(rng, 25, weighted=True)
        cuts = [(0, 30, 1.0), (7, 41, 2.0), (12, 30, 0.5), (29, 54, 1.5)]
        mats = [base(g1), base(g2)]
        nodes = [list(range(30)), list(range(30, 55))]
        outs = [reassemble(mats, nodes, [cuts[k] for k in rng.permutation(4)], sort_edges=False)
                for _ in range(10)]
        spread = max(np.abs(P - outs[0]).max() for P in outs)
        assert spread <= 1e-9, spread
        g = disjoint_union(g1, g2)
        for u, v, w in cuts:
            g.add_edge(u, v, w)
        assert np.abs(outs[0] - base(g)).max() <= 1e-9
        info["spread"] = f"{spread:.1e}"


def test_c06_dynamic_drift():
    with criterion(6, "PA growth n=500 kappa=2 drift", budget=120) as info:
        g, events = pa_graph(GenSpec("pa", 500, kappa=2, seed=6))
        state = evolve(DynamicState(auto_refresh=False), events)
        assert state.refresh_count == 0
        drift = np.abs(state.pinv() - base(g)).max()
        assert drift <= 1e-6, drift
        info["drift"] = f"{drift:.1e}"
        info["updates"] = state.update_count


def _fire_and_baseline_times(n, seed, fires=15, repeats=5):
    g = er_graph(GenSpec("er", n, rho=0.05, seed=seed), connected=True)
    L = laplacian(g)
    t_base = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        P = pinv_baseline(L)
        t_base.append(time.perf_counter() - t0)
    rng = np.random.default_rng(seed)
    t_fire = []
    for _ in range(fires):
        i, j = random_free_pair(rng, g)
        for _ in range(repeats):
            t0 = time.perf_counter()
            fire_edge(P, i, j, 1.0)
            t_fire.append(time.perf_counter() - t0)
    return statistics.median(t_fire), statistics.median(t_base)


def test_c07_update_cost_scaling():
    with criterion(7, "update-cost scaling (ER rho=0.05)", budget=600) as info:
        f500, _ = _fire_and_baseline_times(500, 7)
        f1000, b1000 = _fire_and_baseline_times(1000, 7)
        ratio = f1000 / b1000
        growth = f1000 / f500
        info["fire/baseline@1000"] = f"{ratio:.3f}"
        info["fire growth 500->1000"] = f"{growth:.2f}"
        assert ratio <= 0.2, f"fire/baseline ratio {ratio:.3f}"
        assert 3 <= growth <= 6, f"fire_edge growth {growth:.2f}"


def test_c08_dac_equivalence():
    with criterion(8, "divide-and-conquer equals baseline (25 instances)", budget=300) as info:
        rng = np.random.default_rng(808)
        worst, splits = 0.0, 0
        for k in range(25):
            n = int(rng.integers(100, 401))
            seed = int(rng.integers(2**31))
            if k % 5 == 4:
                g = er_graph(GenSpec("er", n, rho=min(0.5, 4.0 / n), seed=seed), connected=True)
            else:
                g, _ = pa_graph(GenSpec("pa", n, kappa=1 + k % 3, seed=seed))
            reports = []
            P = solve_matrix(g, SolveConfig(base_size=64), reports)
            splits += bool(reports)
            worst = max(worst, np.abs(P - base(g)).max())
        assert worst <= 1e-8, worst
        assert splits >= 20, f"only {splits} instances were split"
        info["max_err"] = f"{worst:.1e}"
        info["split_instances"] = splits


def test_c09_rich_club():
    with criterion(9, "rich-club cutoff on PA n=2000 kappa=2 (5 seeds)", budget=120) as info:
        fracs = []
        for seed in range(1, 6):
            g, _ = pa_graph(GenSpec("pa", 2000, kappa=2, seed=seed))
            part = rich_club_split(g)
            rep = json.loads(part.to_json())
            print(f"seed={seed} report={json.dumps(rep)}")
            assert rep["cutoff"]["removed"] <= 0.15 * 2000
            assert rep["cutoff"]["gcc_size"] < 1000
            fracs.append(rep["cutoff"]["removed"] / 2000)
        info["removed_frac"] = f"{min(fracs):.3f}-{max(fracs):.3f}"


def test_c10_mp_and_metric(atomic_trials):
    trials, _ = atomic_trials
    with criterion(10, "Moore-Penrose conditions and sqrt-resistance metric") as info:
        worst_mp, worst_tri, count = 0.0, 0.0, 0
        for _, _, _, graphs in trials:
            for g in graphs:
                if g.n < 2:
                    continue
                L = laplacian(g)
                P = pinv_baseline(L)
                worst_mp = max(worst_mp, max(moore_penrose_residuals(L, P).values()))
                worst_tri = max(worst_tri, sqrt_resistance_triangle_violation(resistance_matrix(P)))
                count += 1
        assert worst_mp <= 1e-8, worst_mp
        assert worst_tri <= 1e-12, worst_tri
        info["graphs"] = count
        info["mp"] = f"{worst_mp:.1e}"
