"""Graph builders and independent checks shared by the test modules."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from lapinc.dense import laplacian, moore_penrose_residuals, pinv_baseline
from lapinc.generators import GenSpec, er_graph, pa_graph
from lapinc.graph import Graph

# Hand-derived from the series resistances 1, 1, 2.
PATH3_PINV = np.array([[5, -1, -4], [-1, 2, -1], [-4, -1, 5]]) / 9.0
K2_PINV = np.array([[1, -1], [-1, 1]]) / 4.0


def path(n: int) -> Graph:
    return Graph.from_edges(n, [(k, k + 1) for k in range(n - 1)])


def cycle(n: int) -> Graph:
    return Graph.from_edges(n, [(k, (k + 1) % n) for k in range(n)])


def star(n: int) -> Graph:
    return Graph.from_edges(n, [(0, k) for k in range(1, n)])


def clique(n: int) -> Graph:
    return Graph.from_edges(n, [(a, b) for a in range(n) for b in range(a + 1, n)])


def two_triangles() -> Graph:
    """Triangles {0,1,2} and {3,4,5} joined by the bridge (2, 3)."""
    return Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])


def base(g: Graph) -> np.ndarray:
    return pinv_baseline(laplacian(g))


def mp_worst(L, P) -> float:
    return max(moore_penrose_residuals(L, P).values())


def random_connected(rng: np.random.Generator, n: int, weighted: bool = False) -> Graph:
    """ER or PA graph of order ``n``, optionally with weights in [0.5, 2]."""
    seed = int(rng.integers(2**31))
    if rng.random() < 0.5:
        lo = min(3.0 / n, 0.5)
        rho = float(rng.uniform(lo, max(lo, min(0.5, 12.0 / n))))
        g = er_graph(GenSpec("er", n, rho=rho, seed=seed), connected=True)
    else:
        kappa = int(rng.integers(1, 4)) if n > 4 else 1
        g, _ = pa_graph(GenSpec("pa", n, kappa=kappa, seed=seed))
    if weighted:
        w = Graph(n)
        for u, v, _ in g.edges():
            w.add_edge(u, v, float(rng.uniform(0.5, 2.0)))
        g = w
    return g


def disjoint_union(g1: Graph, g2: Graph) -> Graph:
    g = Graph(g1.n + g2.n)
    for u, v, w in g1.edges():
        g.add_edge(u, v, w)
    for u, v, w in g2.edges():
        g.add_edge(u + g1.n, v + g1.n, w)
    return g


def components_brute(g: Graph) -> int:
    """Component count by repeated relaxation of a label array (no BFS)."""
    label = list(range(g.n))
    changed = True
    while changed:
        changed = False
        for u, v, _ in g.edges():
            lo = min(label[u], label[v])
            if label[u] != lo or label[v] != lo:
                label[u] = label[v] = lo
                changed = True
    return len(set(label))


def star_fraction(n: int, x: int, y: int) -> Fraction:
    nn = Fraction(1, n * n)
    if x == y == 0:
        return (n - 1) * nn
    if x == 0 or y == 0:
        return -nn
    if x == y:
        return (n * n - n - 1) * nn
    return -(n + 1) * nn
