"""
Divide-and-conquer computation of the Laplacian pseudo-inverse.

Divide: strip high-degree nodes (the rich club) until the giant component
drops below half the graph, keep that component as one part and regroup
everything else into connected parts.  Conquer: solve the parts
independently, then stitch them back edge by edge along the cut, with a
first join whenever an edge links two separate pieces and an edge firing
otherwise.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dense import clique_pinv, laplacian, pinv_baseline, star_pinv
from .errors import DisconnectedError, DomainError, HeuristicFailed
from .graph import Graph, connected_components, degree_ordering
from .incremental import DynamicState, JoinSpec, fire_edge, first_join


@dataclass
class CutoffStats:
    removed: int
    components: int
    gcc_size: int
    gcc_edges: int
    cut_edges: int


@dataclass
class Partition:
    """Disjoint connected parts covering the graph, plus the edges between them."""

    parts: list[list[int]]
    cut_edges: list[tuple[int, int, float]]
    rich_club: list[int] = field(default_factory=list)
    cutoff_stats: CutoffStats | None = None

    def report(self) -> dict:
        return {
            "parts": [len(p) for p in self.parts],
            "cut_edges": len(self.cut_edges),
            "rich_club": len(self.rich_club),
            "cutoff": None if self.cutoff_stats is None else asdict(self.cutoff_stats),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.report(), **kwargs)

    def validate(self, g: Graph) -> None:
        seen = sorted(x for p in self.parts for x in p)
        if seen != list(range(g.n)):
            raise DomainError("parts are not disjoint and exhaustive")
        owner = {x: k for k, p in enumerate(self.parts) for x in p}
        for u, v, _ in self.cut_edges:
            if owner[u] == owner[v]:
                raise DomainError(f"cut edge ({u}, {v}) does not cross parts")
        for p in self.parts:
            if connected_components(g, p).count != 1:
                raise DomainError("a part does not induce a connected subgraph")


@dataclass
class SolveConfig:
    base_size: int = 64
    max_depth: int = 8
    parallel: bool = False
    closed_forms: bool = True
    max_workers: int | None = None

    def __post_init__(self):
        if self.base_size < 2:
            raise DomainError(f"base_size must be >= 2, got {self.base_size}")


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a, b):
        a, b = self.find(a), self.find(b)
        if a == b:
            return self.size[a]
        if self.size[a] < self.size[b]:
            a, b = b, a
        self.parent[b] = a
        self.size[a] += self.size[b]
        return self.size[a]


def _gcc_after_removal(g: Graph, order: list[int]) -> list[int]:
    """``out[k]`` = giant component size once ``order[:k]`` is removed.

    Computed in one reverse pass, re-inserting nodes into a union-find.
    """
    n = g.n
    out = [0] * (n + 1)
    uf = _UnionFind(n)
    present = [False] * n
    best = 0
    for k in range(n - 1, -1, -1):
        x = order[k]
        present[x] = True
        best = max(best, 1)
        for y in g.neighbors(x):
            if present[y]:
                best = max(best, uf.union(x, y))
        out[k] = best
    return out


def rich_club_split(g: Graph) -> Partition:
    """Split ``g`` by removing nodes in decreasing degree order.

    Removal stops at the first point where the giant component holds fewer
    than ``n / 2`` nodes (exactly half does not count).  That component is
    one part; the removed nodes and all other survivors, with their mutual
    edges restored, form the remaining parts.

    Raises :class:`HeuristicFailed` when the cut-off needs at least half of
    the nodes removed, or leaves a giant component of a single node.
    """
    n = g.n
    if n < 4:
        raise DomainError(f"rich_club_split needs n >= 4, got {n}")
    order = degree_ordering(g)
    sizes = _gcc_after_removal(g, order)
    k = next(k for k in range(n + 1) if 2 * sizes[k] < n)
    removed = order[:k]
    remaining = order[k:]
    labels = connected_components(g, remaining)
    gcc = labels.gcc

    if 2 * k >= n or len(gcc) < 2:
        raise HeuristicFailed(
            f"cut-off needs {k} of {n} nodes removed, giant component of size {len(gcc)}"
        )

    in_gcc = set(gcc)
    rest = [x for x in range(n) if x not in in_gcc]
    parts = [gcc] + connected_components(g, rest).groups()
    owner = {x: p for p, nodes in enumerate(parts) for x in nodes}
    cut, gcc_edges = [], 0
    for u, v, w in g.edges():
        if owner[u] != owner[v]:
            cut.append((u, v, w))
        elif u in in_gcc:
            gcc_edges += 1
    stats = CutoffStats(
        removed=k,
        components=labels.count,
        gcc_size=len(gcc),
        gcc_edges=gcc_edges,
        cut_edges=len(cut),
    )
    return Partition(parts=parts, cut_edges=cut, rich_club=sorted(removed), cutoff_stats=stats)


def reassemble(parts: Sequence[np.ndarray], part_nodes: Sequence[Sequence[int]],
               cut_edges: Sequence[tuple], sort_edges: bool = True,
               on_step: Callable[[str, int], None] | None = None) -> np.ndarray:
    """Combine per-part pseudo-inverses across the cut edges.

    ``cut_edges`` holds ``(u, v, w)`` in global node ids (``w`` defaults to
    1).  Edges are processed in ascending ``(u, v)`` order unless
    ``sort_edges`` is false.  ``on_step(kind, order)`` is called after each
    join or firing with the order of the matrix that was written.

    The result is indexed by the union of ``part_nodes`` in ascending order.
    """
    if len(parts) != len(part_nodes):
        raise DomainError("need one matrix per part")
    groups: dict[int, tuple[list[int], np.ndarray]] = {}
    where: dict[int, tuple[int, int]] = {}
    for gid, (p, nodes) in enumerate(zip(parts, part_nodes)):
        nodes = list(nodes)
        p = np.asarray(p, dtype=float)
        if p.shape != (len(nodes), len(nodes)):
            raise DomainError(f"part {gid}: matrix {p.shape} vs {len(nodes)} nodes")
        groups[gid] = (nodes, p)
        for k, x in enumerate(nodes):
            if x in where:
                raise DomainError(f"node {x} appears in two parts")
            where[x] = (gid, k)

    edges = [(e[0], e[1], e[2] if len(e) > 2 else 1.0) for e in cut_edges]
    if sort_edges:
        edges.sort(key=lambda e: (min(e[0], e[1]), max(e[0], e[1])))
    next_gid = len(groups)
    for u, v, w in edges:
        if u not in where or v not in where:
            raise DomainError(f"cut edge ({u}, {v}) names a node outside the parts")
        gu, ku = where[u]
        gv, kv = where[v]
        if gu == gv:
            nodes, p = groups[gu]
            groups[gu] = (nodes, fire_edge(p, ku, kv, 1.0 / w))
            if on_step:
                on_step("fire_edge", len(nodes))
        else:
            (na, pa), (nb, pb) = groups.pop(gu), groups.pop(gv)
            spec = JoinSpec(ku, kv, 1.0 / w, len(na), len(nb))
            merged = na + nb
            groups[next_gid] = (merged, first_join(pa, pb, spec))
            for k, x in enumerate(merged):
                where[x] = (next_gid, k)
            next_gid += 1
            if on_step:
                on_step("first_join", len(merged))
    if len(groups) != 1:
        raise DisconnectedError(f"cut edges leave {len(groups)} disconnected pieces")
    (nodes, p), = groups.values()
    perm = np.argsort(nodes, kind="stable")
    return p[np.ix_(perm, perm)]


def _unit_weights(g: Graph) -> bool:
    return all(w == 1.0 for _, _, w in g.iter_edges())


def closed_form_pinv(g: Graph) -> np.ndarray | None:
    """Closed-form ``L+`` when ``g`` is a unit-weight star or clique, else ``None``.

    Detection checks the degree multiset, which pins down both shapes for a
    simple graph.
    """
    n = g.n
    if n < 2 or not _unit_weights(g):
        return None
    deg = g.degrees()
    if g.m == n * (n - 1) // 2 and all(d == n - 1 for d in deg):
        return clique_pinv(n)
    if n >= 3 and g.m == n - 1:
        roots = [x for x in range(n) if deg[x] == n - 1]
        if len(roots) == 1 and sum(1 for d in deg if d == 1) == n - 1:
            r = roots[0]
            # star_pinv puts the root at index 0; src[x] is x's index there.
            src = np.empty(n, dtype=int)
            src[r] = 0
            src[[x for x in range(n) if x != r]] = np.arange(1, n)
            return star_pinv(n)[np.ix_(src, src)]
    return None


def _solve_connected(g: Graph, cfg: SolveConfig, depth: int, reports: list | None) -> np.ndarray:
    n = g.n
    if n <= cfg.base_size:
        return pinv_baseline(laplacian(g))
    if cfg.closed_forms:
        p = closed_form_pinv(g)
        if p is not None:
            return p
    if depth >= cfg.max_depth:
        return pinv_baseline(laplacian(g))
    try:
        part = rich_club_split(g)
    except HeuristicFailed:
        return pinv_baseline(laplacian(g))
    if reports is not None:
        reports.append(part)

    subs = [g.subgraph(nodes) for nodes in part.parts]
    if cfg.parallel and depth == 0 and len(subs) > 1:
        with ThreadPoolExecutor(max_workers=cfg.max_workers) as pool:
            mats = list(pool.map(lambda s: _solve_connected(s, cfg, depth + 1, None), subs))
    else:
        mats = [_solve_connected(s, cfg, depth + 1, reports) for s in subs]
    return reassemble(mats, part.parts, part.cut_edges)


def solve_matrix(g: Graph, cfg: SolveConfig | None = None,
                 reports: list | None = None) -> np.ndarray:
    """Pseudo-inverse of a connected graph by divide and conquer."""
    cfg = cfg or SolveConfig()
    if g.n == 0:
        raise DomainError("empty graph")
    if connected_components(g).count != 1:
        raise DisconnectedError("solve_matrix needs a connected graph; use solve()")
    return _solve_connected(g, cfg, 0, reports)


def solve(g: Graph, cfg: SolveConfig | None = None, reports: list | None = None,
          **state_kwargs) -> DynamicState:
    """Solve every component of ``g`` and wrap the result in a :class:`DynamicState`.

    ``reports`` collects the :class:`Partition` of every split performed.
    """
    cfg = cfg or SolveConfig()
    comps = []
    for nodes in connected_components(g).groups():
        sub = g.subgraph(nodes)
        comps.append((nodes, _solve_connected(sub, cfg, 0, reports)))
    return DynamicState.from_components(g, comps, **state_kwargs)
