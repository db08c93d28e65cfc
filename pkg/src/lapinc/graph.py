"""
Simple undirected weighted graphs.

Nodes are dense integer ids in ``[0, n)``; external labels (for example the
integer ids of a SNAP file) are kept in a side table.  Edge weights are
affinities ``w > 0``; the matching electrical resistance is ``1 / w``.
"""

from __future__ import annotations

import io
import os
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Iterator

from .errors import DomainError, NotFoundError, ParseError, PreconditionError


class Graph:
    """Simple undirected weighted graph with an adjacency map and degree cache.

    No self-loops and no parallel edges.  Removing a node compacts the ids:
    every node with a larger id moves down by one.
    """

    def __init__(self, n: int = 0, labels: Iterable[Hashable] | None = None):
        if labels is not None:
            labels = list(labels)
            if len(labels) != n:
                raise DomainError(f"expected {n} labels, got {len(labels)}")
        else:
            labels = list(range(n))
        self._adj: list[dict[int, float]] = [{} for _ in range(n)]
        self._deg: list[float] = [0.0] * n
        self._labels: list[Hashable] = labels
        self._m = 0

    # -- size ---------------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self._adj)

    @property
    def m(self) -> int:
        return self._m

    @property
    def volume(self) -> float:
        """Sum of weighted degrees (twice the total edge weight)."""
        return float(sum(self._deg))

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"

    # -- labels -------------------------------------------------------------

    @property
    def labels(self) -> list[Hashable]:
        return list(self._labels)

    def label(self, u: int) -> Hashable:
        self._check_node(u)
        return self._labels[u]

    def node_of(self, label: Hashable) -> int:
        try:
            return self._labels.index(label)
        except ValueError:
            raise NotFoundError(f"no node labelled {label!r}") from None

    # -- queries ------------------------------------------------------------

    def _check_node(self, u: int) -> None:
        if not (0 <= u < len(self._adj)):
            raise NotFoundError(f"node {u} not in graph (n={self.n})")

    def has_node(self, u: int) -> bool:
        return 0 <= u < len(self._adj)

    def has_edge(self, u: int, v: int) -> bool:
        return self.has_node(u) and v in self._adj[u]

    def weight(self, u: int, v: int) -> float:
        self._check_node(u)
        try:
            return self._adj[u][v]
        except KeyError:
            raise NotFoundError(f"edge ({u}, {v}) not in graph") from None

    def neighbors(self, u: int) -> dict[int, float]:
        """Read-only view would be nicer; callers must not mutate the mapping."""
        self._check_node(u)
        return self._adj[u]

    def degree(self, u: int) -> float:
        """Weighted degree of ``u``."""
        self._check_node(u)
        return self._deg[u]

    def degrees(self) -> list[float]:
        return list(self._deg)

    def nodes(self) -> range:
        return range(self.n)

    def edges(self) -> list[tuple[int, int, float]]:
        """All edges as ``(u, v, w)`` with ``u < v``, in ascending order."""
        out = []
        for u, nbrs in enumerate(self._adj):
            for v in sorted(nbrs):
                if u < v:
                    out.append((u, v, nbrs[v]))
        return out

    def iter_edges(self) -> Iterator[tuple[int, int, float]]:
        for u, nbrs in enumerate(self._adj):
            for v, w in nbrs.items():
                if u < v:
                    yield u, v, w

    # -- mutators -----------------------------------------------------------

    def add_node(self, label: Hashable | None = None) -> int:
        """Append an isolated node and return its id."""
        u = len(self._adj)
        self._adj.append({})
        self._deg.append(0.0)
        self._labels.append(u if label is None else label)
        return u

    def add_edge(self, u: int, v: int, weight: float = 1.0) -> None:
        self._check_node(u)
        self._check_node(v)
        if u == v:
            raise DomainError(f"self-loop on node {u} rejected")
        if not weight > 0 or weight == float("inf"):
            raise DomainError(f"edge weight must be positive and finite, got {weight}")
        if v in self._adj[u]:
            raise PreconditionError(f"edge ({u}, {v}) already present")
        w = float(weight)
        self._adj[u][v] = w
        self._adj[v][u] = w
        self._m += 1
        self._refresh_degree(u)
        self._refresh_degree(v)

    def remove_edge(self, u: int, v: int) -> float:
        """Delete edge ``(u, v)`` and return its weight."""
        w = self.weight(u, v)
        del self._adj[u][v]
        del self._adj[v][u]
        self._m -= 1
        self._refresh_degree(u)
        self._refresh_degree(v)
        return w

    def remove_node(self, u: int) -> None:
        """Delete ``u`` with its incident edges and compact the ids above it."""
        self._check_node(u)
        for v in list(self._adj[u]):
            self.remove_edge(u, v)

        def shift(x):
            return x - 1 if x > u else x

        del self._adj[u]
        del self._deg[u]
        del self._labels[u]
        self._adj = [{shift(v): w for v, w in nbrs.items()} for nbrs in self._adj]

    def _refresh_degree(self, u: int) -> None:
        # Recomputed from the adjacency so the cache never drifts.
        self._deg[u] = float(sum(self._adj[u].values()))

    # -- derived graphs -----------------------------------------------------

    def copy(self) -> "Graph":
        g = Graph.__new__(Graph)
        g._adj = [dict(nbrs) for nbrs in self._adj]
        g._deg = list(self._deg)
        g._labels = list(self._labels)
        g._m = self._m
        return g

    def subgraph(self, nodes: Iterable[int]) -> "Graph":
        """Induced subgraph; local id ``k`` is the ``k``-th entry of ``nodes``."""
        nodes = list(nodes)
        local = {u: k for k, u in enumerate(nodes)}
        if len(local) != len(nodes):
            raise DomainError("subgraph node list contains duplicates")
        sub = Graph(len(nodes), labels=[self._labels[u] for u in nodes])
        for k, u in enumerate(nodes):
            self._check_node(u)
            for v, w in self._adj[u].items():
                kv = local.get(v)
                if kv is not None and k < kv:
                    sub.add_edge(k, kv, w)
        return sub

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple], labels=None) -> "Graph":
        """Build from ``(u, v)`` or ``(u, v, w)`` tuples; duplicates are errors."""
        g = cls(n, labels=labels)
        for e in edges:
            g.add_edge(*e)
        return g


# -- ingestion ----------------------------------------------------------------


def _lines(source) -> Iterator[str]:
    if isinstance(source, (bytes, bytearray)):
        source = source.decode("utf-8")
    if isinstance(source, str):
        yield from io.StringIO(source)
        return
    for line in source:
        yield line.decode("utf-8") if isinstance(line, (bytes, bytearray)) else line


def _label_key(tok: str):
    try:
        return int(tok)
    except ValueError:
        return tok


def parse_edge_list(source) -> Graph:
    """Parse SNAP-style edge-list text into a graph.

    Each non-comment line is ``u v [w]`` (whitespace separated, ``#`` starts a
    comment line, ``w`` defaults to 1).  Arcs are symmetrized; a pair seen
    more than once keeps its first weight.  Labels are compacted to dense
    ids: ascending numeric order when every label is an integer, order of
    first appearance otherwise.

    ``source`` may be a ``str``, ``bytes`` or an iterable of lines.
    """
    raw = []  # (label_u, label_v, w)
    for lineno, line in enumerate(_lines(source), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        toks = s.split()
        if len(toks) not in (2, 3):
            raise ParseError(f"expected 'u v [w]', got {s!r}", line=lineno)
        a, b = _label_key(toks[0]), _label_key(toks[1])
        w = 1.0
        if len(toks) == 3:
            try:
                w = float(toks[2])
            except ValueError:
                raise ParseError(f"bad weight {toks[2]!r}", line=lineno) from None
            if w != w or w == float("inf"):
                raise ParseError(f"weight must be finite, got {toks[2]!r}", line=lineno)
            if w <= 0:
                raise DomainError(f"line {lineno}: edge weight must be positive, got {w}")
        if a == b:
            raise ParseError(f"self-loop on {toks[0]!r} rejected", line=lineno)
        raw.append((a, b, w))

    seen = {}
    for a, b, _ in raw:
        seen.setdefault(a, None)
        seen.setdefault(b, None)
    labels = list(seen)
    if all(isinstance(x, int) for x in labels):
        labels.sort()
    index = {lab: k for k, lab in enumerate(labels)}

    g = Graph(len(labels), labels=labels)
    for a, b, w in raw:
        u, v = index[a], index[b]
        if not g.has_edge(u, v):
            g.add_edge(u, v, w)
    return g


def read_edge_list(path: str | os.PathLike) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_edge_list(fh)


def serialize_edge_list(g: Graph, header: Iterable[str] = ()) -> str:
    """One edge per line, ``u < v`` ascending; unit weights are omitted."""
    out = io.StringIO()
    for h in header:
        out.write(f"# {h}\n")
    for u, v, w in g.edges():
        if w == 1.0:
            out.write(f"{u} {v}\n")
        else:
            out.write(f"{u} {v} {w!r}\n")
    return out.getvalue()


def write_edge_list(g: Graph, path: str | os.PathLike, header: Iterable[str] = ()) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_edge_list(g, header))


# -- structure ----------------------------------------------------------------


@dataclass
class ComponentLabeling:
    """Connected components; ids are assigned in order of their smallest node."""

    label: list[int]
    sizes: dict[int, int]
    gcc_id: int | None
    _members: dict[int, list[int]] = field(default_factory=dict, repr=False)

    @property
    def count(self) -> int:
        return len(self.sizes)

    def members(self, cid: int) -> list[int]:
        """Nodes of component ``cid`` in ascending order."""
        return self._members[cid]

    def groups(self) -> list[list[int]]:
        return [self._members[c] for c in sorted(self._members)]

    @property
    def gcc(self) -> list[int]:
        return [] if self.gcc_id is None else self._members[self.gcc_id]


def _bfs(g: Graph, start: int, blocked: set[int] | None = None,
         skip_edge: tuple[int, int] | None = None) -> list[int]:
    seen = {start}
    order = [start]
    queue = deque([start])
    adj = g._adj
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if y in seen or (blocked is not None and y in blocked):
                continue
            if skip_edge is not None and (x, y) in (skip_edge, skip_edge[::-1]):
                continue
            seen.add(y)
            order.append(y)
            queue.append(y)
    return order


def connected_components(g: Graph, nodes: Iterable[int] | None = None) -> ComponentLabeling:
    """Label the components of ``g`` (or of the subgraph induced on ``nodes``).

    Nodes outside ``nodes`` get label ``-1``.  The giant component is the
    largest one, ties going to the smallest component id.
    """
    if nodes is None:
        alive = None
        order = range(g.n)
    else:
        order = sorted(set(nodes))
        alive = set(order)
    blocked = None if alive is None else set(range(g.n)) - alive
    label = [-1] * g.n
    sizes: dict[int, int] = {}
    members: dict[int, list[int]] = {}
    for s in order:
        if label[s] != -1:
            continue
        cid = len(sizes)
        comp = _bfs(g, s, blocked=blocked)
        for x in comp:
            label[x] = cid
        comp.sort()
        sizes[cid] = len(comp)
        members[cid] = comp
    gcc_id = None
    for cid, size in sizes.items():
        if gcc_id is None or size > sizes[gcc_id]:
            gcc_id = cid
    return ComponentLabeling(label=label, sizes=sizes, gcc_id=gcc_id, _members=members)


def is_connected(g: Graph) -> bool:
    return g.n > 0 and len(_bfs(g, 0)) == g.n


def bridge_sides(g: Graph, u: int, v: int) -> tuple[list[int], list[int]] | None:
    """If ``(u, v)`` is a bridge return the two sides (sorted), else ``None``."""
    if not g.has_edge(u, v):
        raise NotFoundError(f"edge ({u}, {v}) not in graph")
    side_u = _bfs(g, u, skip_edge=(u, v))
    if v in set(side_u):
        return None
    side_v = _bfs(g, v, skip_edge=(u, v))
    return sorted(side_u), sorted(side_v)


def is_bridge(g: Graph, u: int, v: int) -> bool:
    """True iff deleting ``(u, v)`` increases the number of components."""
    return bridge_sides(g, u, v) is not None


def degree_ordering(g: Graph) -> list[int]:
    """Nodes by weighted degree, descending; ties by ascending id."""
    deg = g._deg
    return sorted(range(g.n), key=lambda x: (-deg[x], x))
