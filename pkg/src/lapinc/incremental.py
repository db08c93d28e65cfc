"""
Rank-one maintenance of the Laplacian pseudo-inverse.

The four atomic updates are pure functions from the old matrix (or
matrices) to the new one and cost O(n^2): every output entry depends only
on a fixed handful of input entries, so each is a single vectorized pass.

:class:`DynamicState` keeps a :class:`~lapinc.graph.Graph` and one
pseudo-inverse per connected component in sync under a stream of events.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .dense import centering_error, laplacian, pinv_baseline
from .errors import (
    BridgeSuspectedError,
    DomainError,
    NotFoundError,
    NumericalError,
    ParseError,
    PreconditionError,
)
from .graph import Graph, bridge_sides, connected_components

log = logging.getLogger(__name__)

# Relative guard band on (resistance - Omega_ij) for non-bridge deletion.
BRIDGE_EPS = 1e-9
# Trace identities are checked to this tolerance times max(1, |trace|).
TRACE_TOL = 1e-10


@dataclass(frozen=True)
class JoinSpec:
    """Edge ``(i, j)`` of resistance ``resistance`` joining parts of orders ``n1``, ``n2``.

    ``i`` indexes the first part, ``j`` the second, both as local ids.
    """

    i: int
    j: int
    resistance: float
    n1: int
    n2: int

    def __post_init__(self):
        if not self.resistance > 0:
            raise DomainError(f"resistance must be positive, got {self.resistance}")
        if self.n1 < 1 or self.n2 < 1:
            raise DomainError("both parts of a join need at least one node")
        if not (0 <= self.i < self.n1 and 0 <= self.j < self.n2):
            raise DomainError(f"join endpoints ({self.i}, {self.j}) out of range")


def join_trace(p1: np.ndarray, p2: np.ndarray, spec: JoinSpec) -> float:
    """Trace of the joined pseudo-inverse predicted from the parts alone."""
    shared = p1[spec.i, spec.i] + p2[spec.j, spec.j] + spec.resistance
    n1, n2 = spec.n1, spec.n2
    return float(np.trace(p1) + np.trace(p2) + n1 * n2 / (n1 + n2) * shared)


def first_join(p1: np.ndarray, p2: np.ndarray, spec: JoinSpec, check: bool = True) -> np.ndarray:
    """Pseudo-inverse after the first edge between two disjoint components.

    The result has order ``n1 + n2`` with the first part's nodes first.
    With ``check`` the trace is compared against :func:`join_trace`.
    """
    if p1.shape != (spec.n1, spec.n1) or p2.shape != (spec.n2, spec.n2):
        raise DomainError(
            f"matrix shapes {p1.shape}, {p2.shape} do not match n1={spec.n1}, n2={spec.n2}"
        )
    n1, n2 = spec.n1, spec.n2
    n3 = n1 + n2
    i, j = spec.i, spec.j
    shared = p1[i, i] + p2[j, j] + spec.resistance
    ci = p1[:, i]
    cj = p2[:, j]

    out = np.empty((n3, n3))
    out[:n1, :n1] = p1 - (n2 / n3) * (ci[:, None] + ci[None, :]) + (n2 * n2 / (n3 * n3)) * shared
    out[n1:, n1:] = p2 - (n1 / n3) * (cj[:, None] + cj[None, :]) + (n1 * n1 / (n3 * n3)) * shared
    cross = (n1 * ci[:, None] + n2 * cj[None, :]) / n3 - (n1 * n2 / (n3 * n3)) * shared
    out[:n1, n1:] = cross
    out[n1:, :n1] = cross.T

    if check:
        expected = join_trace(p1, p2, spec)
        got = float(np.trace(out))
        if abs(got - expected) > TRACE_TOL * max(1.0, abs(expected)):
            raise NumericalError(f"first join trace {got!r} != predicted {expected!r}")
    return out


def _endpoints(p: np.ndarray, i: int, j: int, resistance: float):
    n = p.shape[0]
    if i == j:
        raise DomainError(f"edge endpoints must differ, got ({i}, {j})")
    if not (0 <= i < n and 0 <= j < n):
        raise DomainError(f"edge ({i}, {j}) out of range for n={n}")
    if not resistance > 0:
        raise DomainError(f"resistance must be positive, got {resistance}")


def fire_edge(p: np.ndarray, i: int, j: int, resistance: float) -> np.ndarray:
    """Pseudo-inverse after adding edge ``(i, j)`` inside a connected graph."""
    _endpoints(p, i, j, resistance)
    d = p[:, i] - p[:, j]
    omega_ij = d[i] - d[j]
    return p - np.outer(d, d) / (resistance + omega_ij)


def delete_non_bridge(p: np.ndarray, i: int, j: int, resistance: float) -> np.ndarray:
    """Pseudo-inverse after removing a non-bridge edge ``(i, j)``.

    Raises :class:`BridgeSuspectedError` when ``resistance - Omega_ij`` is
    within ``BRIDGE_EPS * resistance`` of zero.
    """
    _endpoints(p, i, j, resistance)
    d = p[:, i] - p[:, j]
    omega_ij = d[i] - d[j]
    gap = resistance - omega_ij
    if gap < BRIDGE_EPS * resistance:
        raise BridgeSuspectedError(
            f"edge ({i}, {j}) looks like a bridge: resistance {resistance!r}, Omega {omega_ij!r}"
        )
    return p + np.outer(d, d) / gap


def _resistance_update(omega: np.ndarray, i: int, j: int, resistance: float, sign: float):
    _endpoints(omega, i, j, resistance)
    t = omega[:, j] - omega[:, i]
    diff = t[:, None] - t[None, :]
    denom = 4.0 * (resistance + sign * omega[i, j])
    return denom, diff


def fire_edge_resistances(omega: np.ndarray, i: int, j: int, resistance: float) -> np.ndarray:
    """All-pairs resistances after adding edge ``(i, j)``, without forming ``L+``."""
    denom, diff = _resistance_update(omega, i, j, resistance, 1.0)
    return omega - diff * diff / denom


def delete_edge_resistances(omega: np.ndarray, i: int, j: int, resistance: float) -> np.ndarray:
    """All-pairs resistances after removing non-bridge edge ``(i, j)``."""
    denom, diff = _resistance_update(omega, i, j, resistance, -1.0)
    if denom < 4.0 * BRIDGE_EPS * resistance:
        raise BridgeSuspectedError(
            f"edge ({i}, {j}) looks like a bridge: resistance {resistance!r}, Omega {omega[i, j]!r}"
        )
    return omega + diff * diff / denom


def bridge_trace(p: np.ndarray, side: Sequence[int]) -> float:
    """Trace of one side's pseudo-inverse predicted from the joined matrix."""
    idx = np.asarray(side, dtype=int)
    block = p[np.ix_(idx, idx)]
    return float(np.trace(block) - block.sum() / len(idx))


def _center_block(p: np.ndarray, idx: np.ndarray, check: bool) -> np.ndarray:
    block = p[np.ix_(idx, idx)]
    k = len(idx)
    r = block.sum(axis=1) / k
    out = block - r[:, None] - r[None, :] + block.sum() / (k * k)
    if check:
        expected = bridge_trace(p, idx)
        got = float(np.trace(out))
        if abs(got - expected) > TRACE_TOL * max(1.0, abs(expected)):
            raise NumericalError(f"bridge split trace {got!r} != predicted {expected!r}")
    return 0.5 * (out + out.T)


def delete_bridge(p: np.ndarray, side2: Iterable[int], side3: Iterable[int],
                  check: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Split ``L+`` across a deleted bridge into the two sides' pseudo-inverses.

    ``side2`` and ``side3`` must partition ``range(n)``.  Each returned matrix
    is indexed by the side's nodes in ascending order.
    """
    n = p.shape[0]
    s2 = sorted(set(side2))
    s3 = sorted(set(side3))
    if not s2 or not s3 or len(s2) + len(s3) != n or set(s2) | set(s3) != set(range(n)):
        raise DomainError("bridge sides must be a non-trivial partition of the nodes")
    return (
        _center_block(p, np.asarray(s2), check),
        _center_block(p, np.asarray(s3), check),
    )


def perturb_pinv(v_pinv: np.ndarray, x: np.ndarray, alpha: int) -> np.ndarray:
    """Generic rank-q update ``(V + a X X')+`` from ``V+`` for ``a`` in {+1, -1}.

    Valid when ``X`` lies in the range of ``V`` and ``I + a X' V+ X`` is
    invertible.  Used to cross-check :func:`fire_edge` and
    :func:`delete_non_bridge`.
    """
    if alpha not in (1, -1):
        raise DomainError("alpha must be +1 or -1")
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    vx = v_pinv @ x
    core = np.eye(x.shape[1]) + alpha * (x.T @ vx)
    return v_pinv - alpha * vx @ np.linalg.solve(core, vx.T)


# -- events -------------------------------------------------------------------

EVENT_KINDS = ("add-node", "add-edge", "del-edge", "del-node")


@dataclass(frozen=True)
class Event:
    """A graph mutation.

    ``add-node`` carries the endpoints of the new node's unit edges;
    ``add-edge`` uses ``u``, ``v`` and ``weight``; the deletions use ``u``
    (and ``v``).
    """

    kind: str
    u: int | None = None
    v: int | None = None
    weight: float = 1.0
    endpoints: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise DomainError(f"unknown event kind {self.kind!r}")

    @classmethod
    def add_node(cls, endpoints: Iterable[int] = ()) -> "Event":
        return cls("add-node", endpoints=tuple(endpoints))

    @classmethod
    def add_edge(cls, u: int, v: int, weight: float = 1.0) -> "Event":
        return cls("add-edge", u, v, weight)

    @classmethod
    def del_edge(cls, u: int, v: int) -> "Event":
        return cls("del-edge", u, v)

    @classmethod
    def del_node(cls, u: int) -> "Event":
        return cls("del-node", u)

    def format(self) -> str:
        if self.kind == "add-node":
            return " ".join(["add-node", *map(str, self.endpoints)])
        if self.kind == "add-edge":
            return f"add-edge {self.u} {self.v} {self.weight!r}"
        if self.kind == "del-edge":
            return f"del-edge {self.u} {self.v}"
        return f"del-node {self.u}"


def _parse_event(toks: list[str], lineno: int) -> Event:
    kind, args = toks[0], toks[1:]
    try:
        if kind == "add-node":
            return Event.add_node(int(a) for a in args)
        if kind == "add-edge" and len(args) in (2, 3):
            w = float(args[2]) if len(args) == 3 else 1.0
            if not w > 0:
                raise DomainError(f"edge weight must be positive, got {w}")
            return Event.add_edge(int(args[0]), int(args[1]), w)
        if kind == "del-edge" and len(args) == 2:
            return Event.del_edge(int(args[0]), int(args[1]))
        if kind == "del-node" and len(args) == 1:
            return Event.del_node(int(args[0]))
    except (ValueError, DomainError) as exc:
        raise ParseError(f"bad event {' '.join(toks)!r}: {exc}", line=lineno) from None
    raise ParseError(f"bad event {' '.join(toks)!r}", line=lineno)


def parse_events(source) -> list[tuple[int, Event]]:
    """Parse an event log into ``(line number, event)`` pairs."""
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        source = io.StringIO(source)
    out = []
    for lineno, line in enumerate(source, start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        out.append((lineno, _parse_event(s.split(), lineno)))
    return out


def format_events(events: Iterable[Event], header: Iterable[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    lines.extend(e.format() for e in events)
    return "\n".join(lines) + "\n"


# -- dynamic state ------------------------------------------------------------


@dataclass(frozen=True)
class Component:
    """A connected component: its global node ids and pseudo-inverse, index-aligned."""

    nodes: tuple[int, ...]
    pinv: np.ndarray

    @property
    def n(self) -> int:
        return len(self.nodes)


_SINGLETON = np.zeros((1, 1))
_SINGLETON.flags.writeable = False


class DynamicState:
    """A graph and the pseudo-inverse of every component, kept in sync.

    Mutations go through :meth:`apply` (or the matching helpers) and are
    all-or-nothing: a failing event leaves the state untouched.

    Drift control: the state refreshes from scratch after ``10 * n`` atomic
    updates, or when a touched component's row sums exceed ``1e-7 * n``.
    Pass ``auto_refresh=False`` to disable both.
    """

    REFRESH_EVERY = 10
    DRIFT_CENTERING = 1e-7

    def __init__(self, graph: Graph | None = None, *, auto_refresh: bool = True,
                 check: bool = True):
        self.graph = Graph() if graph is None else graph.copy()
        self.auto_refresh = auto_refresh
        self.check = check
        self.update_count = 0
        self.refresh_count = 0
        self.last_ops: list[str] = []
        self._comps: dict[int, Component] = {}
        self._where: list[tuple[int, int]] = []
        self._next_cid = 0
        self._needs_refresh = False
        if self.graph.n:
            labels = connected_components(self.graph)
            for nodes in labels.groups():
                sub = self.graph.subgraph(nodes)
                self._install(Component(tuple(nodes), pinv_baseline(laplacian(sub))))

    @classmethod
    def from_components(cls, graph: Graph, comps: Iterable[tuple[Sequence[int], np.ndarray]],
                        **kwargs) -> "DynamicState":
        """Wrap precomputed per-component matrices (used by the divide-and-conquer solver)."""
        state = cls(None, **kwargs)
        state.graph = graph.copy()
        for nodes, p in comps:
            state._install(Component(tuple(nodes), np.asarray(p)))
        seen = sorted(x for c in state._comps.values() for x in c.nodes)
        if seen != list(range(graph.n)):
            raise DomainError("components do not cover the graph's nodes exactly once")
        return state

    # -- bookkeeping --

    def _install(self, comp: Component) -> int:
        cid = self._next_cid
        self._next_cid += 1
        self._comps[cid] = comp
        need = max(comp.nodes) + 1 - len(self._where)
        if need > 0:
            self._where.extend([(-1, -1)] * need)
        for k, x in enumerate(comp.nodes):
            self._where[x] = (cid, k)
        return cid

    def _snapshot(self):
        return (self.graph.copy(), dict(self._comps), list(self._where), self._next_cid,
                self.update_count, self._needs_refresh)

    def _restore(self, snap):
        (self.graph, self._comps, self._where, self._next_cid,
         self.update_count, self._needs_refresh) = snap

    def _touched(self, comp: Component) -> None:
        self.update_count += 1
        if self.check and centering_error(comp.pinv) > self.DRIFT_CENTERING * comp.n:
            self._needs_refresh = True

    # -- queries --

    @property
    def n(self) -> int:
        return self.graph.n

    def components(self) -> list[Component]:
        """Components ordered by their smallest node id."""
        return sorted(self._comps.values(), key=lambda c: min(c.nodes))

    @property
    def component_count(self) -> int:
        return len(self._comps)

    def component_of(self, x: int) -> Component:
        if not self.graph.has_node(x):
            raise NotFoundError(f"node {x} not in graph")
        return self._comps[self._where[x][0]]

    def entry(self, x: int, y: int) -> float:
        """``L+[x, y]`` of the whole graph (zero across components)."""
        cx, kx = self._where[x]
        cy, ky = self._where[y]
        if cx != cy:
            return 0.0
        return float(self._comps[cx].pinv[kx, ky])

    def resistance(self, x: int, y: int) -> float:
        cx, kx = self._where[x]
        cy, ky = self._where[y]
        if cx != cy:
            return float("inf")
        p = self._comps[cx].pinv
        return float(p[kx, kx] + p[ky, ky] - 2.0 * p[kx, ky])

    def to_dense(self) -> np.ndarray:
        """Pseudo-inverse of the whole Laplacian in global id order (block diagonal)."""
        out = np.zeros((self.n, self.n))
        for comp in self._comps.values():
            idx = np.asarray(comp.nodes)
            out[np.ix_(idx, idx)] = comp.pinv
        return out

    def pinv(self) -> np.ndarray:
        """Pseudo-inverse in global id order; requires a connected graph."""
        if len(self._comps) != 1:
            raise DomainError(f"graph has {len(self._comps)} components")
        return self.to_dense()

    # -- atomic mutations (no rollback of their own) --

    def _add_node(self) -> int:
        x = self.graph.add_node()
        self._install(Component((x,), _SINGLETON))
        self.last_ops.append("new-singleton")
        return x

    def _add_edge(self, u: int, v: int, weight: float) -> None:
        g = self.graph
        if not (g.has_node(u) and g.has_node(v)):
            raise NotFoundError(f"edge endpoint missing: ({u}, {v})")
        if g.has_edge(u, v):
            raise PreconditionError(f"edge ({u}, {v}) already present")
        g.add_edge(u, v, weight)  # validates weight and self-loops
        resistance = 1.0 / weight
        cu, ku = self._where[u]
        cv, kv = self._where[v]
        if cu == cv:
            comp = self._comps[cu]
            new = Component(comp.nodes, fire_edge(comp.pinv, ku, kv, resistance))
            self._comps[cu] = new
            self.last_ops.append("fire_edge")
        else:
            a, b = self._comps.pop(cu), self._comps.pop(cv)
            spec = JoinSpec(ku, kv, resistance, a.n, b.n)
            new = Component(a.nodes + b.nodes, first_join(a.pinv, b.pinv, spec, check=self.check))
            self._install(new)
            self.last_ops.append("first_join")
        self._touched(new)

    def _del_edge(self, u: int, v: int) -> None:
        g = self.graph
        weight = g.weight(u, v)
        sides = bridge_sides(g, u, v)
        cid, ku = self._where[u]
        _, kv = self._where[v]
        comp = self._comps[cid]
        if sides is None:
            new = Component(comp.nodes, delete_non_bridge(comp.pinv, ku, kv, 1.0 / weight))
            self._comps[cid] = new
            self.last_ops.append("delete_non_bridge")
            touched = [new]
        else:
            side_u = set(sides[0])
            loc_u = [k for k, x in enumerate(comp.nodes) if x in side_u]
            loc_v = [k for k, x in enumerate(comp.nodes) if x not in side_u]
            pu, pv = delete_bridge(comp.pinv, loc_u, loc_v, check=self.check)
            del self._comps[cid]
            touched = [
                Component(tuple(comp.nodes[k] for k in loc_u), pu),
                Component(tuple(comp.nodes[k] for k in loc_v), pv),
            ]
            for c in touched:
                self._install(c)
            self.last_ops.append("delete_bridge")
        g.remove_edge(u, v)
        for c in touched:
            self._touched(c)

    def _del_node(self, u: int) -> None:
        if not self.graph.has_node(u):
            raise NotFoundError(f"node {u} not in graph")
        for v in sorted(self.graph.neighbors(u)):
            self._del_edge(u, v)
        cid, _ = self._where[u]
        del self._comps[cid]
        self.graph.remove_node(u)
        self.last_ops.append("drop-singleton")

        def shift(x):
            return x - 1 if x > u else x

        old = list(self._comps.values())
        self._comps = {}
        self._where = []
        for comp in old:
            self._install(Component(tuple(shift(x) for x in comp.nodes), comp.pinv))

    # -- public API --

    def apply(self, event: Event) -> "DynamicState":
        """Apply one event atomically; returns ``self``."""
        snap = self._snapshot()
        self.last_ops = []
        try:
            if event.kind == "add-node":
                x = self._add_node()
                for t in event.endpoints:
                    self._add_edge(x, t, 1.0)
            elif event.kind == "add-edge":
                self._add_edge(event.u, event.v, event.weight)
            elif event.kind == "del-edge":
                self._del_edge(event.u, event.v)
            else:
                self._del_node(event.u)
        except Exception:
            self._restore(snap)
            raise
        if self.auto_refresh and self.n and (
            self._needs_refresh or self.update_count >= self.REFRESH_EVERY * self.n
        ):
            delta = self.refresh()
            log.info("automatic refresh after drift check, delta %.3e", delta)
        return self

    def add_node(self, endpoints: Iterable[int] = ()) -> int:
        self.apply(Event.add_node(endpoints))
        return self.n - 1

    def add_edge(self, u: int, v: int, weight: float = 1.0) -> None:
        self.apply(Event.add_edge(u, v, weight))

    def delete_edge(self, u: int, v: int) -> None:
        self.apply(Event.del_edge(u, v))

    def delete_node(self, u: int) -> None:
        self.apply(Event.del_node(u))

    def refresh(self) -> float:
        """Recompute every component from scratch; returns the max-norm change."""
        delta = 0.0
        for cid, comp in list(self._comps.items()):
            sub = self.graph.subgraph(comp.nodes)
            fresh = pinv_baseline(laplacian(sub))
            delta = max(delta, float(np.abs(fresh - comp.pinv).max()))
            self._comps[cid] = Component(comp.nodes, fresh)
        self.update_count = 0
        self.refresh_count += 1
        self._needs_refresh = False
        return delta

    def drift(self) -> float:
        """Max-norm distance to a from-scratch recomputation, without replacing anything."""
        worst = 0.0
        for comp in self._comps.values():
            fresh = pinv_baseline(laplacian(self.graph.subgraph(comp.nodes)))
            worst = max(worst, float(np.abs(fresh - comp.pinv).max()))
        return worst

    def __repr__(self):
        return (f"DynamicState(n={self.n}, m={self.graph.m}, "
                f"components={len(self._comps)}, updates={self.update_count})")


def apply_event(state: DynamicState, event: Event) -> DynamicState:
    return state.apply(event)


def refresh(state: DynamicState) -> float:
    return state.refresh()
