"""
Seeded random graphs: Erdos-Renyi and preferential attachment.

All randomness comes from ``numpy.random.Generator`` over PCG64, seeded
with the GenSpec's integer seed, so results are identical across runs and
platforms.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import DomainError, GenerationError
from .graph import Graph, is_connected
from .incremental import DynamicState, Event

RNG_NAME = "numpy.PCG64"


@dataclass(frozen=True)
class GenSpec:
    kind: str
    n: int
    rho: float | None = None
    kappa: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("er", "pa"):
            raise DomainError(f"unknown generator kind {self.kind!r}")
        if self.n < 1:
            raise DomainError("n must be positive")
        if self.kind == "er":
            if self.rho is None or not 0.0 <= self.rho <= 1.0:
                raise DomainError(f"er needs 0 <= rho <= 1, got {self.rho}")
        else:
            if self.kappa is None or not 1 <= self.kappa < self.n:
                raise DomainError(f"pa needs 1 <= kappa < n, got {self.kappa}")

    def header(self) -> list[str]:
        """Metadata lines for ``#`` comments."""
        param = f"rho={self.rho}" if self.kind == "er" else f"kappa={self.kappa}"
        return [f"generator kind={self.kind} n={self.n} {param} seed={self.seed} rng={RNG_NAME}"]


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _er_once(n: int, rho: float, seed: int) -> Graph:
    rng = rng_for(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < rho
    return Graph.from_edges(n, zip(iu[keep].tolist(), ju[keep].tolist()))


def er_graph(spec: GenSpec, connected: bool = False, attempts: int = 100) -> Graph:
    """G(n, rho) with unit weights.

    Pairs are drawn in row-major upper-triangle order.  With ``connected``,
    a disconnected draw is retried with ``seed + 1``, ``seed + 2``, ... up to
    ``attempts`` draws.
    """
    if spec.kind != "er":
        raise DomainError("er_graph needs kind='er'")
    for k in range(attempts if connected else 1):
        g = _er_once(spec.n, spec.rho, spec.seed + k)
        if not connected or is_connected(g):
            return g
    raise GenerationError(
        f"no connected G({spec.n}, {spec.rho}) within {attempts} seeds from {spec.seed}"
    )


def pa_targets(endpoint_pool: list[int], kappa: int, rng: np.random.Generator) -> list[int]:
    """Draw ``kappa`` distinct nodes with probability proportional to degree.

    ``endpoint_pool`` lists both endpoints of every edge, so a uniform pick
    from it is a degree-proportional pick.  Duplicates are redrawn.
    """
    chosen: list[int] = []
    size = len(endpoint_pool)
    while len(chosen) < kappa:
        t = endpoint_pool[int(rng.integers(size))]
        if t not in chosen:
            chosen.append(t)
    return chosen


def attach_targets(g: Graph, kappa: int, rng: np.random.Generator) -> list[int]:
    """Degree-proportional distinct targets for one arrival into ``g``."""
    if g.n == 0:
        raise DomainError("cannot attach to an empty graph")
    if kappa > g.n:
        raise DomainError(f"kappa={kappa} exceeds the {g.n} available nodes")
    pool = [x for u, v, _ in g.iter_edges() for x in (u, v)]
    if not pool:
        # Only a singleton (or isolated nodes): no degree to be proportional to.
        return [int(x) for x in rng.choice(g.n, size=kappa, replace=False)]
    if len(set(pool)) < kappa:
        raise DomainError("not enough nodes of positive degree for distinct targets")
    return pa_targets(pool, kappa, rng)


def pa_graph(spec: GenSpec) -> tuple[Graph, list[Event]]:
    """Grow a preferential-attachment graph and record its add-node log.

    ``kappa = 1`` starts from a single node (the result is a tree);
    ``kappa > 1`` starts from the clique on ``kappa + 1`` nodes.  The log
    rebuilds the graph from empty, substrate included.
    """
    if spec.kind != "pa":
        raise DomainError("pa_graph needs kind='pa'")
    n, kappa = spec.n, spec.kappa
    rng = rng_for(spec.seed)
    seed_order = 1 if kappa == 1 else kappa + 1
    if seed_order > n:
        raise DomainError(f"substrate of {seed_order} nodes exceeds n={n}")

    g = Graph()
    events: list[Event] = []
    pool: list[int] = []
    for x in range(seed_order):
        targets = list(range(x))
        g.add_node()
        for t in targets:
            g.add_edge(x, t)
            pool.extend((x, t))
        events.append(Event.add_node(targets))

    for x in range(seed_order, n):
        if pool:
            targets = pa_targets(pool, kappa, rng)
        else:
            targets = [0]
        g.add_node()
        for t in targets:
            g.add_edge(x, t)
            pool.extend((x, t))
        events.append(Event.add_node(targets))
    return g, events


def evolve(state: DynamicState, events: Iterable[Event],
           hook: Callable[[int, Event, float], None] | None = None) -> DynamicState:
    """Apply ``events`` in order.  ``hook(step, event, seconds)`` runs after each."""
    for step, ev in enumerate(events):
        t0 = time.perf_counter()
        state.apply(ev)
        if hook is not None:
            hook(step, ev, time.perf_counter() - t0)
    return state
