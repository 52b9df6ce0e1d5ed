"""DAG utilities: arrow removal, evaluation distance, reachability.

The evaluation distance of a variable from an intervened set schedules the
column updates of the intervention algorithm: a variable may only be
recomputed once everything strictly closer to the intervened set has been
recomputed, and the longest-path distance is exactly the earliest safe stage.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import FrozenSet, Iterable, Tuple

from .errors import CyclicGraph, UnknownVariable

Edge = Tuple[str, str]


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph over variable names.

    Vertices are kept in alphabetical order; acyclicity is checked on
    construction.
    """

    vertices: Tuple[str, ...]
    edges: FrozenSet[Edge]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(sorted(self.vertices)))
        object.__setattr__(self, "edges", frozenset(self.edges))
        vs = set(self.vertices)
        for a, b in self.edges:
            if a not in vs or b not in vs:
                raise UnknownVariable(f"edge ({a},{b}) mentions an unknown vertex")
        cycle = _find_cycle(self.vertices, self.edges)
        if cycle is not None:
            raise CyclicGraph("directed cycle: " + " -> ".join(cycle))

    @cached_property
    def _incoming(self):
        inc = {v: [] for v in self.vertices}
        for a, b in self.edges:
            inc[b].append(a)
        return {v: tuple(sorted(ws)) for v, ws in inc.items()}

    @cached_property
    def _outgoing(self):
        out = {v: [] for v in self.vertices}
        for a, b in self.edges:
            out[a].append(b)
        return {v: tuple(sorted(ws)) for v, ws in out.items()}

    def parents(self, v: str) -> Tuple[str, ...]:
        """Parents of v in the fixed alphabetical order."""
        self._check(v)
        return self._incoming[v]

    def children(self, v: str) -> Tuple[str, ...]:
        self._check(v)
        return self._outgoing[v]

    def endogenous(self) -> Tuple[str, ...]:
        """Variables with indegree >= 1."""
        return tuple(v for v in self.vertices if self._incoming[v])

    def _check(self, v: str):
        if v not in self._incoming:
            raise UnknownVariable(v)


def remove_incoming(g: Dag, intervened: Iterable[str]) -> Dag:
    """Drop every arrow that points into a member of `intervened`."""
    xs = set(intervened)
    for x in xs:
        g._check(x)
    return Dag(g.vertices, frozenset(e for e in g.edges if e[1] not in xs))


def eval_distances(g: Dag, intervened: Iterable[str]) -> dict:
    """Longest-path distance from the intervened set to every vertex.

    Distances are measured in the graph with arrows into the intervened set
    removed.  Members of the set sit at distance 0, unreachable vertices at
    -1.  Bounded by the vertex count on any acyclic graph.
    """
    xs = set(intervened)
    for x in xs:
        g._check(x)
    reduced_in = {
        v: (() if v in xs else g._incoming[v]) for v in g.vertices
    }
    dist: dict = {}

    def longest(v: str) -> int:
        if v in xs:
            return 0
        if v in dist:
            return dist[v]
        best = -1
        for w in reduced_in[v]:
            lw = longest(w)
            if lw >= 0:
                best = max(best, lw + 1)
        dist[v] = best
        return best

    return {v: longest(v) for v in g.vertices}


def eval_distance(g: Dag, intervened: Iterable[str], y: str) -> int:
    """Evaluation distance from a nonempty variable set to y (-1 if none)."""
    xs = set(intervened)
    g._check(y)
    return eval_distances(g, xs)[y]


def descendants(g: Dag, x: str) -> frozenset:
    """Vertices reachable from x by a directed path of length >= 1."""
    g._check(x)
    seen = set()
    stack = list(g._outgoing[x])
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(g._outgoing[v])
    return frozenset(seen)


def nondescendants(g: Dag, x: str) -> frozenset:
    """Vertices that are neither x nor reachable from it."""
    return frozenset(g.vertices) - descendants(g, x) - {x}


def topological_order(g: Dag) -> Tuple[str, ...]:
    order = []
    seen = set()

    def visit(v):
        if v in seen:
            return
        seen.add(v)
        for w in g._incoming[v]:
            visit(w)
        order.append(v)

    for v in g.vertices:
        visit(v)
    return tuple(order)


def _find_cycle(vertices, edges):
    out = {v: [] for v in vertices}
    for a, b in edges:
        out[a].append(b)
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {v: WHITE for v in vertices}
    parent = {}

    for root in vertices:
        if color[root] != WHITE:
            continue
        stack = [(root, iter(out[root]))]
        color[root] = GRAY
        while stack:
            v, it = stack[-1]
            advanced = False
            for w in it:
                if color[w] == GRAY:
                    # walk the gray chain back to w
                    chain = [w, v]
                    u = v
                    while u != w:
                        u = parent[u]
                        chain.append(u)
                    return list(reversed(chain))
                if color[w] == WHITE:
                    color[w] = GRAY
                    parent[w] = v
                    stack.append((w, iter(out[w])))
                    advanced = True
                    break
            if not advanced:
                color[v] = BLACK
                stack.pop()
    return None
