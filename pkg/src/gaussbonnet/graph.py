"""Weighted graphs, metric distances, subgraphs and the graph file format.

A graph stores every unordered edge once, oriented from the lexicographically
smaller vertex id (tail) to the larger one (head).  The reversed orientation
is implicit: weights are even, 1-cochains are odd.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np


class GraphError(ValueError):
    """Malformed graph data."""


class ParseError(GraphError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


class UnknownVertex(GraphError, KeyError):
    def __str__(self):
        return f"unknown vertex {self.args[0]!r}"


class Unreachable(GraphError):
    """Two vertices lie in different connected components."""


def canonical(u: str, v: str) -> tuple[str, str]:
    return (u, v) if u < v else (v, u)


class WeightedGraph:
    """Finite, loop-free graph with vertex weights ``c`` and even edge weights ``r``.

    Vertex order is insertion order; edge order is insertion order of the
    canonical pairs.  Both orders fix the coordinates of every cochain and
    every assembled operator, so they are never changed after construction.
    """

    def __init__(
        self,
        vertices: Mapping[str, float] | Iterable[tuple[str, float]],
        edges: Iterable[tuple[str, str, float]] = (),
    ):
        items = vertices.items() if isinstance(vertices, Mapping) else vertices
        self._vindex: dict[str, int] = {}
        ids, cs = [], []
        for v, c in items:
            if not isinstance(v, str) or not v or any(ch.isspace() for ch in v):
                raise GraphError(f"invalid vertex id {v!r}")
            if v in self._vindex:
                raise GraphError(f"duplicate vertex {v!r}")
            if not (c > 0 and math.isfinite(c)):
                raise GraphError(f"vertex {v!r}: weight must be positive, got {c}")
            self._vindex[v] = len(ids)
            ids.append(v)
            cs.append(float(c))

        self._eindex: dict[tuple[str, str], int] = {}
        tails, heads, rs = [], [], []
        for u, v, r in edges:
            for w in (u, v):
                if w not in self._vindex:
                    raise UnknownVertex(w)
            if u == v:
                raise GraphError(f"self-loop at {u!r}")
            if not (r > 0 and math.isfinite(r)):
                raise GraphError(f"edge ({u}, {v}): weight must be positive, got {r}")
            key = canonical(u, v)
            if key in self._eindex:
                raise GraphError(f"duplicate edge {key}")
            self._eindex[key] = len(tails)
            tails.append(self._vindex[key[0]])
            heads.append(self._vindex[key[1]])
            rs.append(float(r))

        self.vertices: tuple[str, ...] = tuple(ids)
        self.c = np.array(cs, dtype=float)
        self.tail = np.array(tails, dtype=np.intp)
        self.head = np.array(heads, dtype=np.intp)
        self.r = np.array(rs, dtype=float)
        for arr in (self.c, self.tail, self.head, self.r):
            arr.flags.writeable = False

        # per-vertex incident oriented edges, as (edge index, sign, neighbour);
        # sign is +1 when the vertex is the head of the canonical orientation
        adj: list[list[tuple[int, int, int]]] = [[] for _ in ids]
        for k, (t, h) in enumerate(zip(tails, heads)):
            adj[h].append((k, 1, t))
            adj[t].append((k, -1, h))
        self._adj = tuple(tuple(a) for a in adj)

    # -- basic queries -----------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.r)

    @property
    def edges(self) -> list[tuple[str, str]]:
        """Canonical orientations, in coordinate order."""
        return [(self.vertices[t], self.vertices[h]) for t, h in zip(self.tail, self.head)]

    def __contains__(self, v) -> bool:
        return v in self._vindex

    def index(self, v: str) -> int:
        try:
            return self._vindex[v]
        except KeyError:
            raise UnknownVertex(v) from None

    def edge_index(self, u: str, v: str) -> tuple[int, int]:
        """Coordinate of the edge {u, v} and the sign of (u, v) against it."""
        key = canonical(u, v)
        try:
            k = self._eindex[key]
        except KeyError:
            raise GraphError(f"no edge between {u!r} and {v!r}") from None
        return k, (1 if key == (u, v) else -1)

    def has_edge(self, u: str, v: str) -> bool:
        return canonical(u, v) in self._eindex

    def weight(self, v: str) -> float:
        return float(self.c[self.index(v)])

    def resistance(self, u: str, v: str) -> float:
        return float(self.r[self.edge_index(u, v)[0]])

    def incident(self, i: int) -> tuple[tuple[int, int, int], ...]:
        return self._adj[i]

    def neighbors(self, v: str) -> list[str]:
        return [self.vertices[w] for _, _, w in self._adj[self.index(v)]]

    def is_connected(self) -> bool:
        if self.n_vertices == 0:
            return True
        return len(self._component(0)) == self.n_vertices

    def _component(self, start: int) -> set[int]:
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for _, _, y in self._adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return seen

    def components(self) -> list[list[str]]:
        left = set(range(self.n_vertices))
        out = []
        while left:
            comp = self._component(min(left))
            left -= comp
            out.append([self.vertices[i] for i in sorted(comp)])
        return out

    def subgraph(self, vertices: Iterable[str], edges: Iterable[tuple[str, str]] | None = None) -> WeightedGraph:
        """Graph on ``vertices`` with the parent's weights.

        Without ``edges`` this is the induced subgraph.  Vertex and edge order
        follow the parent.
        """
        keep = set(vertices)
        for v in keep:
            self.index(v)
        if edges is None:
            ekeep = None
        else:
            ekeep = {canonical(u, v) for u, v in edges}
        vs = [(v, c) for v, c in zip(self.vertices, self.c) if v in keep]
        es = []
        for (u, v), r in zip(self.edges, self.r):
            if u in keep and v in keep and (ekeep is None or (u, v) in ekeep):
                es.append((u, v, r))
        return WeightedGraph(vs, es)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        if set(self.vertices) != set(other.vertices) or self.n_edges != other.n_edges:
            return False
        if any(self.weight(v) != other.weight(v) for v in self.vertices):
            return False
        return all(
            other.has_edge(u, v) and other.resistance(u, v) == r
            for (u, v), r in zip(self.edges, self.r)
        )

    __hash__ = None

    def __repr__(self):
        return f"WeightedGraph(n_vertices={self.n_vertices}, n_edges={self.n_edges})"


def degree(graph: WeightedGraph, v: str) -> int:
    """Number of oriented edges with head ``v``."""
    return len(graph.incident(graph.index(v)))


# -- metrics -----------------------------------------------------------------

@dataclass(frozen=True)
class MetricAssignment:
    """Positive even edge function ``a``; path lengths add up ``sqrt(a)``."""

    rule: str
    a: np.ndarray = field(repr=False)

    def __post_init__(self):
        if np.any(~(self.a > 0)):
            raise GraphError("metric must be positive on every edge")
        self.a.flags.writeable = False

    @property
    def length(self) -> np.ndarray:
        return np.sqrt(self.a)

    @classmethod
    def ctt(cls, graph: WeightedGraph) -> MetricAssignment:
        """a(e) = min(c(e+), c(e-)) / r(e)."""
        a = np.minimum(graph.c[graph.head], graph.c[graph.tail]) / graph.r
        return cls("ctt", a)

    @classmethod
    def th(cls, graph: WeightedGraph) -> MetricAssignment:
        """a(e) = sqrt(c(e+) c(e-)) / r(e)."""
        a = np.sqrt(graph.c[graph.head] * graph.c[graph.tail]) / graph.r
        return cls("th", a)

    @classmethod
    def table(cls, graph: WeightedGraph, values: Mapping[tuple[str, str], float]) -> MetricAssignment:
        a = np.empty(graph.n_edges)
        seen = set()
        for (u, v), val in values.items():
            k, _ = graph.edge_index(u, v)
            if k in seen:
                raise GraphError(f"metric given twice for edge ({u}, {v})")
            seen.add(k)
            a[k] = val
        if len(seen) != graph.n_edges:
            raise GraphError("custom metric table does not cover every edge")
        return cls("custom", a)

    @classmethod
    def from_name(cls, graph: WeightedGraph, name: str) -> MetricAssignment:
        try:
            return {"ctt": cls.ctt, "th": cls.th}[name](graph)
        except KeyError:
            raise GraphError(f"unknown metric rule {name!r}") from None


def distances_from(graph: WeightedGraph, metric: MetricAssignment, sources: Iterable[str]) -> np.ndarray:
    """Distance from the nearest source to every vertex (inf if unreachable).

    Label-setting search; the heap orders equal distances by vertex id so the
    settling order is deterministic.
    """
    length = metric.length
    dist = np.full(graph.n_vertices, np.inf)
    heap = []
    for s in sources:
        i = graph.index(s)
        dist[i] = 0.0
        heap.append((0.0, s, i))
    heapq.heapify(heap)
    done = np.zeros(graph.n_vertices, dtype=bool)
    while heap:
        dx, _, x = heapq.heappop(heap)
        if done[x]:
            continue
        done[x] = True
        for k, _, y in graph.incident(x):
            nd = dx + length[k]
            if nd < dist[y]:
                dist[y] = nd
                heapq.heappush(heap, (nd, graph.vertices[y], y))
    return dist


def metric_distance(graph: WeightedGraph, metric: MetricAssignment, x: str, y: str) -> float:
    d = distances_from(graph, metric, [x])[graph.index(y)]
    if not math.isfinite(d):
        raise Unreachable(f"no path from {x!r} to {y!r}")
    return float(d)


# -- subgraphs -----------------------------------------------------------------

@dataclass(frozen=True)
class Subgraph:
    """Vertex subset and symmetric edge subset of a parent graph.

    Edges are kept as canonical pairs, so symmetry holds by construction.
    """

    vertices: frozenset
    edges: frozenset

    @classmethod
    def make(cls, graph: WeightedGraph, vertices: Iterable[str], edges: Iterable[tuple[str, str]] = ()) -> Subgraph:
        vs = frozenset(vertices)
        for v in vs:
            graph.index(v)
        es = set()
        for u, v in edges:
            if not graph.has_edge(u, v):
                raise GraphError(f"({u}, {v}) is not an edge of the parent graph")
            if u not in vs or v not in vs:
                raise GraphError(f"edge ({u}, {v}) has an endpoint outside the vertex subset")
            es.add(canonical(u, v))
        return cls(vs, frozenset(es))

    @classmethod
    def induced(cls, graph: WeightedGraph, vertices: Iterable[str]) -> Subgraph:
        vs = frozenset(vertices)
        es = [e for e in graph.edges if e[0] in vs and e[1] in vs]
        return cls.make(graph, vs, es)

    def to_graph(self, graph: WeightedGraph) -> WeightedGraph:
        return graph.subgraph(self.vertices, self.edges)

    def validate(self, graph: WeightedGraph) -> None:
        Subgraph.make(graph, self.vertices, self.edges)


def complement(graph: WeightedGraph, k0: Subgraph) -> tuple[Subgraph, frozenset]:
    """Complementary subgraph of ``k0`` and the boundary edge set.

    The complement keeps the vertices outside ``k0`` and the edges outside
    ``k0`` with both endpoints there; the boundary is every other edge.
    Edge sets are canonical pairs, so each unoriented edge appears once.
    """
    k0.validate(graph)
    vc = frozenset(graph.vertices) - k0.vertices
    ec, boundary = set(), set()
    for e in graph.edges:
        if e in k0.edges:
            continue
        if e[0] in vc and e[1] in vc:
            ec.add(e)
        else:
            boundary.add(e)
    return Subgraph(vc, frozenset(ec)), frozenset(boundary)


# -- file format ---------------------------------------------------------------

def _number(tok: str, lineno: int) -> float:
    try:
        x = float(tok)
    except ValueError:
        raise ParseError(lineno, f"not a number: {tok!r}") from None
    if not math.isfinite(x):
        raise ParseError(lineno, f"not a finite number: {tok!r}")
    return x


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def parse_graph(text: str) -> WeightedGraph:
    vertices: dict[str, float] = {}
    edges: list[tuple[str, str, float]] = []
    seen: dict[tuple[str, str], int] = {}
    for lineno, tok in _lines(text):
        kind = tok[0]
        if kind == "v":
            if len(tok) != 3:
                raise ParseError(lineno, "expected 'v <id> <c>'")
            v, c = tok[1], _number(tok[2], lineno)
            if v in vertices:
                raise ParseError(lineno, f"duplicate vertex {v!r}")
            if c <= 0:
                raise ParseError(lineno, f"vertex weight must be positive, got {tok[2]}")
            vertices[v] = c
        elif kind == "e":
            if len(tok) != 4:
                raise ParseError(lineno, "expected 'e <tail> <head> <r>'")
            u, v, r = tok[1], tok[2], _number(tok[3], lineno)
            if u == v:
                raise ParseError(lineno, f"self-loop at {u!r}")
            if r <= 0:
                raise ParseError(lineno, f"edge weight must be positive, got {tok[3]}")
            for w in (u, v):
                if w not in vertices:
                    raise ParseError(lineno, f"edge references unknown vertex {w!r}")
            key = canonical(u, v)
            if key in seen:
                raise ParseError(lineno, f"edge {u}-{v} already listed on line {seen[key]}")
            seen[key] = lineno
            edges.append((u, v, r))
        else:
            raise ParseError(lineno, f"unknown record type {kind!r}")
    return WeightedGraph(vertices, edges)


def serialize_graph(graph: WeightedGraph) -> str:
    out = [f"v {v} {c!r}" for v, c in zip(graph.vertices, graph.c.tolist())]
    out += [f"e {u} {v} {r!r}" for (u, v), r in zip(graph.edges, graph.r.tolist())]
    return "\n".join(out) + "\n"


def read_graph(path) -> WeightedGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


def all_pairs(graph: WeightedGraph, metric: MetricAssignment, order: Sequence[str] | None = None) -> np.ndarray:
    order = graph.vertices if order is None else order
    return np.array([distances_from(graph, metric, [x]) for x in order])
