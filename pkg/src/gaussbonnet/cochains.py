"""0- and 1-cochains over a finite weighted graph, with the weighted inner products."""
from __future__ import annotations

import math
from typing import Mapping

import numpy as np

from .graph import GraphError, ParseError, WeightedGraph, _lines, _number, canonical


class GraphMismatch(GraphError):
    pass


class _Cochain:
    __slots__ = ("graph", "values")
    degree: int

    def __init__(self, graph: WeightedGraph, values=None):
        size = self._size(graph)
        if values is None:
            arr = np.zeros(size)
        else:
            arr = np.array(values, dtype=float)
            if arr.shape != (size,):
                raise GraphMismatch(f"expected {size} values, got shape {arr.shape}")
        arr.flags.writeable = False
        self.graph = graph
        self.values = arr

    @staticmethod
    def _size(graph):
        raise NotImplementedError

    def _check(self, other):
        if type(other) is not type(self):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if other.graph is not self.graph:
            raise GraphMismatch("cochains live on different graphs")

    def __add__(self, other):
        self._check(other)
        return type(self)(self.graph, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return type(self)(self.graph, self.values - other.values)

    def __neg__(self):
        return type(self)(self.graph, -self.values)

    def __mul__(self, s: float):
        return type(self)(self.graph, self.values * float(s))

    __rmul__ = __mul__

    def norm(self) -> float:
        return math.sqrt(max(self.inner(self), 0.0))

    def inner(self, other) -> float:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.values.tolist()})"


class Cochain0(_Cochain):
    """Real function on the vertices."""

    __slots__ = ()
    degree = 0

    @staticmethod
    def _size(graph):
        return graph.n_vertices

    @classmethod
    def from_dict(cls, graph: WeightedGraph, values: Mapping[str, float]) -> Cochain0:
        arr = np.zeros(graph.n_vertices)
        for v, x in values.items():
            arr[graph.index(v)] = x
        return cls(graph, arr)

    @classmethod
    def constant(cls, graph: WeightedGraph, value: float = 1.0) -> Cochain0:
        return cls(graph, np.full(graph.n_vertices, float(value)))

    @classmethod
    def indicator(cls, graph: WeightedGraph, v: str) -> Cochain0:
        return cls.from_dict(graph, {v: 1.0})

    def __call__(self, v: str) -> float:
        return float(self.values[self.graph.index(v)])

    def inner(self, other: Cochain0) -> float:
        self._check(other)
        return inner0(self, other)

    def support(self) -> list[str]:
        return [v for v, x in zip(self.graph.vertices, self.values) if x != 0]

    def to_dict(self) -> dict[str, float]:
        return dict(zip(self.graph.vertices, self.values.tolist()))


class Cochain1(_Cochain):
    """Odd real function on oriented edges.

    Only the canonical orientation is stored, so phi(-e) = -phi(e) cannot be
    violated.
    """

    __slots__ = ()
    degree = 1

    @staticmethod
    def _size(graph):
        return graph.n_edges

    @classmethod
    def from_dict(cls, graph: WeightedGraph, values: Mapping[tuple[str, str], float]) -> Cochain1:
        arr = np.zeros(graph.n_edges)
        seen = set()
        for (u, v), x in values.items():
            k, sign = graph.edge_index(u, v)
            if k in seen:
                raise GraphError(f"edge {u}-{v} given in both orientations")
            seen.add(k)
            arr[k] = sign * x
        return cls(graph, arr)

    @classmethod
    def basis(cls, graph: WeightedGraph, u: str, v: str) -> Cochain1:
        """The form e* equal to 1 on (u, v), -1 on (v, u) and 0 elsewhere."""
        return cls.from_dict(graph, {(u, v): 1.0})

    def __call__(self, u: str, v: str) -> float:
        k, sign = self.graph.edge_index(u, v)
        return sign * float(self.values[k])

    def inner(self, other: Cochain1) -> float:
        self._check(other)
        return inner1(self, other)

    def to_dict(self) -> dict[tuple[str, str], float]:
        return dict(zip(self.graph.edges, self.values.tolist()))


def _same_graph(a, b):
    if a.graph is not b.graph:
        raise GraphMismatch("cochains live on different graphs")


def inner0(f: Cochain0, g: Cochain0) -> float:
    """sum_v c(v) f(v) g(v)."""
    _same_graph(f, g)
    acc = 0.0
    for w, x, y in zip(f.graph.c.tolist(), f.values.tolist(), g.values.tolist()):
        acc += w * (x * y)
    return acc


def inner1(phi: Cochain1, psi: Cochain1) -> float:
    """Half-sum of r(e) phi(e) psi(e) over oriented edges.

    The summand is even, so this is the sum over canonical orientations.
    """
    _same_graph(phi, psi)
    acc = 0.0
    for w, x, y in zip(phi.graph.r.tolist(), phi.values.tolist(), psi.values.tolist()):
        acc += w * (x * y)
    return acc


def inner1_halfsum(phi: Cochain1, psi: Cochain1) -> float:
    """inner1 computed literally over both orientations of every edge."""
    _same_graph(phi, psi)
    acc = 0.0
    for w, x, y in zip(phi.graph.r.tolist(), phi.values.tolist(), psi.values.tolist()):
        acc += w * (x * y) + w * ((-x) * (-y))
    return 0.5 * acc


def restrict(x: Cochain0 | Cochain1, sub: WeightedGraph):
    """Restriction of ``x`` to a subgraph built with ``WeightedGraph.subgraph``."""
    g = x.graph
    if isinstance(x, Cochain0):
        idx = [g.index(v) for v in sub.vertices]
        return Cochain0(sub, x.values[idx])
    idx = [g.edge_index(u, v)[0] for u, v in sub.edges]
    return Cochain1(sub, x.values[idx])


def extend_by_zero(x: Cochain0 | Cochain1, parent: WeightedGraph):
    """Extension of a cochain on a subgraph to ``parent``, zero outside."""
    sub = x.graph
    if isinstance(x, Cochain0):
        arr = np.zeros(parent.n_vertices)
        arr[[parent.index(v) for v in sub.vertices]] = x.values
        return Cochain0(parent, arr)
    arr = np.zeros(parent.n_edges)
    idx = [parent.edge_index(u, v)[0] for u, v in sub.edges]
    arr[idx] = x.values
    return Cochain1(parent, arr)


# -- file format ---------------------------------------------------------------

def parse_cochain0(graph: WeightedGraph, text: str) -> Cochain0:
    arr = np.zeros(graph.n_vertices)
    seen: dict[str, int] = {}
    for lineno, tok in _lines(text):
        if len(tok) != 2:
            raise ParseError(lineno, "expected '<id> <value>'")
        v = tok[0]
        if v not in graph:
            raise ParseError(lineno, f"unknown vertex {v!r}")
        if v in seen:
            raise ParseError(lineno, f"vertex {v!r} already listed on line {seen[v]}")
        seen[v] = lineno
        arr[graph.index(v)] = _number(tok[1], lineno)
    return Cochain0(graph, arr)


def parse_cochain1(graph: WeightedGraph, text: str) -> Cochain1:
    arr = np.zeros(graph.n_edges)
    seen: dict[tuple[str, str], int] = {}
    for lineno, tok in _lines(text):
        if len(tok) != 3:
            raise ParseError(lineno, "expected '<tail> <head> <value>'")
        u, v = tok[0], tok[1]
        if not graph.has_edge(u, v):
            raise ParseError(lineno, f"no edge {u}-{v} in graph")
        key = canonical(u, v)
        if key in seen:
            raise ParseError(lineno, f"edge {u}-{v} already listed on line {seen[key]}")
        seen[key] = lineno
        k, sign = graph.edge_index(u, v)
        arr[k] = sign * _number(tok[2], lineno)
    return Cochain1(graph, arr)


def serialize_cochain(x: Cochain0 | Cochain1) -> str:
    if isinstance(x, Cochain0):
        rows = [f"{v} {val!r}" for v, val in zip(x.graph.vertices, x.values.tolist())]
    else:
        rows = [f"{u} {v} {val!r}" for (u, v), val in zip(x.graph.edges, x.values.tolist())]
    return "\n".join(rows) + ("\n" if rows else "")
