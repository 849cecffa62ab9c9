"""Difference, coboundary, Gauss-Bonnet and Laplace operators.

Pointwise functions act on cochains; ``assemble`` builds the matching sparse
matrices in cochain coordinates (vertex order, canonical edge order).  There is
no ``d`` on 1-cochains or ``delta`` on 0-cochains: the complex stops at degree one.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .cochains import Cochain0, Cochain1, GraphMismatch
from .graph import WeightedGraph


def _signed_flux(graph: WeightedGraph, weighted: np.ndarray) -> np.ndarray:
    # sum over oriented edges with head x: the canonical edge contributes +w,
    # the reversal of a canonical edge leaving x contributes -w
    n = graph.n_vertices
    return (np.bincount(graph.head, weights=weighted, minlength=n)
            - np.bincount(graph.tail, weights=weighted, minlength=n))


def d(f: Cochain0) -> Cochain1:
    """(df)(e) = f(e+) - f(e-)."""
    if not isinstance(f, Cochain0):
        raise TypeError("d acts on 0-cochains only")
    g = f.graph
    return Cochain1(g, f.values[g.head] - f.values[g.tail])


def delta(phi: Cochain1) -> Cochain0:
    """(delta phi)(x) = (1/c(x)) sum_{e: e+ = x} r(e) phi(e)."""
    if not isinstance(phi, Cochain1):
        raise TypeError("delta acts on 1-cochains only")
    g = phi.graph
    return Cochain0(g, _signed_flux(g, g.r * phi.values) / g.c)


def gauss_bonnet(f: Cochain0, phi: Cochain1) -> tuple[Cochain0, Cochain1]:
    """D(f + phi) = delta(phi) + d(f), returned as its (0-part, 1-part)."""
    if f.graph is not phi.graph:
        raise GraphMismatch("operands live on different graphs")
    return delta(phi), d(f)


def laplacian0(f: Cochain0) -> Cochain0:
    """delta(d f), evaluated as (1/c(x)) sum_{e+ = x} r(e) (f(x) - f(e-))."""
    g = f.graph
    out = np.zeros(g.n_vertices)
    for x in range(g.n_vertices):
        acc = 0.0
        for k, _, y in g.incident(x):
            acc += g.r[k] * (f.values[x] - f.values[y])
        out[x] = acc / g.c[x]
    return Cochain0(g, out)


def laplacian1(phi: Cochain1) -> Cochain1:
    """d(delta phi)."""
    return d(delta(phi))


def dirac_square(f: Cochain0, phi: Cochain1) -> tuple[Cochain0, Cochain1]:
    a0, a1 = gauss_bonnet(f, phi)
    return gauss_bonnet(a0, a1)


# -- assembled matrices ----------------------------------------------------------

@dataclass(frozen=True)
class OperatorMatrix:
    name: str
    matrix: sp.csr_matrix
    rows: tuple
    cols: tuple

    def __matmul__(self, x):
        return self.matrix @ x

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def triplets(self) -> str:
        """Coordinate-triplet text, one nonzero per line, row-major."""
        m = self.matrix.tocoo()
        order = np.lexsort((m.col, m.row))
        lines = [
            f"{self.rows[i]} {self.cols[j]} {v!r}"
            for i, j, v in zip(m.row[order].tolist(), m.col[order].tolist(), m.data[order].tolist())
        ]
        return "\n".join(lines) + ("\n" if lines else "")


def edge_labels(graph: WeightedGraph) -> tuple[str, ...]:
    return tuple(f"{u}->{v}" for u, v in graph.edges)


def _csr(rows, cols, vals, shape):
    m = sp.coo_matrix((vals, (rows, cols)), shape=shape).tocsr()
    m.sum_duplicates()
    return m


def d_matrix(graph: WeightedGraph) -> sp.csr_matrix:
    m, n = graph.n_edges, graph.n_vertices
    k = np.arange(m)
    return _csr(np.r_[k, k], np.r_[graph.tail, graph.head], np.r_[-np.ones(m), np.ones(m)], (m, n))


def delta_matrix(graph: WeightedGraph) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    for x in range(graph.n_vertices):
        for k, sign, _ in graph.incident(x):
            rows.append(x)
            cols.append(k)
            vals.append(sign * graph.r[k] / graph.c[x])
    return _csr(rows, cols, vals, (graph.n_vertices, graph.n_edges))


def laplacian0_matrix(graph: WeightedGraph) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    for x in range(graph.n_vertices):
        for k, _, y in graph.incident(x):
            w = graph.r[k] / graph.c[x]
            rows += [x, x]
            cols += [x, y]
            vals += [w, -w]
    n = graph.n_vertices
    return _csr(rows, cols, vals, (n, n))


def laplacian1_matrix(graph: WeightedGraph) -> sp.csr_matrix:
    # (d delta phi)(e) = delta phi(e+) - delta phi(e-)
    rows, cols, vals = [], [], []
    for e in range(graph.n_edges):
        for end, outer in ((graph.head[e], 1.0), (graph.tail[e], -1.0)):
            for k, sign, _ in graph.incident(end):
                rows.append(e)
                cols.append(k)
                vals.append(outer * sign * graph.r[k] / graph.c[end])
    m = graph.n_edges
    return _csr(rows, cols, vals, (m, m))


def gauss_bonnet_matrix(graph: WeightedGraph) -> sp.csr_matrix:
    """D on coordinates (vertices, then edges)."""
    return sp.bmat([[None, delta_matrix(graph)], [d_matrix(graph), None]],
                   format="csr",
                   dtype=float) if graph.n_edges else sp.csr_matrix((graph.n_vertices,) * 2)


def weight_matrices(graph: WeightedGraph) -> tuple[sp.dia_matrix, sp.dia_matrix]:
    """Diagonal Gram matrices C and R of the two inner products."""
    return sp.diags(graph.c), sp.diags(graph.r)


def assemble(graph: WeightedGraph, which: str) -> OperatorMatrix:
    vs, es = graph.vertices, edge_labels(graph)
    if which == "d":
        return OperatorMatrix("d", d_matrix(graph), es, vs)
    if which == "delta":
        return OperatorMatrix("delta", delta_matrix(graph), vs, es)
    if which == "D":
        both = vs + es
        return OperatorMatrix("D", gauss_bonnet_matrix(graph), both, both)
    if which == "laplacian0":
        return OperatorMatrix("laplacian0", laplacian0_matrix(graph), vs, vs)
    if which == "laplacian1":
        return OperatorMatrix("laplacian1", laplacian1_matrix(graph), es, es)
    raise ValueError(f"unknown operator {which!r}")


OPERATORS = ("d", "delta", "D", "laplacian0", "laplacian1")
