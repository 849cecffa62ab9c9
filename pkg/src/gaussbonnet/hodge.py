"""Cycles, periods, the Ker(delta) / Im(d) splitting and Kirchhoff current flows.

The current flow for a current source ``i`` and a voltage source ``E'`` is
built as I = E0 + I0, where E0 is the projection of E' on Ker(delta) and I0
is the component orthogonal to Ker(delta) of a form phi with delta(phi) = -i.
phi comes from a Poisson solve on a finite connected subgraph K0 holding the
support of ``i``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .cochains import Cochain0, Cochain1, extend_by_zero, inner0, inner1, restrict
from .graph import GraphError, MetricAssignment, Subgraph, WeightedGraph, complement, distances_from
from .operators import _signed_flux, d, d_matrix, delta, delta_matrix


class SolverError(RuntimeError):
    pass


class Disconnected(GraphError):
    pass


class NonzeroMean(ValueError):
    """The current source has <i, 1> != 0, so -i is not in the range of the Laplacian."""


class NotConverged(SolverError):
    def __init__(self, residual: float, iterations: int, target: float):
        super().__init__(
            f"conjugate gradients stopped after {iterations} iterations at residual "
            f"{residual:.3e} (target {target:.3e})"
        )
        self.residual = residual
        self.iterations = iterations


class InvalidCycle(GraphError):
    pass


class EmptyComplement(GraphError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-10
    max_iter: int | None = None  # default 10 * #vertices of the system
    k0_rule: str = "ball"  # "ball" or "whole"
    k0_margin: float = 0.0  # extra radius added to the smallest admissible ball
    metric: str = "ctt"
    mean_tol: float = 1e-12

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.k0_rule not in ("ball", "whole"):
            raise ValueError(f"unknown K0 rule {self.k0_rule!r}")
        if self.k0_margin < 0:
            raise ValueError("K0 margin must be nonnegative")


def _require_connected(graph: WeightedGraph, what="graph"):
    if not graph.is_connected():
        raise Disconnected(f"{what} is not connected")


# -- Laplace solver -------------------------------------------------------------

def _weighted_mean(graph: WeightedGraph, u: np.ndarray) -> float:
    return float(graph.c @ u / graph.c.sum())


def solve_laplacian0(graph: WeightedGraph, b: np.ndarray, atol: float, max_iter: int | None = None,
                     ortho: float | None = None) -> tuple[np.ndarray, int, float]:
    """Zero-mean u with ||laplacian0(u) - b|| <= atol (c-weighted norm).

    Jacobi-preconditioned conjugate gradients on the symmetric system
    B^T R B u = C b; the constants are projected out of the right-hand side
    and of the result.  With ``ortho`` the iteration also continues until
    |<laplacian0(u) - b, u>| <= ortho.  Returns (u, iterations, residual).
    """
    n = graph.n_vertices
    max_iter = 10 * n if max_iter is None else max_iter
    head, tail, r, c = graph.head, graph.tail, graph.r, graph.c

    def stiff(u):
        return _signed_flux(graph, r * (u[head] - u[tail]))

    rhs = c * b
    rhs = rhs - rhs.sum() / n
    diag = np.bincount(head, weights=r, minlength=n) + np.bincount(tail, weights=r, minlength=n)
    diag[diag == 0] = 1.0

    def measure(u):
        res = stiff(u) - rhs
        norm = math.sqrt(float(np.sum(res * res / c)))
        return norm, abs(float(res @ u)) if ortho is not None else 0.0

    def done(norm, orth):
        return norm <= atol and (ortho is None or orth <= ortho)

    u = np.zeros(n)
    res = rhs.copy()
    if done(*measure(u)):
        return u, 0, measure(u)[0]
    z = res / diag
    p = z.copy()
    rz = float(res @ z)
    it = 0
    while it < max_iter:
        it += 1
        q = stiff(p)
        pq = float(p @ q)
        if pq <= 0:
            break
        alpha = rz / pq
        u += alpha * p
        res -= alpha * q
        if it % 25 == 0 or math.sqrt(float(np.sum(res * res / c))) <= atol:
            u -= _weighted_mean(graph, u)
            norm, orth = measure(u)
            if done(norm, orth):
                return u, it, norm
        z = res / diag
        rz_new = float(res @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    u -= _weighted_mean(graph, u)
    norm, orth = measure(u)
    if done(norm, orth):
        return u, it, norm
    raise NotConverged(norm, it, atol)


# -- cycles ---------------------------------------------------------------------

@dataclass(frozen=True)
class Cycle:
    """Integer 1-chain with zero boundary, one coefficient per canonical edge."""

    graph: WeightedGraph = field(repr=False)
    coefficients: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.coefficients)
        if z.shape != (self.graph.n_edges,) or not np.issubdtype(z.dtype, np.integer):
            raise InvalidCycle("cycle needs one integer coefficient per edge")
        if np.any(self.boundary() != 0):
            raise InvalidCycle("chain has nonzero boundary")

    @classmethod
    def from_dict(cls, graph: WeightedGraph, coefs: dict) -> Cycle:
        z = np.zeros(graph.n_edges, dtype=np.int64)
        for (u, v), val in coefs.items():
            k, sign = graph.edge_index(u, v)
            z[k] += sign * int(val)
        return cls(graph, z)

    def boundary(self) -> np.ndarray:
        """Per-vertex sum of z_e over oriented edges with head at the vertex."""
        z = np.asarray(self.coefficients, dtype=np.int64)
        n = self.graph.n_vertices
        return (np.bincount(self.graph.head, weights=z, minlength=n)
                - np.bincount(self.graph.tail, weights=z, minlength=n)).astype(np.int64)

    def length(self) -> int:
        return int(np.count_nonzero(self.coefficients))


def spanning_tree(graph: WeightedGraph, root: int = 0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Breadth-first spanning tree: parent vertex, parent edge, tree-edge mask."""
    n = graph.n_vertices
    parent = np.full(n, -1)
    pedge = np.full(n, -1)
    in_tree = np.zeros(graph.n_edges, dtype=bool)
    seen = np.zeros(n, dtype=bool)
    seen[root] = True
    queue = [root]
    for x in queue:
        for k, _, y in graph.incident(x):
            if not seen[y]:
                seen[y] = True
                parent[y], pedge[y] = x, k
                in_tree[k] = True
                queue.append(y)
    if not seen.all():
        raise Disconnected("graph is not connected")
    return parent, pedge, in_tree


def fundamental_cycles(graph: WeightedGraph) -> list[Cycle]:
    """One cycle per non-tree edge of a breadth-first spanning tree."""
    if graph.n_vertices == 0:
        return []
    parent, pedge, in_tree = spanning_tree(graph)

    def to_root(x, z, s):
        # add s * (oriented path x -> root)
        while parent[x] >= 0:
            k = pedge[x]
            z[k] += s * (1 if graph.tail[k] == x else -1)
            x = parent[x]

    cycles = []
    for k in np.flatnonzero(~in_tree):
        z = np.zeros(graph.n_edges, dtype=np.int64)
        z[k] = 1  # tail -> head, then back along the tree
        to_root(graph.head[k], z, 1)
        to_root(graph.tail[k], z, -1)
        cycles.append(Cycle(graph, z))
    return cycles


def cycle_form(Z: Cycle) -> Cochain1:
    """E_Z = sum over canonical edges of (z_e / r_e) e*."""
    return Cochain1(Z.graph, np.asarray(Z.coefficients, dtype=float) / Z.graph.r)


def period(Z: Cycle, phi: Cochain1) -> float:
    """Integral of phi over Z, computed as <E_Z, phi>."""
    return inner1(cycle_form(Z), phi)


def chain_pairing(Z: Cycle, phi: Cochain1) -> float:
    """Integral of phi over Z, computed as sum_e z_e phi(e)."""
    acc = 0.0
    for z, x in zip(np.asarray(Z.coefficients).tolist(), phi.values.tolist()):
        acc += z * x
    return acc


# -- projections and Poisson ----------------------------------------------------

class HodgeParts(NamedTuple):
    harmonic: Cochain1  # E0, in Ker(delta)
    exact: Cochain1  # d(potential)
    potential: Cochain0
    iterations: int
    residual: float  # ||delta(harmonic)||


def project_ker_delta(graph: WeightedGraph, phi: Cochain1, cfg: SolverConfig = SolverConfig(),
                      atol: float | None = None) -> HodgeParts:
    """Split phi = E0 + d f* with E0 in Ker(delta).

    f* is the zero-mean least-squares potential, from laplacian0(f*) = delta(phi).
    E0 is obtained by subtraction, so the two parts add up to phi exactly.
    """
    _require_connected(graph)
    scale = phi.norm()
    if scale == 0.0:
        zero0, zero1 = Cochain0(graph), Cochain1(graph)
        return HodgeParts(zero1, zero1, zero0, 0, 0.0)
    target = cfg.tol * scale if atol is None else min(atol, cfg.tol * scale)
    f, iters, _ = solve_laplacian0(graph, delta(phi).values, target, cfg.max_iter,
                                   ortho=cfg.tol * scale * scale)
    pot = Cochain0(graph, f)
    exact = d(pot)
    harmonic = phi - exact
    return HodgeParts(harmonic, exact, pot, iters, delta(harmonic).norm())


def _poisson(k0: WeightedGraph, i: Cochain0, cfg: SolverConfig, atol: float | None = None):
    if i.graph is not k0:
        raise GraphError("source must be given on the subgraph")
    _require_connected(k0, "K0")
    inorm = i.norm()
    if inorm == 0.0:
        return Cochain0(k0), 0
    mean = inner0(i, Cochain0.constant(k0))
    if abs(mean) > cfg.mean_tol * inorm * math.sqrt(k0.c.sum()):
        raise NonzeroMean(
            f"<i, 1> = {mean:.6g}: the current source must satisfy <i,1> = 0 "
            "(zero weighted mean), otherwise -i is not in the range of the Laplacian"
        )
    target = cfg.tol * inorm if atol is None else min(atol, cfg.tol * inorm)
    f, iters, _ = solve_laplacian0(k0, -i.values, target, cfg.max_iter)
    return Cochain0(k0, f), iters


def poisson0(k0: WeightedGraph, i: Cochain0, cfg: SolverConfig = SolverConfig()) -> Cochain0:
    """Zero-mean f on the finite connected graph K0 with laplacian0(f) = -i."""
    return _poisson(k0, i, cfg)[0]


# -- Kirchhoff / Flanders -------------------------------------------------------

@dataclass(frozen=True)
class FlandersProblem:
    i: Cochain0  # current source
    voltage: Cochain1  # E'

    def __post_init__(self):
        if self.i.graph is not self.voltage.graph:
            raise GraphError("sources live on different graphs")

    @property
    def graph(self) -> WeightedGraph:
        return self.i.graph

    @property
    def mean(self) -> float:
        return inner0(self.i, Cochain0.constant(self.graph))


@dataclass
class FlandersSolution:
    I: Cochain1
    E0: Cochain1
    I0: Cochain1
    residual_current: float  # ||delta(I) + i||
    period_residuals: np.ndarray  # |<E_Z, I - E'>| per basis cycle
    cycle_norms: np.ndarray  # ||E_Z|| per basis cycle
    projection_residuals: dict
    iterations: int
    k0: Subgraph
    tol: float
    source_norm: float
    voltage_norm: float

    @property
    def residual_period_max(self) -> float:
        return float(self.period_residuals.max()) if len(self.period_residuals) else 0.0

    @property
    def ok(self) -> bool:
        if self.residual_current > self.tol * max(self.source_norm, 1.0):
            return False
        bound = self.tol * (self.voltage_norm + self.I.norm()) * self.cycle_norms
        return bool(np.all(self.period_residuals <= bound))

    def summary(self) -> str:
        # every cycle of a finite truncation is an L2 cycle
        return (
            f"residual_current {self.residual_current!r}\n"
            f"residual_period_max {self.residual_period_max!r}\n"
            f"iterations {self.iterations}\n"
            f"k0_size {len(self.k0.vertices)}\n"
            f"cycles {len(self.cycle_norms)}\n"
            f"l2_cycles {len(self.cycle_norms)}\n"
            f"cycle_norm_max {float(self.cycle_norms.max()) if len(self.cycle_norms) else 0.0!r}\n"
            f"within_tolerance {int(self.ok)}\n"
        )


def weighted_centroid(graph: WeightedGraph, i: Cochain0, metric: MetricAssignment) -> str:
    """Vertex minimising sum_s |i(s)| c(s) d(v, s)^2 over the support of i; ties by id."""
    support = i.support()
    dist = np.array([distances_from(graph, metric, [s]) for s in support])
    w = np.array([abs(i(s)) * graph.weight(s) for s in support])
    cost = w @ dist ** 2
    best = min(range(graph.n_vertices), key=lambda x: (cost[x], graph.vertices[x]))
    return graph.vertices[best]


def select_k0(graph: WeightedGraph, i: Cochain0, cfg: SolverConfig) -> Subgraph:
    """Smallest metric ball around the centroid of supp(i) that holds the support.

    Metric balls are connected (they contain the geodesics to their center).
    ``cfg.k0_margin`` enlarges the radius.
    """
    if cfg.k0_rule == "whole":
        return Subgraph.induced(graph, graph.vertices)
    support = i.support()
    if not support:
        return Subgraph(frozenset(), frozenset())
    metric = MetricAssignment.from_name(graph, cfg.metric)
    center = weighted_centroid(graph, i, metric)
    dist = distances_from(graph, metric, [center])
    radius = max(dist[graph.index(s)] for s in support) + cfg.k0_margin
    # tiny slack so vertices on the sphere survive rounding in path sums
    ball = [v for v, x in zip(graph.vertices, dist) if x <= radius * (1 + 1e-12) + 1e-12]
    k0 = Subgraph.induced(graph, ball)
    _require_connected(k0.to_graph(graph), "K0")
    return k0


def solve_flanders(graph: WeightedGraph, problem: FlandersProblem, cfg: SolverConfig = SolverConfig(),
                   k0: Subgraph | None = None) -> FlandersSolution:
    """Current flow I with delta(I) + i = 0 and the periods of E' on every cycle."""
    if problem.graph is not graph:
        raise GraphError("problem is not posed on this graph")
    _require_connected(graph)
    i, Ep = problem.i, problem.voltage
    inorm, enorm = i.norm(), Ep.norm()
    cycles = fundamental_cycles(graph)
    forms = [cycle_form(Z) for Z in cycles]
    cycle_norms = np.array([E.norm() for E in forms])

    if inorm == 0.0 and enorm == 0.0:
        zero = Cochain1(graph)
        return FlandersSolution(zero, zero, zero, 0.0, np.zeros(len(cycles)), cycle_norms,
                                {"voltage": 0.0, "source": 0.0, "poisson": 0.0}, 0,
                                Subgraph(frozenset(), frozenset()), cfg.tol, 0.0, 0.0)

    budget = cfg.tol * max(inorm, 1.0) / 3.0
    iters = 0

    # E0: harmonic part of the voltage source
    split = project_ker_delta(graph, Ep, cfg, atol=budget)
    E0 = split.harmonic
    iters += split.iterations

    if k0 is None:
        k0 = select_k0(graph, i, cfg)
    else:
        k0.validate(graph)
    outside = set(i.support()) - k0.vertices
    if outside:
        raise GraphError(f"K0 misses source vertices {sorted(outside)}")

    if inorm == 0.0:
        I0 = Cochain1(graph)
        src_res = pois_res = 0.0
    else:
        kg = k0.to_graph(graph)
        f, it = _poisson(kg, restrict(i, kg), cfg, atol=budget)
        iters += it
        phi = extend_by_zero(d(f), graph)
        pois_res = (delta(phi) + i).norm()
        # I0: component of phi orthogonal to Ker(delta), i.e. its exact part
        split_phi = project_ker_delta(graph, phi, cfg, atol=budget)
        I0 = split_phi.exact
        iters += split_phi.iterations
        src_res = split_phi.residual

    I = E0 + I0
    diff = I - Ep
    periods = np.array([abs(inner1(E, diff)) for E in forms])
    return FlandersSolution(
        I=I, E0=E0, I0=I0,
        residual_current=(delta(I) + i).norm(),
        period_residuals=periods,
        cycle_norms=cycle_norms,
        projection_residuals={"voltage": split.residual, "source": src_res, "poisson": pois_res},
        iterations=iters,
        k0=k0,
        tol=cfg.tol,
        source_norm=inorm,
        voltage_norm=enorm,
    )


# -- positivity at infinity -----------------------------------------------------

@dataclass(frozen=True)
class PositivityEstimate:
    d: float  # min ||df|| / ||f|| over f supported off K0
    delta: float  # min ||delta phi|| / ||phi|| over phi supported on the complement edges
    gauss_bonnet: float  # min ||D F|| / ||F||, the smaller of the two
    n_vertices: int
    n_edges: int

    @property
    def constant(self) -> float:
        """Estimate of C in ||f|| <= C ||df||."""
        return math.inf if self.d == 0 else 1.0 / self.d


def _smallest_singular(m: np.ndarray) -> float:
    rows, cols = m.shape
    if cols == 0:
        return math.nan
    if cols > rows:
        return 0.0
    return float(np.linalg.svd(m, compute_uv=False)[-1])


def positivity_estimate(graph: WeightedGraph, k0: Subgraph, frozen=()) -> PositivityEstimate:
    """Smallest singular values of d and D on cochains supported on the complement of K0.

    Norms are the weighted ones, and d/D are evaluated on the whole graph.
    Vertices in ``frozen`` (typically the rim of a truncation) and the edges
    touching them are removed from the domain, so that the admissible
    cochains are those that would be finitely supported in the infinite graph.
    """
    comp, _ = complement(graph, k0)
    frozen = set(frozen)
    vs = [graph.index(v) for v in graph.vertices if v in comp.vertices and v not in frozen]
    es = [k for k, e in enumerate(graph.edges)
          if e in comp.edges and e[0] not in frozen and e[1] not in frozen]
    if not vs and not es:
        raise EmptyComplement("no cochain is supported on the complement of K0")
    sc, sr = np.sqrt(graph.c), np.sqrt(graph.r)
    B = d_matrix(graph).toarray()
    dm = (sr[:, None] * B[:, vs]) / sc[vs][None, :]
    sd = _smallest_singular(dm)
    if es:
        Dm = delta_matrix(graph).toarray()
        tm = (sc[:, None] * Dm[:, es]) / sr[es][None, :]
        st = _smallest_singular(tm)
    else:
        st = math.nan
    both = min(x for x in (sd, st) if not math.isnan(x))
    return PositivityEstimate(sd, st, both, len(vs), len(es))
