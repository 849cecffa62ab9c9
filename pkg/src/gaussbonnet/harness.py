"""Finite windows onto infinite graph families, and the diagnostics run on them.

Every family has a base point and a notion of hop radius; ``truncate`` keeps
the vertices within that radius and flags the outermost shell as the rim.
Rim vertices have fewer neighbours than in the infinite graph, so diagnostics
that describe the infinite family leave them out unless asked otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

import numpy as np

from .cochains import Cochain0, Cochain1, restrict
from .graph import GraphError, MetricAssignment, Subgraph, WeightedGraph, distances_from, read_graph
from .hodge import FlandersProblem, SolverConfig, positivity_estimate, solve_flanders
from .operators import d

KINDS = ("tree", "ray", "ladder", "grid2d", "core-plus-trees")
ALIASES = {"regular-tree": "tree"}


@dataclass(frozen=True)
class FamilySpec:
    kind: str
    radius: int
    valence: int = 3  # p + 1, for trees
    c: float = 1.0
    r: float = 1.0
    c_ratio: float = 1.0  # vertex weight is c * c_ratio**height
    r_ratio: float = 1.0  # edge weight is r * r_ratio**(height of the farther end)
    core: str | None = None  # graph file, core-plus-trees only
    attach: tuple[str, ...] | None = None  # core vertices receiving a tree; default all

    def __post_init__(self):
        if self.kind in ALIASES:
            object.__setattr__(self, "kind", ALIASES[self.kind])
        if self.kind not in KINDS:
            raise GraphError(f"unknown family kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.radius < 0:
            raise GraphError("radius must be nonnegative")
        if self.kind in ("tree", "core-plus-trees") and self.valence < 2:
            raise GraphError("tree valence must be at least 2")
        if self.c <= 0 or self.r <= 0 or self.c_ratio <= 0 or self.r_ratio <= 0:
            raise GraphError("weights and weight ratios must be positive")
        if self.kind == "core-plus-trees" and not self.core:
            raise GraphError("core-plus-trees needs a core graph file")

    @property
    def p(self) -> int:
        return self.valence - 1

    def items(self) -> list[tuple[str, str]]:
        out = [("kind", self.kind), ("radius", str(self.radius))]
        if self.kind in ("tree", "core-plus-trees"):
            out.append(("valence", str(self.valence)))
        out += [("c", repr(self.c)), ("r", repr(self.r))]
        if self.c_ratio != 1.0:
            out.append(("c_ratio", repr(self.c_ratio)))
        if self.r_ratio != 1.0:
            out.append(("r_ratio", repr(self.r_ratio)))
        if self.core:
            out.append(("core", self.core))
        if self.attach:
            out.append(("attach", ",".join(self.attach)))
        return out


def parse_spec(text: str, **overrides) -> FamilySpec:
    """Key-value spec file: one ``key value`` or ``key = value`` per line."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            key, _, val = line.partition(" ")
        key, val = key.strip().replace("-", "_"), val.strip()
        if not val:
            raise GraphError(f"spec line {lineno}: missing value for {key!r}")
        raw[key] = val
    raw.update({k: str(v) for k, v in overrides.items() if v is not None})
    conv: dict[str, Callable] = {
        "kind": str, "radius": int, "valence": int, "c": float, "r": float,
        "c_ratio": float, "r_ratio": float, "core": str,
        "attach": lambda s: tuple(x for x in s.split(",") if x),
    }
    kw = {}
    for key, val in raw.items():
        if key not in conv:
            raise GraphError(f"unknown spec key {key!r}")
        try:
            kw[key] = conv[key](val)
        except ValueError:
            raise GraphError(f"bad value for {key!r}: {val!r}") from None
    if "kind" not in kw or "radius" not in kw:
        raise GraphError("spec needs at least 'kind' and 'radius'")
    return FamilySpec(**kw)


@dataclass(frozen=True)
class Truncation:
    spec: FamilySpec
    graph: WeightedGraph
    base: str
    height: dict = field(repr=False)  # hop distance from the base point (trees: the height)
    rim: frozenset = field(repr=False)
    core: frozenset = frozenset()

    @property
    def interior(self) -> list[str]:
        return [v for v in self.graph.vertices if v not in self.rim]


class _Builder:
    def __init__(self, spec: FamilySpec):
        self.spec = spec
        self.vertices: list[tuple[str, float]] = []
        self.edges: list[tuple[str, str, float]] = []
        self.height: dict[str, int] = {}

    def vertex(self, v, h):
        self.height[v] = h
        self.vertices.append((v, self.spec.c * self.spec.c_ratio ** h))

    def edge(self, u, v, w=None):
        h = max(self.height[u], self.height[v])
        self.edges.append((u, v, (self.spec.r if w is None else w) * self.spec.r_ratio ** h))

    def tree(self, root, root_height, depth, root_children):
        """Tree hanging from ``root``: ``root_children`` at the root, p children below."""
        level = [root]
        for k in range(1, depth + 1):
            nxt = []
            for x in level:
                for j in range(root_children if k == 1 else self.spec.p):
                    y = f"{x}.{j}"
                    self.vertex(y, root_height + k)
                    self.edge(x, y)
                    nxt.append(y)
            level = nxt


def truncate(spec: FamilySpec) -> Truncation:
    b = _Builder(spec)
    N = spec.radius
    core = frozenset()
    if spec.kind == "tree":
        base = "t"
        b.vertex(base, 0)
        b.tree(base, 0, N, spec.valence)
    elif spec.kind == "ray":
        base = "0"
        for k in range(N + 1):
            b.vertex(str(k), k)
            if k:
                b.edge(str(k - 1), str(k))
    elif spec.kind == "ladder":
        base = "a0"
        for k in range(N + 1):
            b.vertex(f"a{k}", k)
            b.vertex(f"b{k}", k)
            b.edge(f"a{k}", f"b{k}")
            if k:
                b.edge(f"a{k - 1}", f"a{k}")
                b.edge(f"b{k - 1}", f"b{k}")
    elif spec.kind == "grid2d":
        base = "0,0"
        for x in range(-N, N + 1):
            for y in range(-N, N + 1):
                b.vertex(f"{x},{y}", max(abs(x), abs(y)))
        for x in range(-N, N + 1):
            for y in range(-N, N + 1):
                if x < N:
                    b.edge(f"{x},{y}", f"{x + 1},{y}")
                if y < N:
                    b.edge(f"{x},{y}", f"{x},{y + 1}")
    else:
        try:
            cg = read_graph(spec.core)
        except OSError as exc:
            raise GraphError(f"cannot read core graph: {exc}") from None
        if cg.n_vertices == 0 or not cg.is_connected():
            raise GraphError("core graph must be nonempty and connected")
        attach = cg.vertices if spec.attach is None else spec.attach
        for v in attach:
            if v not in cg:
                raise GraphError(f"attach vertex {v!r} is not in the core")
        base = cg.vertices[0]
        for v, c in zip(cg.vertices, cg.c.tolist()):
            b.height[v] = 0
            b.vertices.append((v, c))
        for (u, v), r in zip(cg.edges, cg.r.tolist()):
            b.edges.append((u, v, r))
        core = frozenset(cg.vertices)
        if N >= 1:
            for v in attach:
                root = f"{v}/t"
                b.vertex(root, 1)
                b.edge(v, root)
                b.tree(root, 1, N - 1, spec.p)
    g = WeightedGraph(b.vertices, b.edges)
    top = max(b.height.values())
    rim = frozenset(v for v, h in b.height.items() if h == top and v not in core) if N >= 1 else frozenset()
    return Truncation(spec, g, base, dict(b.height), rim, core)


def generate(spec: FamilySpec) -> WeightedGraph:
    return truncate(spec).graph


# -- exhaustion by metric balls -------------------------------------------------

@dataclass(frozen=True)
class TruncationSequence:
    graph: WeightedGraph = field(repr=False)
    metric: MetricAssignment = field(repr=False)
    base: str
    N: int
    step: float
    balls: tuple  # balls[n] for n = 0..N+1, as frozensets of vertex ids
    cutoffs: tuple  # cutoffs[n] for n = 0..N, Cochain0

    def dchi(self, n: int) -> np.ndarray:
        return d(self.cutoffs[n]).values


def truncation_sequence(graph: WeightedGraph, metric: MetricAssignment, base: str, N: int,
                        step: float = 1.0) -> TruncationSequence:
    """Balls B_n = {d(base, y) <= n * step} and cutoffs chi_n = min(1, d(., B_{n+1}^c))."""
    if base not in graph:
        raise GraphError(f"unknown base point {base!r}")
    if N < 0 or step <= 0:
        raise ValueError("need N >= 0 and a positive step")
    dist = distances_from(graph, metric, [base])
    if not np.all(np.isfinite(dist)):
        raise GraphError("graph is not connected")
    balls = tuple(
        frozenset(v for v, x in zip(graph.vertices, dist) if x <= n * step)
        for n in range(N + 2)
    )
    cutoffs = []
    for n in range(N + 1):
        outside = [v for v in graph.vertices if v not in balls[n + 1]]
        if not outside:
            chi = np.ones(graph.n_vertices)
        else:
            chi = np.minimum(1.0, distances_from(graph, metric, outside))
        cutoffs.append(Cochain0(graph, chi))
    return TruncationSequence(graph, metric, base, N, step, balls, tuple(cutoffs))


@dataclass(frozen=True)
class Homogeneity:
    both_roles: float  # max over n, x of (1/c(x)) sum over e+ = x and e- = x
    once: float  # same with each incident edge counted once (= both_roles / 2)
    per_n: tuple  # both-roles maximum for each n
    argmax: tuple  # (n, vertex) attaining the maximum


def homogeneity_constant(seq: TruncationSequence, exclude: Iterable[str] = ()) -> Homogeneity:
    g = seq.graph
    skip = set(exclude)
    keep = np.array([v not in skip for v in g.vertices])
    best, arg, per_n = 0.0, None, []
    for n in range(seq.N + 1):
        energy = g.r * seq.dchi(n) ** 2
        n_v = g.n_vertices
        load = (np.bincount(g.head, weights=energy, minlength=n_v)
                + np.bincount(g.tail, weights=energy, minlength=n_v))
        # oriented edges with e+ = x and with e- = x each see every incident edge once
        val = 2.0 * load / g.c
        val = np.where(keep, val, 0.0)
        m = float(val.max()) if n_v else 0.0
        per_n.append(m)
        if m > best or arg is None:
            best, arg = m, (n, g.vertices[int(np.argmax(val))] if n_v else None)
    return Homogeneity(best, best / 2.0, tuple(per_n), arg)


def completeness_check(seq: TruncationSequence, p: int) -> int | None:
    """Least n0 <= N with d chi_n = 0 on every edge touching B_p for all n in [n0, N]."""
    if not 0 <= p <= seq.N + 1:
        raise ValueError(f"p must lie in [0, {seq.N + 1}]")
    g = seq.graph
    ball = seq.balls[p]
    touch = np.array([u in ball or v in ball for u, v in g.edges], dtype=bool)
    flat = [not np.any(seq.dchi(n)[touch] != 0) for n in range(seq.N + 1)]
    n0 = None
    for n in range(seq.N, -1, -1):
        if not flat[n]:
            break
        n0 = n
    return n0


def cutoff_violations(seq: TruncationSequence, tol: float = 1e-12) -> int:
    """Count of (n, edge) with |d chi_n(e)|^2 > min(1, a(e)) + tol."""
    bound = np.minimum(1.0, seq.metric.a)
    return int(sum(np.count_nonzero(seq.dchi(n) ** 2 > bound + tol) for n in range(seq.N + 1)))


def th_constant(seq: TruncationSequence) -> float:
    """Smallest C with r(e) d chi_n(e)^2 <= C sqrt(c(e+) c(e-)) over all n and e."""
    g = seq.graph
    if g.n_edges == 0:
        return 0.0
    scale = np.sqrt(g.c[g.head] * g.c[g.tail])
    return max(float(np.max(g.r * seq.dchi(n) ** 2 / scale)) for n in range(seq.N + 1))


def cutoff_conditions_hold(seq: TruncationSequence) -> bool:
    """0 <= chi_n <= 1 everywhere and chi_n = 1 on B_n."""
    g = seq.graph
    for n, chi in enumerate(seq.cutoffs):
        if np.any(chi.values < 0) or np.any(chi.values > 1):
            return False
        if any(chi.values[g.index(v)] != 1.0 for v in seq.balls[n]):
            return False
    return True


# -- isoperimetric constant ------------------------------------------------------

class EnumerationBudget(ValueError):
    pass


@dataclass(frozen=True)
class Isoperimetric:
    value: float
    witness: tuple
    per_size: dict  # size -> (min ratio, witness)
    n_sets: int
    mode: str


def edge_boundary(graph: WeightedGraph, W) -> int:
    W = set(W)
    return sum((u in W) != (v in W) for u, v in graph.edges)


def connected_subsets(graph: WeightedGraph, max_size: int, allowed: Iterable[str] | None = None):
    """Every connected vertex set of size <= max_size inside ``allowed``, once each.

    Grown from each seed vertex using only vertices with a larger index than the
    seed, so every set is produced from its smallest vertex exactly once.
    """
    allowed_idx = set(range(graph.n_vertices)) if allowed is None else {graph.index(v) for v in allowed}
    nbrs = [sorted(y for _, _, y in graph.incident(x)) for x in range(graph.n_vertices)]

    def grow(current, frontier, excluded, seed):
        yield current
        if len(current) == max_size:
            return
        frontier = sorted(frontier)
        for j, v in enumerate(frontier):
            new = current | {v}
            # later branches must not reuse vertices already tried at this level
            ex = excluded | set(frontier[:j + 1])
            nf = set(frontier[j + 1:])
            for y in nbrs[v]:
                if y > seed and y in allowed_idx and y not in new and y not in ex:
                    nf.add(y)
            yield from grow(new, nf, ex, seed)

    for s in sorted(allowed_idx):
        front = {y for y in nbrs[s] if y > s and y in allowed_idx}
        yield from grow(frozenset({s}), front, frozenset(), s)


def isoperimetric(graph: WeightedGraph, max_size: int, mode: str = "exhaustive",
                  allowed: Iterable[str] | None = None, budget: int = 2_000_000,
                  heights: dict | None = None, valence: int | None = None) -> Isoperimetric:
    """Minimum of #(boundary edges of W) / #W over connected W with #W <= max_size.

    ``allowed`` restricts W (use the interior of a truncation so boundary
    counts match the infinite graph).  ``tree-bound`` mode additionally
    replays the height recurrence on every W (remove a highest vertex; the
    boundary changes by p - 1 or p + 1 depending on whether its parent is in
    W) and certifies the lower bound 1 for trees of constant valence >= 3.
    """
    if mode not in ("exhaustive", "tree-bound"):
        raise ValueError(f"unknown mode {mode!r}")
    if max_size < 1:
        raise ValueError("max_size must be positive")
    if mode == "tree-bound":
        if heights is None or valence is None:
            raise ValueError("tree-bound mode needs heights and the valence")
        if valence < 3:
            raise ValueError("tree-bound certificate needs valence >= 3")
        if graph.n_edges != graph.n_vertices - 1 or not graph.is_connected():
            raise ValueError("tree-bound mode needs a tree")
        pool = graph.vertices if allowed is None else allowed
        short = [v for v in pool if len(graph.neighbors(v)) != valence]
        if short:
            raise ValueError(f"tree-bound mode needs full valence on every candidate vertex; {short[0]!r} has "
                             f"{len(graph.neighbors(short[0]))}")
    per_size: dict[int, tuple[float, tuple]] = {}
    best, wit, count = math.inf, (), 0
    for W in connected_subsets(graph, max_size, allowed):
        count += 1
        if count > budget:
            raise EnumerationBudget(f"more than {budget} connected sets of size <= {max_size}")
        ids = tuple(sorted(graph.vertices[x] for x in W))
        nb = edge_boundary(graph, ids)
        if mode == "tree-bound":
            predicted = _recurrence_boundary(graph, ids, heights, valence - 1)
            if predicted != nb:
                raise AssertionError(f"height recurrence predicts {predicted}, counted {nb} for {ids}")
        ratio = nb / len(ids)
        key = (ratio, ids)
        cur = per_size.get(len(ids))
        if cur is None or key < cur:
            per_size[len(ids)] = key
        if (ratio, ids) < (best, wit):
            best, wit = ratio, ids
    if mode == "tree-bound":
        if best < 1:
            raise AssertionError(f"tree bound violated by {wit}")
        best = 1.0  # certified by the recurrence; per_size holds the measured minima
    return Isoperimetric(best, wit, dict(sorted(per_size.items())), count, mode)


def _recurrence_boundary(graph: WeightedGraph, W, heights: dict, p: int) -> int:
    """Boundary size of W from the height recurrence alone.

    Vertices are added lowest first, which is the recurrence read backwards:
    a new vertex has no children in W, so it adds p + 1 boundary edges if its
    parent is outside W and p - 1 if it is inside.  The base point adds p + 1.
    """
    total = 0
    members = set()
    for x in sorted(W, key=lambda v: (heights[v], v)):
        if heights[x] == 0:
            total += p + 1
        else:
            total += p - 1 if _parent(graph, x, heights) in members else p + 1
        members.add(x)
    return total


def _parent(graph: WeightedGraph, x, heights):
    for y in graph.neighbors(x):
        if heights[y] == heights[x] - 1:
            return y
    return None


# -- convergence of truncated Flanders solutions --------------------------------

@dataclass(frozen=True)
class ConvergenceRow:
    radius: int
    n_vertices: int
    n_edges: int
    difference: float | None  # ||I_r restricted to the previous window - I_prev||
    residual_current: float
    residual_period_max: float
    iterations: int
    k0_size: int


def convergence_study(spec: FamilySpec, sources: dict, voltages: dict, radii: Iterable[int],
                      cfg: SolverConfig = SolverConfig()) -> list[ConvergenceRow]:
    """Solve the same Kirchhoff problem on growing truncations of one family.

    ``sources`` maps vertex ids to current, ``voltages`` maps (tail, head)
    to voltage; every id must exist in the smallest truncation.
    """
    rows = []
    prev = None
    for radius in sorted(set(radii)):
        g = generate(replace(spec, radius=radius))
        problem = FlandersProblem(Cochain0.from_dict(g, sources), Cochain1.from_dict(g, voltages))
        sol = solve_flanders(g, problem, cfg)
        diff = None
        if prev is not None:
            diff = (restrict(sol.I, prev.graph) - prev).norm()
        rows.append(ConvergenceRow(radius, g.n_vertices, g.n_edges, diff, sol.residual_current,
                                   sol.residual_period_max, sol.iterations, len(sol.k0.vertices)))
        prev = sol.I
    return rows


def ball_positivity(trunc: Truncation, k0_radius: int = 1, interior_only: bool = True):
    """positivity_estimate on the complement of the hop ball of radius ``k0_radius``."""
    ball = [v for v, h in trunc.height.items() if h <= k0_radius]
    k0 = Subgraph.induced(trunc.graph, ball)
    frozen = trunc.rim if interior_only else ()
    return positivity_estimate(trunc.graph, k0, frozen)


def random_subset_check(graph: WeightedGraph, max_size: int, samples: int, rng: np.random.Generator,
                        allowed: Iterable[str] | None = None) -> bool:
    """Spot-check that an arbitrary W never beats its best connected component."""
    pool = list(graph.vertices if allowed is None else allowed)
    for _ in range(samples):
        k = int(rng.integers(1, max_size + 1))
        W = set(rng.choice(pool, size=min(k, len(pool)), replace=False).tolist())
        sub = graph.subgraph(W)
        comps = sub.components()
        best = min(edge_boundary(graph, C) / len(C) for C in comps)
        if edge_boundary(graph, W) / len(W) < best - 1e-15:
            return False
    return True


__all__ = [
    "FamilySpec", "Truncation", "TruncationSequence", "Homogeneity", "Isoperimetric",
    "ConvergenceRow", "KINDS", "parse_spec", "truncate", "generate", "truncation_sequence",
    "homogeneity_constant", "completeness_check", "cutoff_violations", "th_constant",
    "cutoff_conditions_hold", "edge_boundary", "connected_subsets", "isoperimetric",
    "convergence_study", "ball_positivity", "random_subset_check", "EnumerationBudget",
]
