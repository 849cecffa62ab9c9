"""Command-line front end.

Exit codes: 0 success, 1 usage or parse error, 2 mathematical precondition
violated (e.g. a current source with nonzero mean), 3 solver did not converge
or residuals exceed the tolerance.
"""
from __future__ import annotations

import argparse
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .cochains import Cochain0, Cochain1, parse_cochain0, parse_cochain1, serialize_cochain
from .graph import GraphError, MetricAssignment, Subgraph, parse_graph, serialize_graph
from .harness import (
    FamilySpec, ball_positivity, completeness_check, convergence_study, cutoff_violations,
    homogeneity_constant, isoperimetric, parse_spec, th_constant, truncate, truncation_sequence,
)
from .hodge import (
    Disconnected, EmptyComplement, FlandersProblem, NonzeroMean, NotConverged, SolverConfig,
    positivity_estimate, project_ker_delta, solve_flanders,
)
from .operators import OPERATORS, assemble
from .randgraph import random_cochain0, random_cochain1, random_connected_graph

DIAGNOSE_HELP = """\
CSV columns: n,quantity,value.  Quantities:
  homogeneity          max_x (1/c(x)) sum_{e+=x or e-=x} r(e) dchi_n(e)^2 at step n
                       (both orientations counted; divide by 2 for once-per-edge)
  homogeneity_max      maximum over n of the above (n = -1)
  completeness_n0      least n0 with dchi_m = 0 on every edge touching B_p for all
                       m >= n0 in the window (p = n);
                       empty value if not witnessed within the window
  cutoff_violations    number of edges with |dchi_n(e)|^2 > min(1, a(e)) at step n
  cutoff_violations_total  sum of the above over the window (n = -1)
  th_constant          smallest C with r dchi^2 <= C sqrt(c(e+) c(e-)) (n = -1)
  isoperimetric        min #(dW)/#W over connected W of size n
  isoperimetric_min    minimum over all enumerated sizes (n = -1)
  positivity_d         smallest singular value of d on functions vanishing on K0
                       (hop ball of radius n around the base point)
  positivity_D         same for the Gauss-Bonnet operator D
With --interior-only on (default) rim vertices of a family truncation are left
out of homogeneity maxima, isoperimetric candidates and positivity domains.
"""


class UsageError(Exception):
    pass


def _write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(out, text: str) -> None:
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        _write_atomic(Path(out), text)


def _header(args, extra=()) -> str:
    items = [("command", args.command), ("version", __version__), ("seed", str(args.seed))]
    for key in ("metric", "tol", "max_iter", "interior_only"):
        if hasattr(args, key):
            items.append((key, str(getattr(args, key))))
    items += list(extra)
    return "".join(f"# {k} {v}\n" for k, v in items)


def _read(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _graph(args):
    if not args.graph:
        raise UsageError("--graph is required")
    return parse_graph(_read(args.graph))


def _family(args) -> FamilySpec:
    text = _read(args.spec) if getattr(args, "spec", None) else ""
    over = {
        "kind": getattr(args, "kind", None), "radius": getattr(args, "radius", None),
        "valence": getattr(args, "valence", None), "core": getattr(args, "core", None),
    }
    if not text and over["kind"] is None:
        raise UsageError("give a family with --spec or --kind")
    return parse_spec(text, **over)


def _outdir(args) -> Path:
    if not args.out or args.out == "-":
        raise UsageError(f"{args.command} writes several files: give a directory with --out")
    return Path(args.out)


def _config(args) -> SolverConfig:
    return SolverConfig(tol=args.tol, max_iter=args.max_iter, metric=args.metric,
                        k0_margin=getattr(args, "k0_margin", 0.0))


# -- commands ----------------------------------------------------------------------

def cmd_gen(args) -> int:
    spec = _family(args)
    g = truncate(spec).graph
    head = _header(args, spec.items())
    _emit(args.out, head + serialize_graph(g))
    return 0


def cmd_solve(args) -> int:
    g = _graph(args)
    i = parse_cochain0(g, _read(args.source)) if args.source else Cochain0(g)
    ep = parse_cochain1(g, _read(args.voltage)) if args.voltage else Cochain1(g)
    cfg = _config(args)
    out = _outdir(args)
    sol = solve_flanders(g, FlandersProblem(i, ep), cfg)
    head = _header(args, [("graph", Path(args.graph).name), ("k0_margin", str(cfg.k0_margin))])
    _write_atomic(out / "I.txt", head + serialize_cochain(sol.I))
    _write_atomic(out / "E0.txt", head + serialize_cochain(sol.E0))
    _write_atomic(out / "I0.txt", head + serialize_cochain(sol.I0))
    k0 = "".join(f"{v}\n" for v in g.vertices if v in sol.k0.vertices)
    _write_atomic(out / "K0.txt", head + k0)
    _write_atomic(out / "summary.txt", head + sol.summary())
    sys.stdout.write(sol.summary())
    return 0 if sol.ok else 3


def cmd_decompose(args) -> int:
    g = _graph(args)
    if not args.phi:
        raise UsageError("--phi is required")
    phi = parse_cochain1(g, _read(args.phi))
    cfg = _config(args)
    out = _outdir(args)
    parts = project_ker_delta(g, phi, cfg)
    head = _header(args, [("graph", Path(args.graph).name)])
    _write_atomic(out / "harmonic.txt", head + serialize_cochain(parts.harmonic))
    _write_atomic(out / "exact.txt", head + serialize_cochain(parts.exact))
    _write_atomic(out / "potential.txt", head + serialize_cochain(parts.potential))
    report = (
        f"inner_harmonic_exact {parts.harmonic.inner(parts.exact)!r}\n"
        f"delta_harmonic_norm {parts.residual!r}\n"
        f"harmonic_norm {parts.harmonic.norm()!r}\n"
        f"exact_norm {parts.exact.norm()!r}\n"
        f"iterations {parts.iterations}\n"
    )
    _write_atomic(out / "report.txt", head + report)
    sys.stdout.write(report)
    return 0


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def cmd_diagnose(args) -> int:
    interior = args.interior_only == "on"
    if args.graph:
        g = _graph(args)
        base = args.base or (g.vertices[0] if g.n_vertices else None)
        rim, heights, valence = frozenset(), None, None
        N = args.radius if args.radius is not None else 4
        extra = [("graph", Path(args.graph).name)]
        trunc = None
    else:
        spec = _family(args)
        trunc = truncate(spec)
        g, base, rim, heights = trunc.graph, args.base or trunc.base, trunc.rim, trunc.height
        valence = spec.valence if spec.kind == "tree" else None
        N = spec.radius
        extra = spec.items()
    checks = set(args.checks.split(","))
    unknown = checks - {"homogeneity", "completeness", "cutoff", "isoperimetric", "positivity"}
    if unknown:
        raise UsageError(f"unknown checks: {', '.join(sorted(unknown))}")
    rows = []
    metric = MetricAssignment.from_name(g, args.metric)
    if checks & {"homogeneity", "completeness", "cutoff"}:
        seq = truncation_sequence(g, metric, base, N)
        if "homogeneity" in checks:
            h = homogeneity_constant(seq, exclude=rim if interior else ())
            rows += [(n, "homogeneity", v) for n, v in enumerate(h.per_n)]
            rows.append((-1, "homogeneity_max", h.both_roles))
            rows.append((-1, "th_constant", th_constant(seq)))
        if "completeness" in checks:
            rows += [(p, "completeness_n0", completeness_check(seq, p)) for p in range(N + 1)]
        if "cutoff" in checks:
            bound = np.minimum(1.0, metric.a)
            for n in range(N + 1):
                rows.append((n, "cutoff_violations", int(np.count_nonzero(seq.dchi(n) ** 2 > bound + 1e-12))))
            rows.append((-1, "cutoff_violations_total", cutoff_violations(seq)))
    if "isoperimetric" in checks:
        allowed = [v for v in g.vertices if v not in rim] if interior else None
        mode = "tree-bound" if (valence is not None and valence >= 3 and interior) else "exhaustive"
        iso = isoperimetric(g, args.iso_max_size, mode="exhaustive", allowed=allowed)
        if mode == "tree-bound":
            isoperimetric(g, args.iso_max_size, mode=mode, allowed=allowed, heights=heights, valence=valence)
        rows += [(k, "isoperimetric", v[0]) for k, v in iso.per_size.items()]
        rows.append((-1, "isoperimetric_min", iso.value))
    if "positivity" in checks:
        radius = args.k0_radius
        try:
            if trunc is not None:
                est = ball_positivity(trunc, radius, interior_only=interior)
            else:
                dist = _hops(g, base)
                k0 = Subgraph.induced(g, [v for v, h in dist.items() if h <= radius])
                est = positivity_estimate(g, k0)
            rows.append((radius, "positivity_d", est.d))
            rows.append((radius, "positivity_D", est.gauss_bonnet))
        except EmptyComplement:
            rows.append((radius, "positivity_d", None))
            rows.append((radius, "positivity_D", None))
    head = _header(args, extra + [("base", base), ("window", str(N))])
    body = "n,quantity,value\n" + "".join(f"{n},{q},{_fmt(v)}\n" for n, q, v in rows)
    _emit(args.out, head + body)
    return 0


def _hops(g, base) -> dict:
    seen = {base: 0}
    queue = [base]
    for x in queue:
        for y in g.neighbors(x):
            if y not in seen:
                seen[y] = seen[x] + 1
                queue.append(y)
    return seen


def cmd_convergence(args) -> int:
    try:
        radii = sorted({int(x) for x in args.radii.split(",") if x.strip()})
    except ValueError:
        raise UsageError(f"bad --radii {args.radii!r}") from None
    if not radii:
        raise UsageError("--radii is empty")
    if args.radius is None:
        args.radius = radii[0]
    spec = _family(args)
    small = truncate(replace(spec, radius=radii[0])).graph
    src = parse_cochain0(small, _read(args.source)).to_dict() if args.source else {}
    vol = parse_cochain1(small, _read(args.voltage)).to_dict() if args.voltage else {}
    src = {k: v for k, v in src.items() if v != 0}
    vol = {k: v for k, v in vol.items() if v != 0}
    rows = convergence_study(spec, src, vol, radii, _config(args))
    cols = ["radius", "n_vertices", "n_edges", "difference", "residual_current",
            "residual_period_max", "iterations", "k0_size"]
    body = ",".join(cols) + "\n"
    for row in rows:
        body += ",".join(_fmt(getattr(row, c)) for c in cols) + "\n"
    head = _header(args, spec.items() + [("radii", ",".join(map(str, radii)))])
    _emit(args.out, head + body)
    return 0


def cmd_export(args) -> int:
    g = _graph(args)
    op = assemble(g, args.op)
    _emit(args.out, _header(args, [("operator", args.op)]) + op.triplets())
    return 0


def cmd_check(args) -> int:
    """Random identity checks; one CSV row per graph."""
    from .operators import d, delta, dirac_square, laplacian0, laplacian1
    rng = np.random.default_rng(args.seed)
    body = "trial,n_vertices,n_edges,adjointness,dirac_square,product_rule\n"
    worst = 0.0
    for t in range(args.trials):
        g = random_connected_graph(rng, int(rng.integers(2, args.max_vertices + 1)))
        f, h, phi = random_cochain0(rng, g), random_cochain0(rng, g), random_cochain1(rng, g)
        df = d(f)
        adj = abs(df.inner(phi) - f.inner(delta(phi))) / (f.norm() * phi.norm() + df.norm() * phi.norm())
        s0, s1 = dirac_square(f, phi)
        sq = max(np.max(np.abs(s0.values - laplacian0(f).values), initial=0.0),
                 np.max(np.abs(s1.values - laplacian1(phi).values), initial=0.0))
        sq = float(sq / max(np.max(np.abs(s0.values), initial=0.0), np.max(np.abs(s1.values), initial=0.0), 1e-300))
        fh = Cochain0(g, f.values * h.values)
        lhs = d(fh).values
        rhs = f.values[g.head] * d(h).values + df.values * h.values[g.tail]
        scale = np.abs(f.values[g.head] * h.values[g.head]) + np.abs(f.values[g.tail] * h.values[g.tail])
        prod = float(np.max(np.abs(lhs - rhs) / np.maximum(scale, 1e-300), initial=0.0))
        worst = max(worst, adj / 1e-10, sq / 1e-12, prod / 1e-13)
        body += f"{t},{g.n_vertices},{g.n_edges},{adj!r},{sq!r},{prod!r}\n"
    _emit(args.out, _header(args, [("trials", str(args.trials))]) + body)
    return 0 if worst <= 1.0 else 3


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gaussbonnet", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, solver=False):
        sp.add_argument("--out", help="output path (directory for solve/decompose; '-' for stdout)")
        sp.add_argument("--seed", type=int, default=0, help="recorded in output headers")
        sp.add_argument("--metric", choices=("ctt", "th"), default="ctt")
        if solver:
            sp.add_argument("--tol", type=float, default=1e-10)
            sp.add_argument("--max-iter", type=int, default=None)

    def family(sp):
        sp.add_argument("--spec", help="key-value family spec file")
        sp.add_argument("--kind", choices=("tree", "regular-tree", "ray", "ladder", "grid2d", "core-plus-trees"))
        sp.add_argument("--radius", type=int)
        sp.add_argument("--valence", type=int)
        sp.add_argument("--core", help="core graph file for core-plus-trees")

    sp = sub.add_parser("gen", help="write a truncation of a graph family")
    family(sp)
    common(sp)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("solve", help="solve Kirchhoff's laws for a current and voltage source")
    sp.add_argument("--graph")
    sp.add_argument("--source", help="0-cochain file for the current source i")
    sp.add_argument("--voltage", help="1-cochain file for the voltage source E'")
    sp.add_argument("--k0-margin", type=float, default=0.0)
    common(sp, solver=True)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("decompose", help="split a 1-cochain into Ker(delta) and Im(d) parts")
    sp.add_argument("--graph")
    sp.add_argument("--phi", help="1-cochain file")
    common(sp, solver=True)
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("diagnose", help="completeness, homogeneity, isoperimetric and positivity diagnostics",
                        epilog=DIAGNOSE_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    sp.add_argument("--graph")
    family(sp)
    sp.add_argument("--base", help="base point (default: family base or first vertex)")
    sp.add_argument("--interior-only", choices=("on", "off"), default="on")
    sp.add_argument("--checks", default="homogeneity,completeness,cutoff,isoperimetric,positivity")
    sp.add_argument("--iso-max-size", type=int, default=6)
    sp.add_argument("--k0-radius", type=int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_diagnose)

    sp = sub.add_parser("convergence", help="solve on growing truncations and compare")
    family(sp)
    sp.add_argument("--source")
    sp.add_argument("--voltage")
    sp.add_argument("--radii", default="3,4,5,6,7")
    sp.add_argument("--k0-margin", type=float, default=0.0)
    common(sp, solver=True)
    sp.set_defaults(func=cmd_convergence)

    sp = sub.add_parser("export", help="write an assembled operator as coordinate triplets")
    sp.add_argument("--graph")
    sp.add_argument("--op", choices=OPERATORS, required=True)
    common(sp)
    sp.set_defaults(func=cmd_export)

    sp = sub.add_parser("check", help="random identity checks (adjointness, D^2, product rule)")
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--max-vertices", type=int, default=50)
    common(sp)
    sp.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except NonzeroMean as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NotConverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Disconnected as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (UsageError, GraphError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
