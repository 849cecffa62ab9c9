"""Kirchhoff solutions on growing truncations of a family, compared window by window."""
import argparse
from dataclasses import dataclass, field

from gaussbonnet.harness import FamilySpec, convergence_study
from gaussbonnet.hodge import SolverConfig


@dataclass(frozen=True)
class Config:
    kind: str = "ladder"
    radii: tuple = (3, 4, 5, 6, 7, 8)
    sources: dict = field(default_factory=lambda: {"a0": 1.0, "b1": -1.0})
    voltages: dict = field(default_factory=dict)
    solver: SolverConfig = SolverConfig()


PRESETS = {
    "tree": Config("tree", sources={"t.0": 1.0, "t.1": -1.0}),
    "ladder": Config(),
    "grid2d": Config("grid2d", radii=(2, 3, 4, 5, 6, 7), sources={"0,0": 1.0, "1,0": -1.0}),
    "ladder-voltage": Config(sources={}, voltages={("a0", "b0"): 1.0}),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("preset", choices=sorted(PRESETS), nargs="?", default="ladder")
    ap.add_argument("--tol", type=float, default=1e-10)
    a = ap.parse_args()
    cfg = PRESETS[a.preset]
    kind = cfg.kind
    rows = convergence_study(FamilySpec(kind, cfg.radii[0]), cfg.sources, cfg.voltages, cfg.radii,
                             SolverConfig(tol=a.tol))
    print("radius,n_vertices,difference,residual_current,residual_period_max,iterations")
    for r in rows:
        diff = "" if r.difference is None else repr(r.difference)
        print(f"{r.radius},{r.n_vertices},{diff},{r.residual_current!r},{r.residual_period_max!r},{r.iterations}")


if __name__ == "__main__":
    main()
