"""Smallest singular value of d off a hop ball, tree truncations against grids.

Prints one CSV row per (family, radius).  Tree values level off at a positive
number while the grid values keep falling.
"""
import argparse
from dataclasses import dataclass

from gaussbonnet.harness import FamilySpec, ball_positivity, truncate


@dataclass(frozen=True)
class Config:
    radii: tuple = (3, 4, 5, 6, 7)
    k0_radius: int = 1
    valence: int = 3
    interior_only: bool = True


def run(cfg: Config) -> list[tuple]:
    rows = []
    for kind in ("tree", "grid2d"):
        for radius in cfg.radii:
            t = truncate(FamilySpec(kind, radius, valence=cfg.valence))
            est = ball_positivity(t, cfg.k0_radius, cfg.interior_only)
            rows.append((kind, radius, t.graph.n_vertices, est.d, est.gauss_bonnet))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--radii", default="3,4,5,6,7")
    ap.add_argument("--k0-radius", type=int, default=1)
    ap.add_argument("--valence", type=int, default=3)
    ap.add_argument("--with-rim", action="store_true", help="keep rim vertices in the domain")
    a = ap.parse_args()
    cfg = Config(tuple(int(x) for x in a.radii.split(",")), a.k0_radius, a.valence, not a.with_rim)
    print("family,radius,n_vertices,sigma_d,sigma_D")
    for kind, radius, n, sd, sD in run(cfg):
        print(f"{kind},{radius},{n},{sd!r},{sD!r}")


if __name__ == "__main__":
    main()
