"""Minimum boundary-to-size ratio by set size on the interior of several truncations."""
import argparse
from dataclasses import dataclass

from gaussbonnet.harness import FamilySpec, isoperimetric, truncate


@dataclass(frozen=True)
class Config:
    max_size: int = 7
    families: tuple = (("tree", 5), ("ray", 10), ("ladder", 10), ("grid2d", 4))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-size", type=int, default=Config.max_size)
    cfg = Config(ap.parse_args().max_size)
    print("family,size,min_ratio,witness")
    for kind, radius in cfg.families:
        t = truncate(FamilySpec(kind, radius))
        res = isoperimetric(t.graph, cfg.max_size, allowed=t.interior)
        for size, (ratio, wit) in res.per_size.items():
            print(f"{kind},{size},{ratio!r},{' '.join(wit)}")


if __name__ == "__main__":
    main()
