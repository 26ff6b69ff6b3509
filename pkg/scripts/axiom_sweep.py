"""Run every sampled property check on a list of spaces and print a verdict matrix.

    python3 scripts/axiom_sweep.py -n 2000 --out axioms.json
"""
import argparse

from geofix.checks import PROPERTIES
from geofix.errors import UnsupportedCapability
from geofix.geometry import parse_space
from geofix.serialize import write_canonical


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--spaces", default="euclidean:2,lp:4:3,lp:1.5:3,disk,tree:tripod")
    ap.add_argument("-n", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    names = list(PROPERTIES)
    print("space".ljust(14) + "".join(n[:10].ljust(11) for n in names))
    results = {}
    for spec in args.spaces.split(","):
        space = parse_space(spec)
        cells, results[spec] = [], {}
        for name in names:
            try:
                rep = PROPERTIES[name](space, n=args.n, seed=args.seed)
            except UnsupportedCapability:
                cells.append("n/a")
                continue
            cells.append("ok" if rep.passed else f"x {rep.max_violation:.1e}")
            results[spec][name] = rep.to_json(space)
        print(spec.ljust(14) + "".join(c.ljust(11) for c in cells))
    if args.out:
        write_canonical(args.out, {"n": args.n, "seed": args.seed, "results": results})


if __name__ == "__main__":
    main()
