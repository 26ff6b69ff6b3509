"""Seeded alternating-projection and parallel runs on random feasibility problems,
each certified against its rate bound.

    python3 scripts/certify_sweep.py --runs 20 --out sweep.csv
"""
import argparse
import csv
import sys

import numpy as np

from geofix.geometry import Euclidean, PoincareDisk
from geofix.iteration import alternating_projections, parallel_orbit
from geofix.mappings import Composite, Projection
from geofix.rates import RateInputs, ap_rate, certify, parallel_rate, parallel_rate_refined
from geofix.sets import Ball, HalfSpace


def random_sets(space, rng, p, r):
    """r sets through p: balls, plus half-planes when the space is Euclidean."""
    out = []
    for _ in range(r):
        u = float(rng.uniform(0, 0.3))
        if space.kind == "euclidean" and rng.random() < 0.5:
            n = rng.standard_normal(2)
            out.append(HalfSpace(tuple(float(v) for v in n), float(n @ np.asarray(p)) + u))
        else:
            c = space.sample_point(rng, radius=0.7)
            out.append(Ball(c, space.distance(c, p) + u))
    return out


def sweep(runs, eps_list, seed0):
    eps_min = min(eps_list)
    for k in range(runs):
        rng = np.random.default_rng(seed0 + k)
        space = Euclidean(2) if k % 2 == 0 else PoincareDisk()
        p = space.sample_point(rng, radius=0.6)
        x0 = space.sample_point(rng, radius=0.9)
        b = space.distance(x0, p)
        A, B = random_sets(space, rng, p, 2)
        tr = alternating_projections(space, A, B, x0, ap_rate(eps_min, b).value + 2, eps_min)
        for e in eps_list:
            yield space.spec(), "ap", k, certify(tr, RateInputs(e, b, anchor=p), "ap", space)
        r = 2 + k % 3
        sets = random_sets(space, rng, p, r)
        w = rng.dirichlet(np.ones(r))
        w = tuple(float(v) for v in w[:-1]) + (1.0 - float(np.sum(w[:-1])),)
        T = Composite(tuple(Projection(s) for s in sets), tuple(float(v) for v in rng.uniform(0.1, 0.9, r)), w)
        formula, fn = ("parallel_refined", parallel_rate_refined) if space.kind == "euclidean" else ("parallel", parallel_rate)
        n_max = fn(eps_min, b, space.modulus, T.lambdas, T.weights).value + 2
        tr = parallel_orbit(space, T, x0, n_max, eps_min)
        for e in eps_list:
            inp = RateInputs(e, b, lambdas=T.lambdas, alphas=T.weights, modulus=space.modulus, anchor=p)
            yield space.spec(), formula, k, certify(tr, inp, formula, space)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--eps", default="0.1,0.01")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh)
    w.writerow(["space", "formula", "run", "eps", "observed", "bound", "passes"])
    failures = 0
    for spec, formula, k, c in sweep(args.runs, [float(e) for e in args.eps.split(",")], args.seed):
        w.writerow([spec, formula, k, c.epsilon, c.observed_index, str(c.bound), c.passes])
        failures += not c.passes
    if args.out:
        fh.close()
    print(f"{failures} certificate failures", file=sys.stderr)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
