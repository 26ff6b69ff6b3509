"""Command-line front end: ``check``, ``run``, ``rate`` and ``center``.

Exit codes: 0 pass, 1 check or certificate failure, 2 usage or validation error,
3 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import checks, rates
from .errors import ConstructionError, DomainError, GeofixError, NumericFailure, UnsupportedCapability
from .geometry import parse_space
from .iteration import (
    GridSearch,
    TreeSearch,
    alternating_projections,
    asymptotic_center,
    minimal_displacement_estimate,
    parallel_orbit,
    periodic_point_probe,
    picard_orbit,
)
from .mappings import Averaged, apply
from .serialize import canonical_json, load_config, trace_to_csv, trace_to_json, write_canonical
from .trees import MetricTree

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


def _env_seed(default: int) -> int:
    env = os.environ.get("GEOFIX_SEED")
    return int(env) if env not in (None, "") else default


# -- check -----------------------------------------------------------------------------


def cmd_check(args) -> int:
    space = parse_space(args.space)
    names = checks.expand_properties(args.props.split(","))
    seed = args.seed if args.seed is not None else _env_seed(0)
    reports = [checks.PROPERTIES[p](space, n=args.n, seed=seed) for p in names]
    for r in reports:
        print(r.verdict())
    if args.out:
        out = Path(args.out)
        path = out / "reports.json" if out.suffix != ".json" else out
        path.parent.mkdir(parents=True, exist_ok=True)
        write_canonical(path, {"space": space.spec(), "n": args.n, "seed": seed,
                               "reports": [r.to_json(space) for r in reports]})
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


# -- run -------------------------------------------------------------------------------


def _rate_inputs(cfg, eps: float, Tx0=None) -> rates.RateInputs:
    """Map the configuration onto the hypotheses of the chosen bound."""
    space, formula = cfg.space, cfg.formula
    if formula in ("ap", "parallel", "parallel_refined"):
        if cfg.b is None and cfg.anchor is None:
            raise ConstructionError(f"formula {formula!r} needs b or an anchor point of the intersection")
        b = cfg.b if cfg.b is not None else space.distance(cfg.x0, cfg.anchor)
        kw = {}
        if formula != "ap":
            modulus = rates.resolve_modulus(cfg.modulus) if cfg.modulus else space.modulus
            if modulus is None:
                raise UnsupportedCapability(f"{space.spec()} has no modulus of uniform convexity")
            m = cfg.mapping
            kw = dict(lambdas=m.lambdas, alphas=m.weights, modulus=modulus)
        return rates.RateInputs(eps, b, anchor=cfg.anchor, **kw)
    if formula not in ("averaged", "firmly"):
        raise DomainError(f"unknown formula {formula!r}")
    if cfg.lam is None:
        raise ConstructionError(f"formula {formula!r} needs lambda")
    if formula == "averaged" or cfg.anchor is None:
        # bounded-domain form: the caller asserts diam(C) <= b
        if cfg.b is None:
            raise ConstructionError(f"formula {formula!r} without an anchor needs b >= diam(C)")
        return rates.RateInputs(eps, cfg.b, lam=cfg.lam)
    # auxiliary-point form: b >= max(d(x, y), d(x, Tx)), threshold eps + d(y, Ty)
    y = cfg.anchor
    Ty = apply(space, cfg.mapping, y)
    need = max(space.distance(cfg.x0, y), space.distance(cfg.x0, Tx0))
    b = cfg.b if cfg.b is not None else need
    if b < need - space.tol:
        raise DomainError(f"b = {b} is below max(d(x,y), d(x,Tx)) = {need}")
    return rates.RateInputs(eps, b, lam=cfg.lam, displacement_floor=space.distance(y, Ty))


def _orbit(cfg):
    space = cfg.space
    floor = 0.0
    if cfg.formula == "firmly" and cfg.anchor is not None:
        floor = space.distance(cfg.anchor, apply(space, cfg.mapping, cfg.anchor))
    eps_stop = cfg.eps_stop if cfg.eps_stop is not None else min(cfg.eps) + floor
    kw = dict(digest=cfg.digest)
    if cfg.scheme == "alternating_projection":
        A, B = cfg.sets
        return alternating_projections(space, A, B, cfg.x0, cfg.n_max, eps_stop, **kw)
    if cfg.scheme == "parallel":
        return parallel_orbit(space, cfg.mapping, cfg.x0, cfg.n_max, eps_stop, **kw)
    return picard_orbit(space, cfg.mapping, cfg.x0, cfg.n_max, eps_stop, **kw)


def _orbit_reports(cfg, trace) -> list:
    space = cfg.space
    out = [checks.check_gap_monotone(trace)]
    if cfg.anchor is not None and cfg.scheme in ("alternating_projection", "parallel"):
        out.append(checks.check_fejer(space, trace, cfg.anchor))
        if cfg.scheme == "alternating_projection" and space.cat0:
            out.append(checks.check_projection_descent(space, trace, cfg.anchor))
    if cfg.scheme == "picard" and cfg.formula == "firmly" and cfg.lam is not None:
        out.append(checks.check_firm_orbit(space, trace, cfg.lam))
    if isinstance(cfg.mapping, Averaged):
        rng = np.random.default_rng(cfg.seed)
        pairs = [(space.sample_point(rng), space.sample_point(rng)) for _ in range(200)]
        out.append(checks.check_averaged_inequality(space, cfg.mapping, pairs))
        out.append(checks.check_descent(space, cfg.mapping, [p for p, _ in pairs]))
        out.append(checks.check_descent(space, cfg.mapping.base, [p for p, _ in pairs], name="descent-base"))
    return out


def execute_run(cfg, out_dir: Path) -> int:
    """Run one configuration and write the four output files into ``out_dir``."""
    space = cfg.space
    trace = _orbit(cfg)
    Tx0 = trace.point(1) if cfg.scheme == "picard" and trace.has_point(1) else None
    certs = [rates.certify(trace, _rate_inputs(cfg, e, Tx0), cfg.formula, space) for e in cfg.eps]
    reports = _orbit_reports(cfg, trace)
    probe = periodic_point_probe(trace, space.tol)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "trace.csv").write_text(trace_to_csv(trace, space), encoding="utf-8")
    write_canonical(out_dir / "trace.json", {"config": cfg.canonical(), **trace_to_json(trace, space, certs)})
    write_canonical(out_dir / "certificates.json", {"config_digest": cfg.digest,
                                                    "certificates": [c.to_json() for c in certs]})
    write_canonical(out_dir / "reports.json", {
        "config_digest": cfg.digest,
        "minimal_displacement_estimate": minimal_displacement_estimate(trace),
        "periodic_points": [list(h) for h in probe.hits],
        "reports": [r.to_json(space) for r in reports],
    })
    for c in certs:
        status = "PASS" if c.passes else "FAIL"
        observed = "not reached" if c.observed_index is None else c.observed_index
        print(f"{status} {c.bound_formula} eps={c.epsilon:g}: observed {observed} <= bound {c.bound}")
    for r in reports:
        print(r.verdict())
    return EXIT_OK if all(c.passes for c in certs) else EXIT_FAIL


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    return execute_run(cfg, Path(args.out))


# -- rate ------------------------------------------------------------------------------


def _floats(text):
    if text is None:
        return None
    return [float(v) for v in text.split(",") if v.strip()]


def cmd_rate(args) -> int:
    f = args.formula.replace("-", "_")
    if f in ("averaged", "firmly") and args.lam is None:
        raise DomainError(f"{args.formula} needs --lambda")
    if f == "averaged":
        bound = rates.averaged_rate(args.eps, args.b, args.lam)
    elif f == "firmly":
        bound = rates.firmly_rate(args.eps, args.b, args.lam)
    elif f == "ap":
        bound = rates.ap_rate(args.eps, args.b)
    elif f in ("parallel", "parallel_refined"):
        fn = rates.parallel_rate if f == "parallel" else rates.parallel_rate_refined
        modulus = rates.resolve_modulus(args.modulus)
        if args.K is None and args.lambdas is None:
            raise DomainError("give --K or --lambdas/--alphas")
        bound = fn(args.eps, args.b, modulus, _floats(args.lambdas), _floats(args.alphas), K=args.K)
    elif f == "lp":
        if args.p is None:
            raise DomainError("lp needs --p")
        bound = rates.lp_closed_form_rate(
            args.eps, args.b, args.p, _floats(args.lambdas), _floats(args.alphas), K=args.K
        )
    else:
        raise DomainError(f"unknown formula {args.formula!r}")
    print(bound)
    return EXIT_OK


# -- center ----------------------------------------------------------------------------


def cmd_center(args) -> int:
    with open(args.trace, encoding="utf-8") as fh:
        data = json.load(fh)
    space = parse_space(args.space if args.space else data["config"]["space"])
    points = [space.point_from_json(p) for p in data["points"]]
    k = max(1, math.ceil(len(points) * args.tail))
    tail = points[-k:]
    if isinstance(space, MetricTree):
        search = TreeSearch(args.per_edge)
    else:
        search = GridSearch.around(tail, args.margin, args.step)
    center, radius = asymptotic_center(space, tail, search)
    print(canonical_json({"center": space.point_to_json(center), "radius": radius, "tail_length": k}))
    return EXIT_OK


# -- entry point -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="geofix", description="Fixed-point iterations in geodesic spaces.")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="sample-check metric axioms and inequalities")
    c.add_argument("--space", required=True, help="euclidean:D, lp:P:D, disk, tree:tripod or tree:FILE")
    c.add_argument("--props", default="all", help="comma list, e.g. w-axioms,cn,ptolemy")
    c.add_argument("-n", type=int, default=10_000)
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--out", help="directory (or .json file) for reports")
    c.set_defaults(func=cmd_check)

    r = sub.add_parser("run", help="iterate a configured scheme and certify its regularity index")
    r.add_argument("--config", required=True)
    r.add_argument("--out", default="out")
    r.set_defaults(func=cmd_run)

    q = sub.add_parser("rate", help="evaluate a rate bound exactly")
    q.add_argument("formula", choices=["averaged", "firmly", "ap", "parallel", "parallel-refined", "lp"])
    q.add_argument("--eps", required=True, type=float)
    q.add_argument("--b", required=True, type=float)
    q.add_argument("--lambda", dest="lam", type=float)
    q.add_argument("--lambdas")
    q.add_argument("--alphas")
    q.add_argument("--K", type=float)
    q.add_argument("--p", type=float)
    q.add_argument("--modulus", default="cat0", help="cat0 or lp:P")
    q.set_defaults(func=cmd_rate)

    z = sub.add_parser("center", help="asymptotic center of a trace tail")
    z.add_argument("--trace", required=True, help="trace.json written by run")
    z.add_argument("--space", help="override the space recorded in the trace")
    z.add_argument("--tail", type=float, default=0.25, help="fraction of kept points used")
    z.add_argument("--step", type=float, default=1e-3)
    z.add_argument("--margin", type=float, default=0.05)
    z.add_argument("--per-edge", type=int, default=100)
    z.set_defaults(func=cmd_center)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (GeofixError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
