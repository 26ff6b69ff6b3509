"""Canonical JSON, digests, and the tagged encodings of points, sets and mappings."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConstructionError, DomainError
from .geometry import parse_space, space_to_json
from .mappings import Averaged, Composite, Identity, Projection
from .sets import Ball, GeodesicSegment, HalfSpace, Subtree, validate_set
from .trees import MetricTree, TreePoint


def _float(x: float) -> str:
    if not math.isfinite(x):
        return json.dumps(str(x))
    if x == int(x) and abs(x) < 2**53:
        # 1.0 and 1 should hash alike
        return str(int(x))
    return format(x, ".17g")


def canonical_json(obj) -> str:
    """Sorted keys, no whitespace, floats with 17 significant digits."""
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(json.dumps(k) + ":" + canonical_json(v) for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    if hasattr(obj, "item"):  # numpy scalar
        return canonical_json(obj.item())
    raise TypeError(f"cannot encode {type(obj).__name__}")


def digest(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


def write_canonical(path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(canonical_json(obj))
        fh.write("\n")


# -- points, sets, mappings ------------------------------------------------------------


def point_to_json(space, x):
    return space.point_to_json(x)


def point_from_json(space, obj):
    return space.point_from_json(obj)


def set_to_json(space, s) -> dict:
    if isinstance(s, Ball):
        return {"kind": "ball", "center": space.point_to_json(s.center), "radius": float(s.radius)}
    if isinstance(s, HalfSpace):
        return {"kind": "halfspace", "normal": list(s.normal), "offset": float(s.offset)}
    if isinstance(s, GeodesicSegment):
        return {"kind": "segment", "a": space.point_to_json(s.a), "b": space.point_to_json(s.b)}
    if isinstance(s, Subtree):
        return {"kind": "subtree", "vertices": sorted(s.vertices)}
    raise DomainError(f"unknown convex set {s!r}")


def set_from_json(space, obj) -> object:
    try:
        kind = obj["kind"]
        if kind == "ball":
            s = Ball(space.point_from_json(obj["center"]), float(obj["radius"]))
        elif kind == "halfspace":
            s = HalfSpace(tuple(obj["normal"]), float(obj["offset"]))
        elif kind == "segment":
            s = GeodesicSegment(space.point_from_json(obj["a"]), space.point_from_json(obj["b"]))
        elif kind == "subtree":
            s = Subtree(frozenset(obj["vertices"]))
        else:
            raise DomainError(f"unknown set kind {kind!r}")
    except (KeyError, TypeError) as exc:
        raise ConstructionError(f"malformed set description {obj!r}: {exc}") from None
    return validate_set(space, s)


def mapping_to_json(space, m) -> dict:
    if isinstance(m, Identity):
        return {"kind": "identity"}
    if isinstance(m, Projection):
        return {"kind": "projection", "set": set_to_json(space, m.set)}
    if isinstance(m, Averaged):
        return {"kind": "averaged", "base": mapping_to_json(space, m.base), "lambda": m.lam}
    if isinstance(m, Composite):
        return {
            "kind": "composite",
            "retractions": [mapping_to_json(space, p) for p in m.retractions],
            "lambdas": list(m.lambdas),
            "weights": list(m.weights),
        }
    raise DomainError(f"{type(m).__name__} has no JSON encoding")


def mapping_from_json(space, obj):
    try:
        kind = obj["kind"]
        if kind == "identity":
            return Identity()
        if kind == "projection":
            return Projection(set_from_json(space, obj["set"]))
        if kind == "averaged":
            return Averaged(mapping_from_json(space, obj["base"]), float(obj["lambda"]))
        if kind == "composite":
            if "sets" in obj:
                rets = [Projection(set_from_json(space, s)) for s in obj["sets"]]
            else:
                rets = [mapping_from_json(space, r) for r in obj["retractions"]]
            return Composite(tuple(rets), tuple(obj["lambdas"]), tuple(obj["weights"]))
    except (KeyError, TypeError) as exc:
        raise ConstructionError(f"malformed mapping description {obj!r}: {exc}") from None
    raise DomainError(f"unknown mapping kind {kind!r}")


# -- run configuration ------------------------------------------------------------------

DEFAULT_FORMULA = {
    "alternating_projection": "ap",
    "parallel": "parallel_refined",
    "picard": "firmly",
}


@dataclass
class RunConfig:
    space: object
    scheme: str
    x0: object
    eps: list
    n_max: int = 1000
    eps_stop: Optional[float] = None
    seed: int = 0
    sets: list = field(default_factory=list)
    mapping: object = None
    anchor: object = None
    b: Optional[float] = None
    formula: Optional[str] = None
    lam: Optional[float] = None
    modulus: Optional[str] = None
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def digest(self) -> str:
        return digest(self.canonical())

    def canonical(self) -> dict:
        """The resolved configuration; this is what the digest covers."""
        sp = self.space
        out = {
            "space": space_to_json(sp),
            "scheme": self.scheme,
            "x0": sp.point_to_json(self.x0),
            "eps": [float(e) for e in self.eps],
            "n_max": self.n_max,
            "eps_stop": self.eps_stop,
            "seed": self.seed,
            "sets": [set_to_json(sp, s) for s in self.sets],
            "formula": self.formula,
        }
        if self.mapping is not None:
            out["mapping"] = mapping_to_json(sp, self.mapping)
        if self.anchor is not None:
            out["anchor"] = sp.point_to_json(self.anchor)
        for key in ("b", "lam", "modulus"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        return out


def _random_start(space, seed):
    import numpy as np

    return space.sample_point(np.random.default_rng(seed))


def parse_config(obj: dict, seed_override: Optional[int] = None) -> RunConfig:
    """Validate a run configuration. ``GEOFIX_SEED`` (or ``seed_override``) replaces the seed."""
    if not isinstance(obj, dict):
        raise ConstructionError("config must be a JSON object")
    try:
        space = parse_space(obj["space"])
        scheme = obj.get("scheme", "picard")
        if scheme not in DEFAULT_FORMULA:
            raise DomainError(f"unknown scheme {scheme!r}")
        seed = int(obj.get("seed", 0))
        env = os.environ.get("GEOFIX_SEED")
        if seed_override is not None:
            seed = int(seed_override)
        elif env not in (None, ""):
            seed = int(env)
        x0 = obj.get("x0", "random")
        x0 = _random_start(space, seed) if x0 == "random" else space.point_from_json(x0)
        eps = obj.get("eps", [0.1])
        eps = [float(e) for e in (eps if isinstance(eps, list) else [eps])]
        if not eps or any(not e > 0 for e in eps):
            raise DomainError("every eps must be positive")
        sets = [set_from_json(space, s) for s in obj.get("sets", [])]
        mapping = None
        if scheme == "alternating_projection":
            if len(sets) != 2:
                raise ConstructionError("alternating projections need exactly two sets")
        elif scheme == "parallel":
            if "mapping" in obj:
                mapping = mapping_from_json(space, obj["mapping"])
            else:
                mapping = Composite(
                    tuple(Projection(s) for s in sets),
                    tuple(obj["lambdas"]),
                    tuple(obj.get("weights", obj.get("alphas", ()))),
                )
            if not isinstance(mapping, Composite):
                raise ConstructionError("the parallel scheme needs a composite mapping")
            if not sets:
                sets = [p.set for p in mapping.retractions if isinstance(p, Projection)]
        else:
            if "mapping" not in obj:
                raise ConstructionError("a picard run needs a mapping")
            mapping = mapping_from_json(space, obj["mapping"])
        anchor = obj.get("anchor")
        anchor = None if anchor is None else space.point_from_json(anchor)
        lam = obj.get("lambda")
        if lam is None and isinstance(mapping, Averaged):
            lam = mapping.lam
        n_max = int(obj.get("n_max", 1000))
        eps_stop = obj.get("eps_stop")
        cfg = RunConfig(
            space=space,
            scheme=scheme,
            x0=x0,
            eps=eps,
            n_max=n_max,
            eps_stop=None if eps_stop is None else float(eps_stop),
            seed=seed,
            sets=sets,
            mapping=mapping,
            anchor=anchor,
            b=None if obj.get("b") is None else float(obj["b"]),
            formula=obj.get("formula", DEFAULT_FORMULA[scheme]),
            lam=None if lam is None else float(lam),
            modulus=obj.get("modulus"),
            raw=obj,
        )
    except KeyError as exc:
        raise ConstructionError(f"config is missing {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise ConstructionError(f"invalid config: {exc}") from None
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    return cfg


def load_config(path, seed_override=None) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConstructionError(f"{path}: {exc}") from None
    return parse_config(obj, seed_override)


# -- traces and reports ------------------------------------------------------------------


def _coords(space, x) -> list:
    if isinstance(x, TreePoint):
        return [x.edge, float(x.offset)]
    return [float(c) for c in x]


def trace_to_csv(trace, space) -> str:
    """Columns n, gap and the kept point x_n (blank when thinned)."""
    tree = isinstance(space, MetricTree)
    dim = 2 if tree else len(trace.points[0])
    names = ["edge", "offset"] if tree else [f"x{i}" for i in range(dim)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "gap", *names])
    kept = dict(zip(trace.indices, trace.points))
    for n in range(trace.n_steps + 1):
        gap = _float(trace.gaps[n]) if n < trace.n_steps else ""
        coords = [c if isinstance(c, str) else _float(c) for c in _coords(space, kept[n])] if n in kept else [""] * dim
        w.writerow([n, gap, *coords])
    return buf.getvalue()


def trace_to_json(trace, space, certificates=()) -> dict:
    return {
        "scheme": trace.scheme,
        "config_digest": trace.config_digest,
        "reached": trace.reached,
        "n_steps": trace.n_steps,
        "stride": trace.stride,
        "gaps": [float(g) for g in trace.gaps],
        "indices": list(trace.indices),
        "points": [space.point_to_json(p) for p in trace.points],
        "certificates": [c.to_json() for c in certificates],
    }
