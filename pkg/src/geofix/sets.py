"""Closed convex sets of the model spaces and their metric projections."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ConstructionError, DomainError, UnsupportedCapability
from .geometry import Euclidean, PoincareDisk, mobius, mobius_inv
from .trees import MetricTree, TreePoint


@dataclass(frozen=True)
class Ball:
    center: object
    radius: float

    def __post_init__(self):
        if not self.radius >= 0:
            raise ConstructionError(f"ball radius must be nonnegative, got {self.radius}")


@dataclass(frozen=True)
class HalfSpace:
    """``{x : <normal, x> <= offset}`` in a normed space."""

    normal: tuple
    offset: float

    def __post_init__(self):
        object.__setattr__(self, "normal", tuple(float(c) for c in self.normal))
        if not any(self.normal):
            raise ConstructionError("half-space normal must be nonzero")


@dataclass(frozen=True)
class GeodesicSegment:
    a: object
    b: object


@dataclass(frozen=True)
class Subtree:
    """Vertices of a connected subgraph; the set is those vertices plus the edges between them."""

    vertices: frozenset

    def __post_init__(self):
        object.__setattr__(self, "vertices", frozenset(str(v) for v in self.vertices))
        if not self.vertices:
            raise ConstructionError("subtree must contain at least one vertex")


@dataclass(frozen=True)
class ProjectionReport:
    projected: object
    dist_to_set: float
    iterations_used: int = 0


def validate_set(space, s):
    """Check that ``s`` belongs to ``space``; returns a normalized copy."""
    if isinstance(s, Ball):
        return Ball(space.check_point(s.center), float(s.radius))
    if isinstance(s, GeodesicSegment):
        return GeodesicSegment(space.check_point(s.a), space.check_point(s.b))
    if isinstance(s, HalfSpace):
        if not getattr(space, "normed", False):
            raise UnsupportedCapability(f"half-spaces need a normed space, not {space.spec()}")
        if len(s.normal) != space.dim:
            raise DomainError("half-space normal has the wrong dimension")
        return s
    if isinstance(s, Subtree):
        if not isinstance(space, MetricTree):
            raise UnsupportedCapability("subtrees exist only in metric trees")
        unknown = s.vertices - set(space.vertices)
        if unknown:
            raise ConstructionError(f"unknown subtree vertices {sorted(unknown)}")
        start = next(iter(sorted(s.vertices)))
        seen, stack = {start}, [start]
        while stack:
            v = stack.pop()
            for w, _ in space.adj[v]:
                if w in s.vertices and w not in seen:
                    seen.add(w)
                    stack.append(w)
        if seen != s.vertices:
            raise ConstructionError("subtree vertex set does not induce a connected subgraph")
        return s
    raise DomainError(f"unknown convex set {s!r}")


# -- projections ---------------------------------------------------------------


def _project_ball(space, s: Ball, x):
    d = space.distance(s.center, x)
    if d <= s.radius:
        return x, 0
    if s.radius == 0:
        return s.center, 0
    return space.geodesic(s.center, x, s.radius / d), 0


def _dual_direction(normal, p):
    """Unit vector v (in l_p) with <normal, v> = ||normal||_q."""
    n = np.asarray(normal)
    if p == 2:
        return n / np.linalg.norm(n)
    q = p / (p - 1)
    v = np.sign(n) * np.abs(n) ** (q - 1)
    return v / np.linalg.norm(v, ord=p)


def _project_halfspace(space, s: HalfSpace, x):
    n = np.asarray(s.normal)
    excess = float(n @ np.asarray(x)) - s.offset
    if excess <= 0:
        return x, 0
    p = space.p
    if p == 2:
        y = np.asarray(x) - excess / float(n @ n) * n
    else:
        q = p / (p - 1)
        dist = excess / np.linalg.norm(n, ord=q)
        y = np.asarray(x) - dist * _dual_direction(n, p)
    return tuple(float(c) for c in y), 0


def _foot_on_real_diameter(z: complex) -> float:
    """Closest point to z on the real diameter of the disk."""
    re = z.real
    if re == 0.0:
        return 0.0
    s = 1.0 + abs(z) ** 2
    return 2.0 * re / (s + math.sqrt(s * s - 4.0 * re * re))


def _project_segment(space, s: GeodesicSegment, x):
    a, b = s.a, s.b
    if isinstance(space, Euclidean):
        av, bv, xv = (np.asarray(v) for v in (a, b, x))
        ab = bv - av
        L2 = float(ab @ ab)
        if L2 == 0:
            return a, 0
        t = min(max(float((xv - av) @ ab) / L2, 0.0), 1.0)
        return space.geodesic(a, b, t), 0
    if isinstance(space, PoincareDisk):
        za = complex(*a)
        wb = mobius(za, complex(*b))
        if wb == 0:
            return a, 0
        rot = abs(wb) / wb
        # isometry sends a -> 0 and b -> |wb| on the positive real axis
        z = mobius(za, complex(*x)) * rot
        f = min(max(_foot_on_real_diameter(z), 0.0), abs(wb))
        if abs(z - f) <= 1e-12:
            # already on the segment: keep x itself so projection is exactly idempotent
            return tuple(x), 0
        w = mobius_inv(za, f / rot)
        return (w.real, w.imag), 0
    if isinstance(space, MetricTree):
        dab = space.distance(a, b)
        if dab == 0:
            return a, 0
        # gate point: the median of (x, a, b) lies on [a, b]
        t = (space.distance(a, x) + dab - space.distance(b, x)) / (2.0 * dab)
        return space.geodesic(a, b, min(max(t, 0.0), 1.0)), 0
    return _golden_segment(space, s, x)


def _golden_segment(space, s, x, xtol: float = 1e-10):
    res = minimize_scalar(
        lambda t: space.distance(x, space.geodesic(s.a, s.b, t)),
        bounds=(0.0, 1.0),
        method="bounded",
        options={"xatol": xtol},
    )
    best, t = res.fun, res.x
    for end in (0.0, 1.0):
        d = space.distance(x, space.geodesic(s.a, s.b, end))
        if d < best:
            best, t = d, end
    return space.geodesic(s.a, s.b, float(t)), int(res.nfev)


def _project_subtree(space: MetricTree, s: Subtree, x: TreePoint):
    e = space.edges[x.edge]
    if e.u in s.vertices and e.v in s.vertices:
        return x, 0
    v = space.vertex_of(x)
    if v is not None and v in s.vertices:
        return x, 0
    anchor = space.vertex_point(min(s.vertices))
    for eid, s0, s1 in space.route(x, anchor):
        w = space.vertex_of(TreePoint(eid, s1))
        if w is not None and w in s.vertices:
            return TreePoint(eid, s1), 0
    raise AssertionError("route to a subtree vertex never entered the subtree")


def project(space, s, x) -> ProjectionReport:
    """Metric projection of ``x`` onto the convex set ``s``."""
    if isinstance(s, HalfSpace) and not getattr(space, "normed", False):
        raise UnsupportedCapability(f"half-spaces need a normed space, not {space.spec()}")
    if isinstance(s, Ball):
        y, it = _project_ball(space, s, x)
    elif isinstance(s, HalfSpace):
        y, it = _project_halfspace(space, s, x)
    elif isinstance(s, GeodesicSegment):
        y, it = _project_segment(space, s, x)
    elif isinstance(s, Subtree):
        if not isinstance(space, MetricTree):
            raise UnsupportedCapability("subtrees exist only in metric trees")
        y, it = _project_subtree(space, s, x)
    else:
        raise DomainError(f"unknown convex set {s!r}")
    return ProjectionReport(y, space.distance(x, y), it)


def dist_to_set(space, s, x) -> float:
    """Closed form where available, else the distance to the projection."""
    if isinstance(s, Ball):
        return max(space.distance(s.center, x) - s.radius, 0.0)
    if isinstance(s, HalfSpace):
        n = np.asarray(s.normal)
        excess = float(n @ np.asarray(x)) - s.offset
        if excess <= 0:
            return 0.0
        p = space.p
        return excess / np.linalg.norm(n, ord=p / (p - 1))
    if isinstance(s, Subtree):
        e = space.edges[x.edge]
        if e.u in s.vertices and e.v in s.vertices:
            return 0.0
        return min(space.distance(x, space.vertex_point(v)) for v in s.vertices)
    return project(space, s, x).dist_to_set


def membership(space, s, x, tol: float | None = None) -> bool:
    tol = space.tol if tol is None else tol
    return dist_to_set(space, s, x) <= tol


# -- sampling points of a set ----------------------------------------------------


def sample_set(space, s, rng, n: int = 64) -> list:
    """``n`` points of ``s``; used to verify that projections minimize distance."""
    out = []
    for _ in range(n):
        if isinstance(s, Ball):
            if isinstance(space, PoincareDisk):
                out.append(space.sample_hyperbolic_ball(rng, s.center, s.radius))
            elif isinstance(space, MetricTree):
                p = space.sample_point(rng)
                d = space.distance(s.center, p)
                r = s.radius * rng.random()
                out.append(p if d <= r else space.geodesic(s.center, p, r / d))
            else:
                v = rng.standard_normal(space.dim)
                v *= s.radius * rng.random() / space.norm(v)
                out.append(tuple(c + float(w) for c, w in zip(s.center, v)))
        elif isinstance(s, HalfSpace):
            x = np.asarray(space.sample_point(rng, radius=3.0))
            n_ = np.asarray(s.normal)
            excess = float(n_ @ x) - s.offset
            if excess > 0:
                x = x - 2.0 * excess / float(n_ @ n_) * n_
            out.append(tuple(float(c) for c in x))
        elif isinstance(s, GeodesicSegment):
            out.append(space.geodesic(s.a, s.b, float(rng.random())))
        elif isinstance(s, Subtree):
            inner = [eid for eid, e in space.edges.items() if e.u in s.vertices and e.v in s.vertices]
            if inner:
                eid = inner[int(rng.integers(len(inner)))]
                out.append(TreePoint(eid, float(rng.random() * space.edges[eid].length)))
            else:
                out.append(space.vertex_point(next(iter(s.vertices))))
        else:
            raise DomainError(f"unknown convex set {s!r}")
    return out


__all__ = [
    "Ball",
    "HalfSpace",
    "GeodesicSegment",
    "Subtree",
    "ProjectionReport",
    "validate_set",
    "project",
    "membership",
    "dist_to_set",
    "sample_set",
]
