"""Geodesic model spaces: distance, convexity mapping W and modulus of uniform convexity.

Every space exposes the same small surface:

    space.distance(x, y)
    space.geodesic(x, y, t)      # W(x, y, t), the point at fraction t from x to y
    space.extend(x, y, length)   # continue the geodesic x -> y past y by `length`
    space.sample_point(rng)
    space.modulus                # Modulus or None

Vector-like spaces (Euclidean, Lp, the Poincare disk) use plain tuples of floats as
points. Metric trees live in :mod:`geofix.trees`.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional

import numpy as np

from .errors import DomainError, UnsupportedCapability

TOL_FLAT = 1e-9
TOL_DISK = 1e-6
# samplers never place disk points farther out than this
DISK_R_MAX = 0.999


@dataclass(frozen=True)
class Modulus:
    """A modulus of uniform convexity ``delta(r, eps)``.

    ``tilde`` is an optional companion with ``delta(r, eps) >= eps * tilde(r, eps)``
    that increases in ``eps``; it feeds the refined parallel-scheme rate.
    """

    fn: Callable[[Any, Any], Any]
    name: str
    monotone_in_r: bool = True
    tilde: Optional[Callable[[Any, Any], Any]] = None

    def __call__(self, r, eps):
        if not r > 0:
            raise DomainError(f"modulus radius must be positive, got {r}")
        if not 0 < eps <= 2:
            raise DomainError(f"modulus eps must lie in (0, 2], got {eps}")
        return self.fn(r, eps)


def cat0_modulus() -> Modulus:
    return Modulus(
        fn=lambda r, eps: eps * eps / 8,
        name="cat0",
        tilde=lambda r, eps: eps / 8,
    )


def _exact(x):
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def lp_modulus(p: float) -> Modulus:
    """Hanner-type lower bounds for the modulus of L_p, 1 < p < inf."""
    if not 1 < p < math.inf:
        raise DomainError(f"L_p modulus needs 1 < p < inf, got {p}")
    P = _exact(p)
    # integral exponents keep Fraction arithmetic exact
    e = int(p) if float(p).is_integer() else float(p)
    if p <= 2:
        return Modulus(
            fn=lambda r, eps: (P - 1) / 8 * eps * eps,
            name=f"lp:{p:g}",
            tilde=lambda r, eps: (P - 1) / 8 * eps,
        )
    return Modulus(
        fn=lambda r, eps: eps**e / (P * 2**e),
        name=f"lp:{p:g}",
        tilde=lambda r, eps: eps ** (e - 1) / (P * 2**e),
    )


def _as_vector(x, dim: int, kind: str) -> tuple:
    if isinstance(x, tuple) and type(x) is not tuple:
        # a NamedTuple such as TreePoint
        raise DomainError(f"{type(x).__name__} is not a point of {kind}")
    try:
        v = tuple(float(c) for c in x)
    except TypeError:
        if dim == 1 and isinstance(x, (int, float)):
            v = (float(x),)
        else:
            raise DomainError(f"cannot read {x!r} as a point of {kind}") from None
    if len(v) != dim:
        raise DomainError(f"expected {dim} coordinates for {kind}, got {len(v)}")
    return v


class GeodesicSpace:
    """Shared helpers. Subclasses provide distance/geodesic/extend/sample_point."""

    kind: str = "abstract"
    tol: float = TOL_FLAT
    modulus: Optional[Modulus] = None
    cat0: bool = False
    normed: bool = False

    def check_point(self, x):
        raise NotImplementedError

    def point_to_json(self, x) -> dict:
        return {"kind": "vec", "coords": [float(c) for c in x]}

    def point_from_json(self, obj):
        if isinstance(obj, dict):
            obj = obj.get("coords")
        return self.check_point(obj)

    def same_point(self, x, y) -> bool:
        return self.distance(x, y) <= self.tol


@dataclass(frozen=True)
class Euclidean(GeodesicSpace):
    dim: int
    kind: str = field(default="euclidean", init=False)
    tol: float = field(default=TOL_FLAT, init=False)
    cat0: bool = field(default=True, init=False)
    normed: bool = field(default=True, init=False)

    @property
    def modulus(self) -> Modulus:
        return cat0_modulus()

    @property
    def p(self) -> float:
        return 2.0

    def spec(self) -> str:
        return f"euclidean:{self.dim}"

    def check_point(self, x):
        return _as_vector(x, self.dim, self.spec())

    def distance(self, x, y) -> float:
        return math.dist(x, y)

    def norm(self, v) -> float:
        return math.hypot(*v)

    def geodesic(self, x, y, t):
        if t == 0:
            return x
        if t == 1:
            return y
        return tuple(a + t * (b - a) for a, b in zip(x, y))

    def extend(self, x, y, length):
        d = self.distance(x, y)
        s = (d + length) / d
        return tuple(a + s * (b - a) for a, b in zip(x, y))

    def sample_point(self, rng, radius: float = 1.0, center=None):
        return _uniform_ball(rng, self.dim, radius, center)

    def batch_distance(self, points: np.ndarray, x) -> np.ndarray:
        return np.linalg.norm(points - np.asarray(x), axis=-1)


@dataclass(frozen=True)
class Lp(GeodesicSpace):
    """Finite-dimensional l_p with linear interpolation as W."""

    dim: int
    p: float
    kind: str = field(default="lp", init=False)
    tol: float = field(default=TOL_FLAT, init=False)
    normed: bool = field(default=True, init=False)

    def __post_init__(self):
        if not 1 < self.p < math.inf:
            raise DomainError(f"Lp needs 1 < p < inf, got {self.p}")
        if self.dim < 1:
            raise DomainError("Lp dimension must be positive")

    @property
    def cat0(self) -> bool:
        return self.p == 2

    @property
    def modulus(self) -> Modulus:
        return lp_modulus(self.p)

    def spec(self) -> str:
        return f"lp:{self.p:g}:{self.dim}"

    def check_point(self, x):
        return _as_vector(x, self.dim, self.spec())

    def norm(self, v) -> float:
        p = self.p
        m = max((abs(c) for c in v), default=0.0)
        if m == 0:
            return 0.0
        # scaled to avoid overflow for large p
        return m * sum((abs(c) / m) ** p for c in v) ** (1.0 / p)

    def distance(self, x, y) -> float:
        return self.norm([a - b for a, b in zip(x, y)])

    def geodesic(self, x, y, t):
        if t == 0:
            return x
        if t == 1:
            return y
        return tuple(a + t * (b - a) for a, b in zip(x, y))

    def extend(self, x, y, length):
        d = self.distance(x, y)
        s = (d + length) / d
        return tuple(a + s * (b - a) for a, b in zip(x, y))

    def sample_point(self, rng, radius: float = 1.0, center=None):
        return _uniform_ball(rng, self.dim, radius, center)

    def batch_distance(self, points: np.ndarray, x) -> np.ndarray:
        diff = np.abs(points - np.asarray(x))
        m = diff.max(axis=-1)
        safe = np.where(m > 0, m, 1.0)
        return m * ((diff / safe[:, None]) ** self.p).sum(axis=-1) ** (1.0 / self.p)


def _uniform_ball(rng, dim, radius, center):
    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    v *= radius * rng.random() ** (1.0 / dim)
    if center is not None:
        v = v + np.asarray(center)
    return tuple(float(c) for c in v)


# -- Poincare disk -------------------------------------------------------------


def mobius(a: complex, z: complex) -> complex:
    """Disk isometry sending ``a`` to 0."""
    return (z - a) / (1 - a.conjugate() * z)


def mobius_inv(a: complex, w: complex) -> complex:
    return (w + a) / (1 + a.conjugate() * w)


def _one_minus_sq(z: complex) -> float:
    r = abs(z)
    return (1.0 - r) * (1.0 + r)


@dataclass(frozen=True)
class PoincareDisk(GeodesicSpace):
    """The Poincare disk model of the hyperbolic plane (curvature -1)."""

    kind: str = field(default="disk", init=False)
    tol: float = field(default=TOL_DISK, init=False)
    cat0: bool = field(default=True, init=False)
    dim: int = field(default=2, init=False)

    @property
    def modulus(self) -> Modulus:
        return cat0_modulus()

    def spec(self) -> str:
        return "disk"

    def check_point(self, x):
        v = _as_vector(x, 2, "disk")
        if v[0] * v[0] + v[1] * v[1] >= 1.0:
            raise DomainError(f"{v} lies outside the open unit disk")
        return v

    def point_to_json(self, x) -> dict:
        return {"kind": "disk", "coords": [float(x[0]), float(x[1])]}

    def distance(self, x, y) -> float:
        z = complex(x[0], x[1])
        w = complex(y[0], y[1])
        num = abs(z - w)
        if num == 0.0:
            return 0.0
        # |1 - z conj(w)|^2 = |z - w|^2 + (1 - |z|^2)(1 - |w|^2), stable near the boundary
        den = math.sqrt(num * num + _one_minus_sq(z) * _one_minus_sq(w))
        return 2.0 * math.atanh(num / den)

    def _along(self, x, y, s_of_d):
        z = complex(x[0], x[1])
        u = mobius(z, complex(y[0], y[1]))
        rho = abs(u)
        if rho == 0.0:
            return x
        d = 2.0 * math.atanh(min(rho, 1.0 - 1e-17))
        v = math.tanh(s_of_d(d) / 2.0) * (u / rho)
        w = mobius_inv(z, v)
        return (w.real, w.imag)

    def geodesic(self, x, y, t):
        if t == 0:
            return x
        if t == 1:
            return y
        return self._along(x, y, lambda d: t * d)

    def extend(self, x, y, length):
        return self._along(x, y, lambda d: d + length)

    def sample_point(self, rng, radius: float = 0.9, center=None):
        if radius > DISK_R_MAX:
            raise DomainError(f"disk sampler radius capped at {DISK_R_MAX}")
        rho = radius * math.sqrt(rng.random())
        w = cmath.rect(rho, 2 * math.pi * rng.random())
        if center is not None:
            w = mobius_inv(complex(center[0], center[1]), w)
        return (w.real, w.imag)

    def sample_hyperbolic_ball(self, rng, center, r: float):
        """Point within hyperbolic distance ``r`` of ``center`` (not area-uniform)."""
        rho = math.tanh(r * rng.random() / 2.0)
        w = mobius_inv(complex(center[0], center[1]), cmath.rect(rho, 2 * math.pi * rng.random()))
        return (w.real, w.imag)

    def batch_distance(self, points: np.ndarray, x) -> np.ndarray:
        z = points[:, 0] + 1j * points[:, 1]
        w = complex(x[0], x[1])
        num = np.abs(z - w)
        az = np.abs(z)
        den = np.sqrt(num * num + (1 - az) * (1 + az) * _one_minus_sq(w))
        return 2.0 * np.arctanh(num / den)


# -- module-level operations -------------------------------------------------------


def distance(space, x, y) -> float:
    """Distance between two points of ``space``; validates both points."""
    return space.distance(space.check_point(x), space.check_point(y))


def convex_combination(space, x, y, t: float):
    """W(x, y, t): the point on the geodesic from x to y at distance t*d(x, y) from x."""
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    return space.geodesic(space.check_point(x), space.check_point(y), t)


def modulus_eval(space, r: float, eps: float):
    if space.modulus is None:
        raise UnsupportedCapability(f"{space.spec()} has no modulus of uniform convexity")
    return space.modulus(r, eps)


def parse_space(spec):
    """Build a space from ``euclidean:D``, ``lp:P:D``, ``disk``, ``tree:tripod``,
    ``tree:<path.json>`` or the equivalent JSON object."""
    from . import trees

    if isinstance(spec, dict):
        kind = spec.get("kind")
        if kind == "euclidean":
            return Euclidean(int(spec["dim"]))
        if kind == "lp":
            return Lp(int(spec["dim"]), float(spec["p"]))
        if kind == "disk":
            return PoincareDisk()
        if kind == "tree":
            if "file" in spec:
                return trees.load_tree(spec["file"])
            if spec.get("name") == "tripod":
                return trees.tripod()
            return trees.MetricTree.from_json(spec)
        raise DomainError(f"unknown space kind {kind!r}")
    parts = str(spec).split(":")
    head = parts[0].lower()
    try:
        if head == "euclidean" and len(parts) == 2:
            return Euclidean(int(parts[1]))
        if head == "lp" and len(parts) == 3:
            return Lp(int(parts[2]), float(parts[1]))
        if head == "disk" and len(parts) == 1:
            return PoincareDisk()
        if head == "tree" and len(parts) >= 2:
            rest = ":".join(parts[1:])
            return trees.tripod() if rest == "tripod" else trees.load_tree(rest)
    except ValueError as exc:
        raise DomainError(f"bad space spec {spec!r}: {exc}") from None
    raise DomainError(f"bad space spec {spec!r}")


def space_to_json(space) -> dict:
    if isinstance(space, Euclidean):
        return {"kind": "euclidean", "dim": space.dim}
    if isinstance(space, Lp):
        return {"kind": "lp", "dim": space.dim, "p": space.p}
    if isinstance(space, PoincareDisk):
        return {"kind": "disk"}
    return space.to_json()
