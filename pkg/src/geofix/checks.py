"""Sampling verifiers for metric axioms and for the inequalities orbits must obey.

Every checker is deterministic given ``(seed, n)`` and reports the largest
violation it saw, not just a verdict. Tolerances are scale-relative:
``tol * max(1, scale)`` where ``scale`` is the largest distance in the sample,
squared for the quadratic inequalities (CN, Ptolemy, projection descent).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, UnsupportedCapability
from .mappings import Averaged, apply

TOL_BETWEEN = 1e-8
MIN_SEPARATION = 1e-3
T_GRID = (0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0)


@dataclass
class CheckReport:
    property: str
    samples_tested: int
    max_violation: float
    witness: Optional[tuple]
    passed: bool
    tolerance: float

    def to_json(self, space=None) -> dict:
        witness = None
        if self.witness is not None:
            witness = [_jsonable(space, w) for w in self.witness]
        return {
            "property": self.property,
            "samples_tested": self.samples_tested,
            "max_violation": self.max_violation,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "witness": witness,
        }

    def verdict(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.property}: max_violation={self.max_violation:.3e} over {self.samples_tested} samples"


def _jsonable(space, w):
    if isinstance(w, (int, float)):
        return float(w)
    if space is not None:
        try:
            return space.point_to_json(w)
        except (TypeError, AttributeError, IndexError):
            pass
    return repr(w)


class _Worst:
    """Tracks the sample whose violation exceeds its own tolerance by the most."""

    def __init__(self, name, base_tol):
        self.name = name
        self.base_tol = base_tol
        self.excess = -math.inf
        self.violation = -math.inf
        self.witness = None
        self.tolerance = base_tol
        self.count = 0

    def add(self, violation, scale, witness, power=1):
        self.count += 1
        tol = self.base_tol * max(1.0, scale) ** power
        excess = violation - tol
        if excess > self.excess:
            self.excess, self.violation, self.witness, self.tolerance = excess, violation, witness, tol

    def report(self) -> CheckReport:
        if self.count == 0:
            return CheckReport(self.name, 0, 0.0, None, True, self.base_tol)
        return CheckReport(self.name, self.count, self.violation, self.witness, self.excess <= 0, self.tolerance)


def _sampler(space, sampler):
    return sampler or space.sample_point


# -- W-hyperbolic axioms and convexity -----------------------------------------------


def check_w1(space, sampler=None, n=10_000, seed=0, name="W1") -> CheckReport:
    """d(z, W(x,y,t)) <= (1-t) d(z,x) + t d(z,y)."""
    rng, draw, acc = np.random.default_rng(seed), _sampler(space, sampler), _Worst(name, space.tol)
    d, W = space.distance, space.geodesic
    for _ in range(n):
        x, y, z = draw(rng), draw(rng), draw(rng)
        t = float(rng.random())
        dzx, dzy = d(z, x), d(z, y)
        v = d(z, W(x, y, t)) - ((1 - t) * dzx + t * dzy)
        acc.add(v, max(dzx, dzy, d(x, y)), (x, y, z, t))
    return acc.report()


def check_convex_metric(space, sampler=None, n=10_000, seed=0) -> CheckReport:
    """d(x, W(y,z,t)) <= (1-t) d(x,y) + t d(x,z)."""
    return check_w1(space, sampler, n, seed, name="convex-metric")


def check_w2(space, sampler=None, n=10_000, seed=0) -> CheckReport:
    """d(W(x,y,t), W(x,y,t')) = |t - t'| d(x,y)."""
    rng, draw, acc = np.random.default_rng(seed), _sampler(space, sampler), _Worst("W2", space.tol)
    for _ in range(n):
        x, y = draw(rng), draw(rng)
        t, s = float(rng.random()), float(rng.random())
        dxy = space.distance(x, y)
        v = abs(space.distance(space.geodesic(x, y, t), space.geodesic(x, y, s)) - abs(t - s) * dxy)
        acc.add(v, dxy, (x, y, t, s))
    return acc.report()


def check_w3(space, sampler=None, n=10_000, seed=0) -> CheckReport:
    """W(x,y,t) = W(y,x,1-t)."""
    rng, draw, acc = np.random.default_rng(seed), _sampler(space, sampler), _Worst("W3", space.tol)
    for _ in range(n):
        x, y = draw(rng), draw(rng)
        t = float(rng.random())
        v = space.distance(space.geodesic(x, y, t), space.geodesic(y, x, 1 - t))
        acc.add(v, space.distance(x, y), (x, y, t))
    return acc.report()


def check_w4(space, sampler=None, n=10_000, seed=0) -> CheckReport:
    """d(W(x,z,t), W(y,w,t)) <= (1-t) d(x,y) + t d(z,w)."""
    rng, draw, acc = np.random.default_rng(seed), _sampler(space, sampler), _Worst("W4", space.tol)
    d, W = space.distance, space.geodesic
    for _ in range(n):
        x, y, z, w = draw(rng), draw(rng), draw(rng), draw(rng)
        t = float(rng.random())
        dxy, dzw = d(x, y), d(z, w)
        v = d(W(x, z, t), W(y, w, t)) - ((1 - t) * dxy + t * dzw)
        acc.add(v, max(dxy, dzw, d(x, z), d(y, w)), (x, y, z, w, t))
    return acc.report()


def check_busemann(space, sampler=None, n=10_000, seed=0, t_grid=T_GRID) -> CheckReport:
    """Distance between two geodesics, at a common parameter, is convex: checked on
    a fixed t-grid plus one random t per quadruple."""
    rng, draw, acc = np.random.default_rng(seed), _sampler(space, sampler), _Worst("busemann", space.tol)
    d, W = space.distance, space.geodesic
    for _ in range(n):
        a0, a1, b0, b1 = draw(rng), draw(rng), draw(rng), draw(rng)
        d0, d1 = d(a0, b0), d(a1, b1)
        scale = max(d0, d1, d(a0, a1), d(b0, b1))
        worst, wt = -math.inf, None
        for t in (*t_grid, float(rng.random())):
            v = d(W(a0, a1, t), W(b0, b1, t)) - ((1 - t) * d0 + t * d1)
            if v > worst:
                worst, wt = v, t
        acc.add(worst, scale, (a0, a1, b0, b1, wt))
    return acc.report()


def check_geodesic_parameterization(space, sampler=None, n=10_000, seed=0) -> CheckReport:
    """d(x, W(x,y,t)) = t d(x,y) and d(y, W(x,y,t)) = (1-t) d(x,y)."""
    rng, draw, acc = np.random.default_rng(seed), _sampler(space, sampler), _Worst("geodesic", space.tol)
    for _ in range(n):
        x, y = draw(rng), draw(rng)
        t = float(rng.random())
        m = space.geodesic(x, y, t)
        dxy = space.distance(x, y)
        v = max(abs(space.distance(x, m) - t * dxy), abs(space.distance(y, m) - (1 - t) * dxy))
        acc.add(v, dxy, (x, y, t))
    return acc.report()


def cn_violation(space, x, y1, y2, t) -> float:
    m = space.geodesic(y1, y2, t)
    d = space.distance
    return d(x, m) ** 2 - ((1 - t) * d(x, y1) ** 2 + t * d(x, y2) ** 2 - t * (1 - t) * d(y1, y2) ** 2)


def check_cn_inequality(space, sampler=None, n=10_000, seed=0) -> CheckReport:
    """d(x,m)^2 <= (1-t) d(x,y1)^2 + t d(x,y2)^2 - t(1-t) d(y1,y2)^2, m = W(y1,y2,t)."""
    rng, draw, acc = np.random.default_rng(seed), _sampler(space, sampler), _Worst("cn", space.tol)
    d = space.distance
    for _ in range(n):
        x, y1, y2 = draw(rng), draw(rng), draw(rng)
        t = float(rng.random())
        scale = max(d(x, y1), d(x, y2), d(y1, y2))
        acc.add(cn_violation(space, x, y1, y2, t), scale, (x, y1, y2, t), power=2)
    return acc.report()


def ptolemy_violation(d, x, y, z, w) -> float:
    return d(x, z) * d(y, w) - (d(x, y) * d(z, w) + d(x, w) * d(y, z))


def check_ptolemy(space, sampler=None, n=10_000, seed=0) -> CheckReport:
    """d(x,z) d(y,w) <= d(x,y) d(z,w) + d(x,w) d(y,z)."""
    rng, draw, acc = np.random.default_rng(seed), _sampler(space, sampler), _Worst("ptolemy", space.tol)
    d = space.distance
    for _ in range(n):
        q = (draw(rng), draw(rng), draw(rng), draw(rng))
        scale = max(d(q[i], q[j]) for i in range(4) for j in range(i + 1, 4))
        acc.add(ptolemy_violation(d, *q), scale, q, power=2)
    return acc.report()


# -- betweenness -----------------------------------------------------------------------


def between_slack(d, x, y, z) -> float:
    """d(x,y) + d(y,z) - d(x,z); zero when y lies on a geodesic from x to z."""
    return d(x, y) + d(y, z) - d(x, z)


def _extend(space, x, y, length, rng):
    try:
        return space.extend(x, y, length, rng=rng)
    except TypeError:
        return space.extend(x, y, length)


def _separated(d, pts, sep) -> bool:
    return all(d(pts[i], pts[j]) >= sep for i in range(len(pts)) for j in range(i + 1, len(pts)))


def _interior_t(rng) -> float:
    return float(rng.uniform(0.05, 0.95))


def check_betweenness_property(space, sampler=None, n=10_000, seed=0, max_attempts=None) -> CheckReport:
    """If y lies between x and z and z between y and w, then y and z lie between x and w.

    Configurations are built, not rejection-sampled: y = W(x, z, s) and w continues
    the geodesic from y through z.
    """
    rng, draw, acc = np.random.default_rng(seed), _sampler(space, sampler), _Worst("betweenness", TOL_BETWEEN)
    d = space.distance
    attempts = 0
    max_attempts = max_attempts or 20 * n
    while acc.count < n and attempts < max_attempts:
        attempts += 1
        x, z = draw(rng), draw(rng)
        dxz = d(x, z)
        if dxz < 3 * MIN_SEPARATION:
            continue
        y = space.geodesic(x, z, _interior_t(rng))
        w = _extend(space, y, z, float(rng.uniform(0.05, 1.0)) * max(dxz, 0.1), rng)
        pts = (x, y, z, w)
        scale = max(dxz, d(y, w), d(x, w))
        if not _separated(d, pts, MIN_SEPARATION * max(1.0, scale)):
            continue
        v = max(abs(between_slack(d, x, y, w)), abs(between_slack(d, x, z, w)))
        acc.add(v, scale, pts)
    return acc.report()


def weak_betweenness_holds(d, x, y, z, w, tol) -> bool:
    """The universal equivalence: [y in (x,z) and z in (x,w)] iff [y in (x,w) and z in (y,w)]."""
    lhs = abs(between_slack(d, x, y, z)) <= tol and abs(between_slack(d, x, z, w)) <= tol
    rhs = abs(between_slack(d, x, y, w)) <= tol and abs(between_slack(d, y, z, w)) <= tol
    return lhs == rhs


def check_weak_betweenness(space, sampler=None, n=10_000, seed=0, max_attempts=None) -> CheckReport:
    """Both directions of the weak betweenness equivalence on constructed configurations."""
    rng, draw, acc = np.random.default_rng(seed), _sampler(space, sampler), _Worst("weak-betweenness", TOL_BETWEEN)
    d = space.distance
    attempts = 0
    max_attempts = max_attempts or 20 * n
    while acc.count < n and attempts < max_attempts:
        attempts += 1
        a, b = draw(rng), draw(rng)
        dab = d(a, b)
        if dab < 3 * MIN_SEPARATION:
            continue
        if acc.count % 2 == 0:
            # forward: y in (x,z), z in (x,w)  =>  y in (x,w), z in (y,w)
            x, z = a, b
            y = space.geodesic(x, z, _interior_t(rng))
            w = _extend(space, x, z, float(rng.uniform(0.05, 1.0)) * max(dab, 0.1), rng)
            pts = (x, y, z, w)
            scale = max(dab, d(x, w))
            v = max(abs(between_slack(d, x, y, w)), abs(between_slack(d, y, z, w)))
        else:
            # backward: y in (x,w), z in (y,w)  =>  y in (x,z), z in (x,w)
            x, w = a, b
            y = space.geodesic(x, w, _interior_t(rng))
            z = space.geodesic(y, w, _interior_t(rng))
            pts = (x, y, z, w)
            scale = dab
            v = max(abs(between_slack(d, x, y, z)), abs(between_slack(d, x, z, w)))
        if not _separated(d, pts, MIN_SEPARATION * max(1.0, scale)):
            continue
        acc.add(v, scale, pts)
    return acc.report()


# -- uniform convexity -----------------------------------------------------------------


def check_uniform_convexity(space, sampler=None, n=10_000, seed=0, modulus=None, eps_min=0.01) -> CheckReport:
    """d(W(x,y,1/2), a) <= (1 - delta(r, eps)) r whenever d(x,a), d(y,a) <= r and d(x,y) >= eps r.

    For each triple, r is the larger of d(x,a), d(y,a) and eps the largest value the
    hypothesis allows, d(x,y)/r (capped at 2), which makes the check as strict as possible.
    """
    modulus = modulus or space.modulus
    if modulus is None:
        raise UnsupportedCapability(f"{space.spec()} has no modulus of uniform convexity")
    rng, draw, acc = np.random.default_rng(seed), _sampler(space, sampler), _Worst("uniform-convexity", space.tol)
    d = space.distance
    for _ in range(n):
        a, x, y = draw(rng), draw(rng), draw(rng)
        dax, day = d(a, x), d(a, y)
        r = max(dax, day)
        if r == 0:
            continue
        # push the nearer point out to the sphere when the geodesic allows it
        if rng.random() < 0.5:
            if dax < day and dax > 0:
                x = _extend(space, a, x, r - dax, rng)
            elif day < dax and day > 0:
                y = _extend(space, a, y, r - day, rng)
            dax, day = d(a, x), d(a, y)
            r = max(dax, day)
        eps = min(2.0, d(x, y) / r)
        if eps < eps_min:
            continue
        delta = float(modulus(r, eps))
        v = d(space.geodesic(x, y, 0.5), a) - (1 - delta) * r
        acc.add(v, r, (a, x, y, r, eps))
    return acc.report()


# -- dispatcher ------------------------------------------------------------------------

PROPERTIES: dict[str, Callable] = {
    "w1": check_w1,
    "w2": check_w2,
    "w3": check_w3,
    "w4": check_w4,
    "convex-metric": check_convex_metric,
    "busemann": check_busemann,
    "geodesic": check_geodesic_parameterization,
    "cn": check_cn_inequality,
    "ptolemy": check_ptolemy,
    "betweenness": check_betweenness_property,
    "weak-betweenness": check_weak_betweenness,
    "uniform-convexity": check_uniform_convexity,
}

GROUPS = {
    "w-axioms": ("w1", "w2", "w3", "w4"),
    "all": tuple(PROPERTIES),
}


def expand_properties(names) -> list[str]:
    out = []
    for name in names:
        name = name.strip().lower()
        if not name:
            continue
        if name in GROUPS:
            out.extend(GROUPS[name])
        elif name in PROPERTIES:
            out.append(name)
        else:
            raise DomainError(f"unknown property {name!r}")
    return list(dict.fromkeys(out))


def run_checks(space, names, n=10_000, seed=0) -> list[CheckReport]:
    return [PROPERTIES[p](space, n=n, seed=seed) for p in expand_properties(names)]


# -- inequalities along orbits -------------------------------------------------------------


def check_gap_monotone(trace, tol=None, start=None) -> CheckReport:
    """gaps[n+1] <= gaps[n] for n >= start.

    For alternating projections the default start is 1: the comparison needs x_n
    to lie in the set that x_{n+2} is projected onto, which x_0 need not.
    """
    tol = trace.space.tol if tol is None else tol
    if start is None:
        start = 1 if trace.scheme == "alternating_projection" else 0
    acc = _Worst("gap-monotone", tol)
    for n in range(start, len(trace.gaps) - 1):
        g0, g1 = trace.gaps[n], trace.gaps[n + 1]
        acc.add(g1 - g0, g0, (n,))
    return acc.report()


def check_fejer(space, trace, p) -> CheckReport:
    """d(x_{n+1}, p) <= d(x_n, p) for a common point p of the sets."""
    acc = _Worst("fejer", space.tol)
    for n, x, y in trace.consecutive():
        dx = space.distance(x, p)
        acc.add(space.distance(y, p) - dx, dx, (n,))
    return acc.report()


def check_projection_descent(space, trace, p) -> CheckReport:
    """d(x_n, x_{n+1})^2 <= d(x_n, p)^2 - d(x_{n+1}, p)^2 on projection steps."""
    acc = _Worst("projection-descent", space.tol)
    for n, x, y in trace.consecutive():
        dx, dy = space.distance(x, p), space.distance(y, p)
        acc.add(trace.gaps[n] ** 2 - (dx * dx - dy * dy), dx, (n,), power=2)
    return acc.report()


def firm_orbit_cap(lam: float, limit: float = 1e15) -> int:
    """Largest n with ((1 + lam) / lam)^n <= limit."""
    return int(math.floor(math.log(limit) / math.log((1 + lam) / lam)))


def check_firm_orbit(space, trace, lam: float, start: int = 1, max_n=None) -> CheckReport:
    """n g_i <= d(x_i, x_{i+n}) + n (1 + ((1+lam)/lam)^n) (g_i - g_{i+n}) for i, n >= 1."""
    cap = firm_orbit_cap(lam)
    if max_n is not None:
        cap = min(cap, max_n)
    ratio = (1 + lam) / lam
    acc = _Worst("firm-orbit", space.tol)
    g = trace.gaps
    for i in range(max(start, 1), len(g)):
        if not trace.has_point(i):
            continue
        xi = trace.point(i)
        for n in range(1, cap + 1):
            if i + n >= len(g):
                break
            if not trace.has_point(i + n):
                continue
            dist = space.distance(xi, trace.point(i + n))
            rhs = dist + n * (1 + ratio**n) * (g[i] - g[i + n])
            acc.add(n * g[i] - rhs, n * g[i], (i, n))
    return acc.report()


def check_averaged_inequality(space, m: Averaged, pairs) -> CheckReport:
    """d(Tx,Ty) <= (1-l) d(Tx,y) + l(1-l) d(x,Ty) + (1-l)^2 d(y,Ty) + l^2 d(x,y) for T = m."""
    if not isinstance(m, Averaged):
        raise DomainError("the averaged-mapping inequality needs an Averaged mapping")
    lam = m.lam
    d = space.distance
    acc = _Worst("averaged-inequality", space.tol)
    for x, y in pairs:
        Tx, Ty = apply(space, m, x), apply(space, m, y)
        rhs = (1 - lam) * d(Tx, y) + lam * (1 - lam) * d(x, Ty) + (1 - lam) ** 2 * d(y, Ty) + lam**2 * d(x, y)
        acc.add(d(Tx, Ty) - rhs, max(d(x, y), d(Tx, y), d(x, Ty)), (x, y))
    return acc.report()


def check_descent(space, m, points, name="descent") -> CheckReport:
    """d(T^2 x, T x) <= d(T x, x)."""
    acc = _Worst(name, space.tol)
    for x in points:
        Tx = apply(space, m, x)
        TTx = apply(space, m, Tx)
        dx = space.distance(Tx, x)
        acc.add(space.distance(TTx, Tx) - dx, dx, (x,))
    return acc.report()
