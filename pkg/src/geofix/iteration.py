"""Picard, alternating-projection and parallel orbits plus asymptotic diagnostics."""
from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, NumericFailure
from .mappings import Composite, apply
from .sets import project
from .trees import MetricTree, TreePoint

DEFAULT_POINT_CAP = 10_000

SCHEMES = ("picard", "alternating_projection", "parallel")


@dataclass
class OrbitTrace:
    """A finite orbit. ``gaps[n] = d(x_n, x_{n+1})`` is stored in full; points are
    thinned to every k-th one once more than ``cap`` have been recorded."""

    points: list
    indices: list
    gaps: list
    scheme: str
    reached: bool
    config_digest: str = ""
    stride: int = 1
    space: object = field(default=None, repr=False, compare=False)

    @property
    def n_steps(self) -> int:
        return len(self.gaps)

    @property
    def last(self):
        return self.points[-1]

    def point(self, n: int):
        """x_n if it was kept, else KeyError."""
        i = _index_lookup(self.indices, n)
        if i is None:
            raise KeyError(n)
        return self.points[i]

    def has_point(self, n: int) -> bool:
        return _index_lookup(self.indices, n) is not None

    def consecutive(self):
        """(n, x_n, x_{n+1}) for all kept consecutive pairs."""
        for i in range(len(self.points) - 1):
            if self.indices[i + 1] == self.indices[i] + 1:
                yield self.indices[i], self.points[i], self.points[i + 1]

    def tail(self, fraction: float = 0.25) -> list:
        """Last ``fraction`` of the kept points (the finite stand-in for a limsup)."""
        k = max(1, math.ceil(len(self.points) * fraction))
        return self.points[-k:]


def _index_lookup(indices, n):
    i = bisect.bisect_left(indices, n)
    if i < len(indices) and indices[i] == n:
        return i
    return None


def _finite(x) -> bool:
    if isinstance(x, TreePoint):
        return math.isfinite(x.offset)
    return all(math.isfinite(c) for c in x)


def _run(space, x0, step: Callable, n_max: int, eps_stop: float, scheme: str, cap: int, digest: str):
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    if eps_stop < 0:
        raise DomainError("eps_stop must be nonnegative")
    points, indices, gaps = [x0], [0], []
    stride, reached, x = 1, False, x0
    for n in range(n_max):
        y = step(n, x)
        if not _finite(y):
            raise NumericFailure(n + 1)
        g = space.distance(x, y)
        if not math.isfinite(g):
            raise NumericFailure(n + 1, "non-finite gap")
        gaps.append(g)
        x = y
        if (n + 1) % stride == 0:
            points.append(y)
            indices.append(n + 1)
            if len(points) > cap:
                points, indices = points[::2], indices[::2]
                stride *= 2
        if g <= eps_stop:
            reached = True
            break
    if indices[-1] != len(gaps):
        points.append(x)
        indices.append(len(gaps))
    return OrbitTrace(points, indices, gaps, scheme, reached, digest, stride, space)


def picard_orbit(
    space, m, x0, n_max: int, eps_stop: float = 0.0, *, cap: int = DEFAULT_POINT_CAP, digest: str = "",
    scheme: str = "picard",
) -> OrbitTrace:
    """Iterate x -> m(x) until a gap is <= eps_stop or n_max steps were taken."""
    return _run(space, x0, lambda n, x: apply(space, m, x), n_max, eps_stop, scheme, cap, digest)


def parallel_orbit(space, composite: Composite, x0, n_max: int, eps_stop: float = 0.0, **kw) -> OrbitTrace:
    if not isinstance(composite, Composite):
        raise DomainError("the parallel scheme iterates a Composite mapping")
    return picard_orbit(space, composite, x0, n_max, eps_stop, scheme="parallel", **kw)


def alternating_projections(
    space, A, B, x0, n_max: int, eps_stop: float = 0.0, *, cap: int = DEFAULT_POINT_CAP, digest: str = ""
) -> OrbitTrace:
    """x_{2n-1} = P_A x_{2n-2}, x_{2n} = P_B x_{2n-1}; ``reached`` is False when the
    gaps never dropped to eps_stop (as happens for disjoint sets)."""

    def step(n, x):
        return project(space, A if n % 2 == 0 else B, x).projected

    return _run(space, x0, step, n_max, eps_stop, "alternating_projection", cap, digest)


def regularity_index(trace: OrbitTrace, eps: float) -> Optional[int]:
    """Least n with gaps[n] <= eps, or None ("not reached")."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    for n, g in enumerate(trace.gaps):
        if g <= eps:
            return n
    return None


def minimal_displacement_estimate(trace: OrbitTrace) -> float:
    """Last recorded gap: a monotone upper estimate of the minimal displacement."""
    if not trace.gaps:
        raise DomainError("trace has no steps")
    return trace.gaps[-1]


# -- asymptotic center -------------------------------------------------------------------


@dataclass(frozen=True)
class GridSearch:
    """Axis-aligned grid ``lower + k * step`` inside ``[lower, upper]``."""

    lower: tuple
    upper: tuple
    step: float
    max_candidates: int = 5_000_000

    @classmethod
    def around(cls, points, margin: float, step: float) -> "GridSearch":
        arr = np.asarray(points, dtype=float)
        return cls(tuple(arr.min(axis=0) - margin), tuple(arr.max(axis=0) + margin), step)

    def candidates(self) -> np.ndarray:
        axes = []
        for lo, hi in zip(self.lower, self.upper):
            k = int(math.floor((hi - lo) / self.step + 1e-9))
            axes.append(lo + self.step * np.arange(k + 1))
        total = math.prod(len(a) for a in axes)
        if total > self.max_candidates:
            raise DomainError(f"grid would have {total} candidates")
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


@dataclass(frozen=True)
class TreeSearch:
    """All vertices plus ``per_edge`` evenly spaced interior points of every edge."""

    per_edge: int = 100

    def candidates(self, tree: MetricTree) -> list:
        out = [tree.vertex_point(v) for v in tree.vertices]
        for eid, e in sorted(tree.edges.items()):
            for k in range(1, self.per_edge + 1):
                out.append(TreePoint(eid, e.length * k / (self.per_edge + 1)))
        return out


def asymptotic_center(space, tail: Sequence, search) -> tuple:
    """Candidate minimizing the largest distance to the tail, and that distance."""
    if not len(tail):
        raise DomainError("tail must be nonempty")
    if isinstance(search, GridSearch):
        cands = search.candidates()
        if getattr(space, "kind", None) == "disk":
            cands = cands[(cands**2).sum(axis=1) < 1.0]
    elif isinstance(search, TreeSearch):
        cands = search.candidates(space)
    else:
        cands = list(search)
    if len(cands) == 0:
        raise DomainError("search set is empty")
    if isinstance(cands, np.ndarray):
        worst = np.zeros(len(cands))
        for x in tail:
            np.maximum(worst, space.batch_distance(cands, x), out=worst)
        i = int(np.argmin(worst))
        return tuple(float(c) for c in cands[i]), float(worst[i])
    best, best_r = None, math.inf
    for c in cands:
        r = max(space.distance(c, x) for x in tail)
        if r < best_r:
            best, best_r = c, r
    return best, best_r


# -- periodic points ---------------------------------------------------------------------


@dataclass
class PeriodicReport:
    hits: list  # (n, k)
    tol: float

    @property
    def flagged(self) -> bool:
        return bool(self.hits)


def periodic_point_probe(trace: OrbitTrace, tol: float, max_period: int = 64, space=None) -> PeriodicReport:
    """Flag x_n with d(x_n, x_{n+k}) <= tol for some k >= 2 while gaps[n] > tol.

    Such a point would be periodic without being fixed, which cannot happen for
    averaged or firmly nonexpansive maps on spaces with the betweenness property.
    """
    space = space or trace.space
    if space is None:
        raise DomainError("periodic_point_probe needs the trace's space")
    hits = []
    idx, pts = trace.indices, trace.points
    for i, n in enumerate(idx):
        if n >= len(trace.gaps) or trace.gaps[n] <= tol:
            continue
        for j in itertools.count(i + 1):
            if j >= len(idx) or idx[j] - n > max_period:
                break
            k = idx[j] - n
            if k >= 2 and space.distance(pts[i], pts[j]) <= tol:
                hits.append((n, k))
                break
    return PeriodicReport(hits, tol)
