"""Nonexpansive self-maps built from projections, averaging and weighted composites.

Descriptors are immutable; :func:`apply` evaluates them at a point. ``Scale`` and
``Rotation`` are test helpers that supply negative witnesses for the checkers;
they are flagged with ``library = False``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConstructionError, DomainError
from .geometry import Euclidean
from .sets import project

DEFAULT_LAMBDA_GRID = (0.1, 0.25, 0.5, 0.75, 0.9)


@dataclass(frozen=True)
class Identity:
    library = True


@dataclass(frozen=True)
class Projection:
    set: object
    library = True


@dataclass(frozen=True)
class Averaged:
    """T_lambda x = W(x, Tx, lambda)."""

    base: object
    lam: float
    library = True

    def __post_init__(self):
        if not 0 < self.lam < 1:
            raise ConstructionError(f"averaging parameter must lie in (0, 1), got {self.lam}")


@dataclass(frozen=True)
class Composite:
    """Weighted average of T_i = W(x, P_i x, lambda_i), built through nested geodesics."""

    retractions: tuple
    lambdas: tuple
    weights: tuple
    library = True

    def __post_init__(self):
        object.__setattr__(self, "retractions", tuple(self.retractions))
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        object.__setattr__(self, "weights", tuple(float(v) for v in self.weights))
        r = len(self.retractions)
        if r < 2:
            raise ConstructionError("a composite needs at least two retractions")
        if len(self.lambdas) != r or len(self.weights) != r:
            raise ConstructionError("retractions, lambdas and weights must have equal length")
        if any(not 0 < v < 1 for v in self.lambdas):
            raise ConstructionError("every lambda must lie in (0, 1)")
        if any(not 0 < v < 1 for v in self.weights):
            raise ConstructionError("every weight must lie in (0, 1)")
        if abs(math.fsum(self.weights) - 1.0) > 1e-12:
            raise ConstructionError(f"weights sum to {math.fsum(self.weights)!r}, not 1")

    @property
    def tails(self) -> tuple:
        """a_j = alpha_j + ... + alpha_r for j = 1..r (index 0 holds a_1 = 1)."""
        w = self.weights
        return tuple(math.fsum(w[j:]) for j in range(len(w)))


@dataclass(frozen=True)
class Scale:
    """x -> W(anchor, x, c); nonexpansive only for c <= 1."""

    c: float
    anchor: object
    library = False


@dataclass(frozen=True)
class Rotation:
    """Rotation about the origin of Euclidean(2)."""

    angle: float
    library = False


@dataclass(frozen=True)
class Custom:
    """Wrap an arbitrary callable ``f(space, x)``."""

    fn: Callable = field(compare=False)
    name: str = "custom"
    library = False


def apply(space, m, x):
    if isinstance(m, Identity):
        return x
    if isinstance(m, Projection):
        return project(space, m.set, x).projected
    if isinstance(m, Averaged):
        return space.geodesic(x, apply(space, m.base, x), m.lam)
    if isinstance(m, Composite):
        return _apply_composite(space, m, x)
    if isinstance(m, Scale):
        if isinstance(space, Euclidean) or getattr(space, "normed", False):
            # linear scaling also covers c > 1
            return tuple(a + m.c * (b - a) for a, b in zip(m.anchor, x))
        if not 0 <= m.c <= 1:
            raise DomainError("Scale with c outside [0, 1] needs a normed space")
        return space.geodesic(m.anchor, x, m.c)
    if isinstance(m, Rotation):
        if not (isinstance(space, Euclidean) and space.dim == 2):
            raise DomainError("Rotation is defined on Euclidean(2) only")
        c, s = math.cos(m.angle), math.sin(m.angle)
        return (c * x[0] - s * x[1], s * x[0] + c * x[1])
    if isinstance(m, Custom):
        return m.fn(space, x)
    raise DomainError(f"unknown mapping {m!r}")


def component_maps(space, m: Composite, x) -> list:
    """T_i x = W(x, P_i x, lambda_i) for every i."""
    return [space.geodesic(x, apply(space, p, x), lam) for p, lam in zip(m.retractions, m.lambdas)]


def _apply_composite(space, m: Composite, x):
    Tx = component_maps(space, m, x)
    a = m.tails
    r = len(Tx)
    # S_0 = T_r; S_i = W(T_{r-i}, S_{i-1}, a_{r-i+1} / a_{r-i}); 1-based indices
    S = Tx[r - 1]
    for i in range(1, r - 1):
        S = space.geodesic(Tx[r - i - 1], S, a[r - i] / a[r - i - 1])
    return space.geodesic(Tx[0], S, a[1])


def is_library(m) -> bool:
    if isinstance(m, Averaged):
        return m.library and is_library(m.base)
    if isinstance(m, Composite):
        return all(is_library(p) for p in m.retractions)
    return bool(getattr(m, "library", False))


# -- checkers ----------------------------------------------------------------------


@dataclass
class FirmnessReport:
    holds: bool
    worst_violation: float
    witness_pair: Optional[tuple]
    lambda_grid: list
    n_pairs: int = 0
    tolerance: float = 0.0


def default_pair_sampler(space) -> Callable:
    def sampler(rng):
        return space.sample_point(rng), space.sample_point(rng)

    return sampler


def _pairs(space, pair_sampler, n_pairs, seed, pairs):
    rng = np.random.default_rng(seed)
    sampler = pair_sampler or default_pair_sampler(space)
    out = list(pairs or [])
    out.extend(sampler(rng) for _ in range(n_pairs))
    return out


def check_nonexpansive(
    space, m, pair_sampler=None, n_pairs: int = 1000, seed: int = 0, pairs: Sequence = ()
) -> FirmnessReport:
    """max over pairs of d(mx, my) - d(x, y)."""
    if n_pairs < 1 and not pairs:
        raise DomainError("need at least one pair")
    worst, witness = -math.inf, None
    for x, y in _pairs(space, pair_sampler, n_pairs, seed, pairs):
        v = space.distance(apply(space, m, x), apply(space, m, y)) - space.distance(x, y)
        if v > worst:
            worst, witness = v, (x, y)
    return FirmnessReport(worst <= space.tol, worst, witness, [], n_pairs, space.tol)


def check_lambda_firm(
    space,
    m,
    lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    pair_sampler=None,
    n_pairs: int = 1000,
    seed: int = 0,
    pairs: Sequence = (),
) -> FirmnessReport:
    """max over pairs and grid of d(Tx, Ty) - d(W(x, Tx, lam), W(y, Ty, lam))."""
    grid = list(lambda_grid)
    if not grid:
        raise DomainError("lambda grid must be nonempty")
    worst, witness = -math.inf, None
    for x, y in _pairs(space, pair_sampler, n_pairs, seed, pairs):
        Tx, Ty = apply(space, m, x), apply(space, m, y)
        lhs = space.distance(Tx, Ty)
        for lam in grid:
            v = lhs - space.distance(space.geodesic(x, Tx, lam), space.geodesic(y, Ty, lam))
            if v > worst:
                worst, witness = v, (x, y)
    return FirmnessReport(worst <= space.tol, worst, witness, grid, n_pairs, space.tol)


@dataclass
class FixedPointProbe:
    rows: list  # (candidate, displacement, fixed, member)
    failures: list

    @property
    def consistent(self) -> bool:
        return not self.failures


def fixed_point_set_probe(space, composite, sets, candidates, tol: float) -> FixedPointProbe:
    """Compare ``d(x, Tx) <= tol`` with membership in every set at ``10 * tol``."""
    from .sets import membership

    rows, failures = [], []
    for x in candidates:
        disp = space.distance(x, apply(space, composite, x))
        fixed = disp <= tol
        member = all(membership(space, s, x, 10 * tol) for s in sets)
        rows.append((x, disp, fixed, member))
        if fixed != member:
            failures.append((x, "fixed but outside" if fixed else "member but moved"))
    return FixedPointProbe(rows, failures)
