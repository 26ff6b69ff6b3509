import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from geofix.errors import ConstructionError, DomainError, UnsupportedCapability
from geofix.geometry import Euclidean, Lp, PoincareDisk
from geofix.sets import (
    Ball,
    GeodesicSegment,
    HalfSpace,
    Subtree,
    dist_to_set,
    membership,
    project,
    sample_set,
    validate_set,
)
from geofix.trees import TreePoint, random_tree, tripod

seeds = st.integers(0, 2**31)


def assert_is_nearest(space, s, x, rng, n=200):
    """P(x) lies in s and no sampled point of s is closer to x."""
    rep = project(space, s, x)
    assert membership(space, s, rep.projected, 1e-7)
    best = min(space.distance(x, y) for y in sample_set(space, s, rng, n))
    assert rep.dist_to_set <= best + 1e-9
    return rep


def test_halfspace_projection_by_hand():
    rep = project(Euclidean(2), HalfSpace((1, 0), 0), (1, 1))
    assert rep.projected == (0.0, 1.0)
    assert rep.dist_to_set == 1.0


def test_ball_projection_is_radial():
    rep = project(Euclidean(2), Ball((0, 0), 1), (2, 0))
    assert rep.projected == pytest.approx((1, 0))


def test_zero_radius_ball_is_a_point():
    assert project(Euclidean(2), Ball((1, 2), 0), (5, 5)).projected == (1, 2)


def test_negative_radius_rejected():
    with pytest.raises(ConstructionError):
        Ball((0, 0), -1)


def test_disk_segment_projection_of_point_above_center():
    rep = project(PoincareDisk(), GeodesicSegment((-0.5, 0), (0.5, 0)), (0, 0.5))
    assert rep.projected == pytest.approx((0, 0), abs=1e-12)


@given(seeds)
def test_euclidean_projections_are_nearest(seed):
    rng = np.random.default_rng(seed)
    E = Euclidean(2)
    x = E.sample_point(rng, radius=3.0)
    for s in (
        Ball(E.sample_point(rng), float(rng.uniform(0.1, 1))),
        HalfSpace(tuple(rng.standard_normal(2)), float(rng.normal())),
        GeodesicSegment(E.sample_point(rng), E.sample_point(rng)),
    ):
        assert_is_nearest(E, s, x, rng)


@given(seeds)
def test_lp_halfspace_projection_distance(seed):
    rng = np.random.default_rng(seed)
    L = Lp(3, 4.0)
    s = HalfSpace(tuple(rng.standard_normal(3)), float(rng.normal()))
    x = L.sample_point(rng, radius=3.0)
    rep = assert_is_nearest(L, s, x, rng)
    n = np.asarray(s.normal)
    excess = max(float(n @ np.asarray(x)) - s.offset, 0.0)
    assert rep.dist_to_set == pytest.approx(excess / np.linalg.norm(n, ord=4 / 3), abs=1e-12)


@given(seeds)
def test_lp_segment_projection_close_to_brute_force(seed):
    rng = np.random.default_rng(seed)
    L = Lp(2, 4.0)
    s = GeodesicSegment(L.sample_point(rng), L.sample_point(rng))
    x = L.sample_point(rng, radius=2.0)
    ts = np.linspace(0, 1, 20001)
    brute = min(L.distance(x, L.geodesic(s.a, s.b, float(t))) for t in ts)
    assert project(L, s, x).dist_to_set == pytest.approx(brute, abs=1e-7)


@given(seeds)
def test_disk_projections_are_nearest(seed):
    rng = np.random.default_rng(seed)
    D = PoincareDisk()
    x = D.sample_point(rng)
    assert_is_nearest(D, Ball(D.sample_point(rng, radius=0.7), float(rng.uniform(0.1, 1.5))), x, rng)
    seg = GeodesicSegment(D.sample_point(rng), D.sample_point(rng))
    rep = assert_is_nearest(D, seg, x, rng)
    ts = np.linspace(0, 1, 4001)
    brute = min(D.distance(x, D.geodesic(seg.a, seg.b, float(t))) for t in ts)
    assert rep.dist_to_set == pytest.approx(brute, abs=1e-5)


@given(seeds)
def test_tree_projections_are_nearest(seed):
    rng = np.random.default_rng(seed)
    T = random_tree(rng, 8)
    x = T.sample_point(rng)
    assert_is_nearest(T, GeodesicSegment(T.sample_point(rng), T.sample_point(rng)), x, rng)
    assert_is_nearest(T, Ball(T.sample_point(rng), float(rng.uniform(0.1, 1.5))), x, rng)
    # a connected subtree: a vertex and its neighbours
    v = T.vertices[int(rng.integers(len(T.vertices)))]
    sub = Subtree(frozenset([v] + [w for w, _ in T.adj[v]]))
    assert_is_nearest(T, sub, x, rng)


def test_subtree_projection_on_tripod():
    T = tripod()
    rep = project(T, Subtree({"o", "b"}), T.vertex_point("a"))
    assert T.vertex_of(rep.projected) == "o"
    assert rep.dist_to_set == 1.0


@given(seeds)
def test_projection_is_idempotent(seed):
    rng = np.random.default_rng(seed)
    D = PoincareDisk()
    s = GeodesicSegment(D.sample_point(rng), D.sample_point(rng))
    p = project(D, s, D.sample_point(rng)).projected
    assert D.distance(project(D, s, p).projected, p) <= 1e-9


def test_halfspace_needs_normed_space():
    with pytest.raises(UnsupportedCapability):
        project(PoincareDisk(), HalfSpace((1, 0), 0), (0, 0))
    with pytest.raises(UnsupportedCapability):
        validate_set(tripod(), HalfSpace((1, 0), 0))


def test_subtree_validation():
    T = tripod()
    with pytest.raises(ConstructionError):
        validate_set(T, Subtree({"a", "b"}))
    with pytest.raises(ConstructionError):
        validate_set(T, Subtree({"q"}))
    with pytest.raises(UnsupportedCapability):
        validate_set(Euclidean(2), Subtree({"a"}))
    assert validate_set(T, Subtree({"a", "o"})) == Subtree({"a", "o"})


def test_zero_normal_rejected():
    with pytest.raises(ConstructionError):
        HalfSpace((0, 0), 1)


def test_unknown_set_kind():
    with pytest.raises(DomainError):
        project(Euclidean(2), object(), (0, 0))


def test_dist_to_set_closed_forms():
    E = Euclidean(2)
    assert dist_to_set(E, Ball((0, 0), 1), (3, 4)) == 4.0
    assert dist_to_set(E, HalfSpace((0, 2), 0), (0, 3)) == 3.0
    T = tripod()
    assert dist_to_set(T, Subtree({"o", "b"}), TreePoint("oa", 0.5)) == 0.5
    assert dist_to_set(T, Subtree({"o", "b"}), TreePoint("ob", 0.5)) == 0.0


def test_membership_tolerance():
    E = Euclidean(1)
    assert membership(E, Ball((0,), 1), (1 + 1e-12,))
    assert not membership(E, Ball((0,), 1), (1 + 1e-6,))
    assert math.isclose(dist_to_set(E, Ball((0,), 1), (1.5,)), 0.5)
