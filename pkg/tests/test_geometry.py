import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from geofix.errors import DomainError, UnsupportedCapability
from geofix.geometry import (
    Euclidean,
    Lp,
    PoincareDisk,
    cat0_modulus,
    convex_combination,
    distance,
    lp_modulus,
    modulus_eval,
    parse_space,
)
from geofix.trees import tripod

coord = st.floats(-5, 5, allow_nan=False)
unit = st.floats(0, 1)


def disk_point():
    return st.tuples(st.floats(0, 0.95), st.floats(0, 2 * math.pi)).map(
        lambda rt: (rt[0] * math.cos(rt[1]), rt[0] * math.sin(rt[1]))
    )


def hyperboloid_distance(z, w):
    # independent formula via the hyperboloid model, in 50-digit arithmetic
    mpmath.mp.dps = 50
    z = [mpmath.mpf(c) for c in z]
    w = [mpmath.mpf(c) for c in w]
    num = 2 * ((z[0] - w[0]) ** 2 + (z[1] - w[1]) ** 2)
    den = (1 - z[0] ** 2 - z[1] ** 2) * (1 - w[0] ** 2 - w[1] ** 2)
    return float(mpmath.acosh(1 + num / den))


def test_disk_distance_origin_to_half():
    assert PoincareDisk().distance((0, 0), (0.5, 0)) == pytest.approx(math.log(3), abs=1e-12)


def test_disk_distance_matches_radial_quadrature():
    # along a diameter the hyperbolic length is the integral of 2 / (1 - r^2)
    val = mpmath.quad(lambda r: 2 / (1 - r * r), [0.1, 0.7])
    assert PoincareDisk().distance((0.1, 0), (0.7, 0)) == pytest.approx(float(val), rel=1e-12)


@given(disk_point(), disk_point())
def test_disk_distance_against_hyperboloid(z, w):
    assert PoincareDisk().distance(z, w) == pytest.approx(hyperboloid_distance(z, w), rel=1e-9, abs=1e-9)


def test_disk_midpoint_of_origin_and_half():
    m = PoincareDisk().geodesic((0, 0), (0.5, 0), 0.5)
    # tanh(ln(3) / 4) = 2 - sqrt(3)
    assert m[0] == pytest.approx(2 - math.sqrt(3), abs=1e-12)
    assert m[1] == pytest.approx(0, abs=1e-15)


@given(disk_point(), disk_point(), unit)
def test_disk_geodesic_is_parameterized_by_arc_length(x, y, t):
    D = PoincareDisk()
    m = D.geodesic(x, y, t)
    d = D.distance(x, y)
    assert D.distance(x, m) == pytest.approx(t * d, abs=1e-8)
    assert D.distance(m, y) == pytest.approx((1 - t) * d, abs=1e-8)


def test_disk_geodesic_endpoints_are_exact():
    D = PoincareDisk()
    x, y = (0.3, -0.2), (-0.1, 0.6)
    assert D.geodesic(x, y, 0.0) == x
    assert D.geodesic(x, y, 1.0) == y


def test_disk_rejects_boundary_points():
    with pytest.raises(DomainError):
        distance(PoincareDisk(), (1.0, 0.0), (0, 0))


@given(st.lists(coord, min_size=3, max_size=3), st.lists(coord, min_size=3, max_size=3))
def test_lp_distance_matches_numpy(x, y):
    L = Lp(3, 4.0)
    expected = np.linalg.norm(np.subtract(x, y), ord=4)
    assert L.distance(tuple(x), tuple(y)) == pytest.approx(expected, rel=1e-12, abs=1e-12)


@given(st.lists(coord, min_size=2, max_size=2), st.lists(coord, min_size=2, max_size=2), unit)
def test_euclidean_geodesic_is_linear(x, y, t):
    m = Euclidean(2).geodesic(tuple(x), tuple(y), t)
    np.testing.assert_allclose(m, (1 - t) * np.array(x) + t * np.array(y), atol=1e-12)


def test_euclidean_distance_three_four_five():
    assert distance(Euclidean(2), (0, 0), (3, 4)) == 5.0


def test_convex_combination_rejects_t_outside_unit_interval():
    with pytest.raises(DomainError):
        convex_combination(Euclidean(1), (0.0,), (1.0,), 1.5)


def test_dimension_mismatch_is_rejected():
    with pytest.raises(DomainError):
        distance(Euclidean(2), (0, 0, 0), (1, 1))


def test_cat0_modulus_values():
    m = cat0_modulus()
    assert m(1, 0.5) == 0.03125
    assert m.tilde(1, 0.5) == 0.0625
    with pytest.raises(DomainError):
        m(1, 2.5)
    with pytest.raises(DomainError):
        m(0, 1)


def test_lp_modulus_branches():
    assert lp_modulus(4)(1, 0.5) == pytest.approx(0.5**4 / (4 * 16))
    assert lp_modulus(1.5)(1, 1.0) == pytest.approx(0.5 / 8)
    with pytest.raises(DomainError):
        lp_modulus(1.0)


def test_modulus_eval_without_modulus():
    class Bare:
        modulus = None

        def spec(self):
            return "bare"

    with pytest.raises(UnsupportedCapability):
        modulus_eval(Bare(), 1, 1)


@pytest.mark.parametrize(
    "spec, kind",
    [("euclidean:3", "euclidean"), ("lp:4:3", "lp"), ("disk", "disk"), ("tree:tripod", "tree")],
)
def test_parse_space(spec, kind):
    assert parse_space(spec).kind == kind


@pytest.mark.parametrize("spec", ["euclid:2", "lp:4", "euclidean:x", "lp:1:2"])
def test_parse_space_rejects(spec):
    with pytest.raises(DomainError):
        parse_space(spec)


def test_extend_continues_past_the_endpoint(model_space, rng):
    x, y = model_space.sample_point(rng), model_space.sample_point(rng)
    d = model_space.distance(x, y)
    w = model_space.extend(x, y, 0.25) if model_space.kind != "tree" else model_space.extend(x, y, 0.25, rng=rng)
    # in a tree the extension may stop early at a leaf
    assert model_space.distance(x, w) == pytest.approx(d + model_space.distance(y, w), abs=1e-9)


def test_batch_distance_agrees_with_scalar(model_space, rng):
    if model_space.kind == "tree":
        pytest.skip("trees have no coordinate batches")
    pts = [model_space.sample_point(rng) for _ in range(20)]
    x = model_space.sample_point(rng)
    batch = model_space.batch_distance(np.asarray(pts), x)
    np.testing.assert_allclose(batch, [model_space.distance(p, x) for p in pts], rtol=1e-12, atol=1e-12)


def test_tripod_midpoint_of_two_leaves_is_center():
    T = tripod()
    a, b = T.vertex_point("a"), T.vertex_point("b")
    assert T.distance(a, b) == 2.0
    assert T.vertex_of(T.geodesic(a, b, 0.5)) == "o"
