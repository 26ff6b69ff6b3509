import json

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from geofix.errors import ConstructionError, DomainError
from geofix.trees import MetricTree, TreePoint, load_tree, random_tree, tripod


def oracle_distance(tree, x, y):
    """Shortest-path length in a networkx copy with x and y spliced in as nodes."""
    if x.edge == y.edge:
        return abs(x.offset - y.offset)
    g = nx.Graph()
    for eid, e in tree.edges.items():
        g.add_edge(e.u, e.v, weight=e.length)
    for name, p in (("X", x), ("Y", y)):
        e = tree.edges[p.edge]
        g.remove_edge(e.u, e.v)
        g.add_edge(e.u, name, weight=p.offset)
        g.add_edge(name, e.v, weight=e.length - p.offset)
    return nx.shortest_path_length(g, "X", "Y", weight="weight")


@given(st.integers(0, 10_000), st.integers(2, 12))
def test_distance_matches_networkx(seed, n):
    rng = np.random.default_rng(seed)
    tree = random_tree(rng, n)
    for _ in range(5):
        x, y = tree.sample_point(rng), tree.sample_point(rng)
        assert tree.distance(x, y) == pytest.approx(oracle_distance(tree, x, y), abs=1e-12)


@given(st.integers(0, 10_000))
def test_vertex_distances_match_networkx(seed):
    rng = np.random.default_rng(seed)
    tree = random_tree(rng, 9)
    g = nx.Graph([(e.u, e.v, {"weight": e.length}) for e in tree.edges.values()])
    lengths = dict(nx.all_pairs_dijkstra_path_length(g))
    for a in tree.vertices:
        for b in tree.vertices:
            assert tree.vertex_distance(a, b) == pytest.approx(lengths[a][b], abs=1e-12)
            assert tree.vertex_path(a, b) == nx.shortest_path(g, a, b, weight="weight")


@given(st.integers(0, 10_000), st.floats(0, 1))
def test_geodesic_splits_distance(seed, t):
    rng = np.random.default_rng(seed)
    tree = random_tree(rng, 7)
    x, y = tree.sample_point(rng), tree.sample_point(rng)
    m = tree.geodesic(x, y, t)
    d = tree.distance(x, y)
    assert tree.distance(x, m) == pytest.approx(t * d, abs=1e-12)
    assert tree.distance(m, y) == pytest.approx((1 - t) * d, abs=1e-12)


def test_vertex_representations_coincide():
    T = tripod()
    # o is offset 0 on every edge
    assert T.distance(TreePoint("oa", 0.0), TreePoint("ob", 0.0)) == 0.0
    assert T.distance(TreePoint("oa", 0.25), TreePoint("oc", 0.5)) == 0.75


def test_route_through_center():
    T = tripod()
    legs = T.route(TreePoint("oa", 0.5), TreePoint("ob", 0.5))
    assert sum(abs(s1 - s0) for _, s0, s1 in legs) == pytest.approx(1.0)


def test_extend_stops_at_leaf():
    T = tripod()
    w = T.extend(T.vertex_point("o"), TreePoint("oa", 0.5), 3.0)
    assert T.vertex_of(w) == "a"


def test_extend_branches_at_vertex():
    T = tripod()
    w = T.extend(T.vertex_point("a"), T.vertex_point("o"), 0.5)
    assert T.distance(T.vertex_point("a"), w) == pytest.approx(1.5)


def test_extend_of_degenerate_geodesic_fails():
    T = tripod()
    with pytest.raises(DomainError):
        T.extend(T.vertex_point("a"), T.vertex_point("a"), 1.0)


@pytest.mark.parametrize(
    "vertices, edges",
    [
        (["a", "b"], {"e": ("a", "b", 0.0)}),
        (["a", "b"], {"e": ("a", "a", 1.0)}),
        (["a", "b", "c"], {"e": ("a", "b", 1.0)}),
        (["a", "b", "c", "d"], {"e": ("a", "b", 1), "f": ("b", "a", 1), "g": ("c", "d", 1)}),
        (["a", "b"], {"e": ("a", "z", 1.0)}),
    ],
)
def test_invalid_trees_are_rejected(vertices, edges):
    with pytest.raises(ConstructionError):
        MetricTree(vertices, edges)


def test_point_validation():
    T = tripod()
    with pytest.raises(DomainError):
        T.check_point(TreePoint("oa", 1.5))
    with pytest.raises(DomainError):
        T.check_point(TreePoint("zz", 0.5))
    with pytest.raises(DomainError):
        T.check_point((0.1, 0.2))


def test_json_round_trip(tmp_path):
    T = random_tree(np.random.default_rng(3), 6)
    path = tmp_path / "t.json"
    path.write_text(json.dumps(T.to_json()))
    U = load_tree(path)
    assert U.edges == T.edges
    p = TreePoint("e3", 0.1)
    assert U.point_from_json(T.point_to_json(p)) == p
    assert U.point_from_json({"vertex": "v0"}) == T.vertex_point("v0")
