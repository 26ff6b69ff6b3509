"""Finite weighted metric trees (R-trees built from combinatorial trees).

A point is a position on an edge: ``TreePoint(edge_id, offset)`` with the offset
measured from the edge's first endpoint ``u``. Vertices have several
representations (one per incident edge); all of them are at distance 0 from each
other.
"""
from __future__ import annotations

import json
from collections import deque
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import ConstructionError, DomainError
from .geometry import TOL_FLAT, GeodesicSpace, cat0_modulus


class TreePoint(NamedTuple):
    edge: str
    offset: float


class Edge(NamedTuple):
    u: str
    v: str
    length: float


class MetricTree(GeodesicSpace):
    kind = "tree"
    tol = TOL_FLAT
    cat0 = True

    def __init__(self, vertices, edges, name: str = "tree"):
        self.name = name
        self.vertices = tuple(str(v) for v in vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise ConstructionError("duplicate vertex names")
        self.edges: dict[str, Edge] = {}
        for eid, (u, v, length) in edges.items():
            u, v, length = str(u), str(v), float(length)
            if u not in self.vertices or v not in self.vertices:
                raise ConstructionError(f"edge {eid} references an unknown vertex")
            if u == v:
                raise ConstructionError(f"edge {eid} is a loop")
            if not length > 0:
                raise ConstructionError(f"edge {eid} must have positive length")
            self.edges[str(eid)] = Edge(u, v, length)
        if len(self.edges) != len(self.vertices) - 1:
            raise ConstructionError("a tree on n vertices has exactly n - 1 edges")
        self.adj: dict[str, list[tuple[str, str]]] = {v: [] for v in self.vertices}
        self._between: dict[tuple[str, str], str] = {}
        for eid, e in self.edges.items():
            self.adj[e.u].append((e.v, eid))
            self.adj[e.v].append((e.u, eid))
            self._between[(e.u, e.v)] = eid
            self._between[(e.v, e.u)] = eid
        for v in self.adj:
            self.adj[v].sort()
        self._dist: dict[str, dict[str, float]] = {}
        self._parent: dict[str, dict[str, str | None]] = {}
        for root in self.vertices:
            dist, parent = {root: 0.0}, {root: None}
            queue = deque([root])
            while queue:
                x = queue.popleft()
                for y, eid in self.adj[x]:
                    if y not in dist:
                        dist[y] = dist[x] + self.edges[eid].length
                        parent[y] = x
                        queue.append(y)
            if len(dist) != len(self.vertices):
                raise ConstructionError("tree is not connected")
            self._dist[root] = dist
            self._parent[root] = parent
        self._edge_ids = sorted(self.edges)
        lengths = np.array([self.edges[e].length for e in self._edge_ids])
        self._edge_probs = lengths / lengths.sum()

    @property
    def modulus(self):
        return cat0_modulus()

    # -- construction / serialization --------------------------------------

    @classmethod
    def from_json(cls, obj: dict) -> "MetricTree":
        edges = {}
        for i, e in enumerate(obj["edges"]):
            if isinstance(e, dict):
                eid = e.get("id", f"e{i}")
                edges[eid] = (e["u"], e["v"], e["length"])
            else:
                u, v, length = e
                edges[f"e{i}"] = (u, v, length)
        return cls(obj["vertices"], edges, name=obj.get("name", "tree"))

    def to_json(self) -> dict:
        return {
            "kind": "tree",
            "name": self.name,
            "vertices": list(self.vertices),
            "edges": [
                {"id": eid, "u": e.u, "v": e.v, "length": e.length}
                for eid, e in sorted(self.edges.items())
            ],
        }

    def spec(self) -> str:
        return f"tree:{self.name}"

    def point_to_json(self, x) -> dict:
        return {"kind": "tree", "edge": x.edge, "offset": float(x.offset)}

    def point_from_json(self, obj):
        if isinstance(obj, dict) and "vertex" in obj:
            return self.vertex_point(obj["vertex"])
        if isinstance(obj, dict):
            return self.check_point(TreePoint(obj["edge"], float(obj["offset"])))
        return self.check_point(TreePoint(obj[0], float(obj[1])))

    # -- points ----------------------------------------------------------------

    def check_point(self, x):
        if not isinstance(x, TreePoint):
            raise DomainError(f"{x!r} is not a tree point")
        e = self.edges.get(x.edge)
        if e is None:
            raise DomainError(f"unknown edge {x.edge!r}")
        if not -self.tol <= x.offset <= e.length + self.tol:
            raise DomainError(f"offset {x.offset} outside edge {x.edge} of length {e.length}")
        return TreePoint(x.edge, min(max(float(x.offset), 0.0), e.length))

    def vertex_point(self, v: str) -> TreePoint:
        if v not in self.adj:
            raise DomainError(f"unknown vertex {v!r}")
        _, eid = self.adj[v][0]
        return TreePoint(eid, self.offset_of(eid, v))

    def offset_of(self, eid: str, v: str) -> float:
        e = self.edges[eid]
        return 0.0 if v == e.u else e.length

    def vertex_of(self, x: TreePoint, tol: float = 0.0) -> str | None:
        """Name of the vertex ``x`` sits on, if any."""
        e = self.edges[x.edge]
        if x.offset <= tol:
            return e.u
        if x.offset >= e.length - tol:
            return e.v
        return None

    def _ends(self, x: TreePoint):
        e = self.edges[x.edge]
        return ((e.u, x.offset), (e.v, e.length - x.offset))

    def vertex_distance(self, a: str, b: str) -> float:
        return self._dist[a][b]

    def vertex_path(self, a: str, b: str) -> list[str]:
        """Vertices on the unique path from a to b, both included."""
        parent = self._parent[a]
        path = [b]
        while path[-1] != a:
            path.append(parent[path[-1]])
        return path[::-1]

    # -- metric ----------------------------------------------------------------

    def distance(self, x, y) -> float:
        if x.edge == y.edge:
            return abs(x.offset - y.offset)
        best = np.inf
        for a, da in self._ends(x):
            row = self._dist[a]
            for b, db in self._ends(y):
                d = da + row[b] + db
                if d < best:
                    best = d
        return float(best)

    def route(self, x: TreePoint, y: TreePoint) -> list[tuple[str, float, float]]:
        """The geodesic from x to y as legs ``(edge, start_offset, end_offset)``."""
        if x.edge == y.edge:
            return [(x.edge, x.offset, y.offset)]
        best = None
        for a, da in self._ends(x):
            for b, db in self._ends(y):
                d = da + self._dist[a][b] + db
                if best is None or d < best[0]:
                    best = (d, a, b)
        _, a, b = best
        legs = [(x.edge, x.offset, self.offset_of(x.edge, a))]
        path = self.vertex_path(a, b)
        for s, t in zip(path, path[1:]):
            eid = self._between[(s, t)]
            legs.append((eid, self.offset_of(eid, s), self.offset_of(eid, t)))
        legs.append((y.edge, self.offset_of(y.edge, b), y.offset))
        return legs

    def geodesic(self, x, y, t):
        if t == 0:
            return x
        if t == 1:
            return y
        legs = self.route(x, y)
        target = t * sum(abs(s1 - s0) for _, s0, s1 in legs)
        for eid, s0, s1 in legs:
            span = abs(s1 - s0)
            if target <= span:
                step = target if s1 >= s0 else -target
                return TreePoint(eid, min(max(s0 + step, 0.0), self.edges[eid].length))
            target -= span
        return y

    def extend(self, x, y, length, rng=None):
        """Continue the geodesic from x through y for ``length`` more.

        At a branch vertex the next edge is the first other incident edge, or a
        random one when ``rng`` is given. Extension stops early at a leaf.
        """
        legs = [leg for leg in self.route(x, y) if leg[2] != leg[1]]
        if not legs:
            raise DomainError("cannot extend a degenerate geodesic")
        eid, s0, s1 = legs[-1]
        s, direction = s1, (1.0 if s1 > s0 else -1.0)
        remaining = float(length)
        while True:
            L = self.edges[eid].length
            room = L - s if direction > 0 else s
            if remaining <= room:
                return TreePoint(eid, min(max(s + direction * remaining, 0.0), L))
            remaining -= room
            e = self.edges[eid]
            v = e.v if direction > 0 else e.u
            options = [nid for _, nid in self.adj[v] if nid != eid]
            if not options:
                return TreePoint(eid, L if direction > 0 else 0.0)
            eid = options[int(rng.integers(len(options)))] if rng is not None else options[0]
            s = self.offset_of(eid, v)
            direction = 1.0 if s == 0.0 else -1.0

    def sample_point(self, rng, radius=None, center=None):
        eid = self._edge_ids[int(rng.choice(len(self._edge_ids), p=self._edge_probs))]
        return TreePoint(eid, float(rng.random() * self.edges[eid].length))

    def batch_distance(self, points, x) -> np.ndarray:
        return np.array([self.distance(p, x) for p in points])


def tripod(length: float = 1.0) -> MetricTree:
    """Center ``o`` joined to leaves ``a``, ``b``, ``c``; edges stored as o -> leaf."""
    return MetricTree(
        ["o", "a", "b", "c"],
        {"oa": ("o", "a", length), "ob": ("o", "b", length), "oc": ("o", "c", length)},
        name="tripod",
    )


def random_tree(rng, n_vertices: int, min_len: float = 0.2, max_len: float = 1.5) -> MetricTree:
    """Random recursive tree with uniform edge lengths in [min_len, max_len]."""
    names = [f"v{i}" for i in range(n_vertices)]
    edges = {}
    for i in range(1, n_vertices):
        j = int(rng.integers(i))
        edges[f"e{i}"] = (names[j], names[i], float(rng.uniform(min_len, max_len)))
    return MetricTree(names, edges, name=f"random{n_vertices}")


def load_tree(path) -> MetricTree:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    tree = MetricTree.from_json(obj)
    if "name" not in obj:
        tree.name = Path(path).stem
    return tree
