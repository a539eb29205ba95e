"""
Oriented triangulated polyhedral surfaces (self-intersections allowed) and the
primitive geometric predicates used by every other module.
"""
from dataclasses import dataclass, field
from itertools import combinations
from typing import NamedTuple

import mpmath as mp
import numpy as np
from scipy.spatial.transform import Rotation

from .errors import (DegenerateFace, DegenerateTriangle, NonManifoldEdge,
                     OrientationMismatch)
from .log import get_logger

logger = get_logger('geometry_core')

# Relative tolerance of the self-intersection test (times the surface diameter).
INTERSECTION_TOLERANCE = 1e-9
ANGLE_TOLERANCE = 1e-9


class Point3(NamedTuple):
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class Edge:
    """
    An undirected edge identified by its vertex indices.

    endpoints is sorted (i < j); adjacent_faces[0] is the face that traverses the
    edge as i -> j, adjacent_faces[1] the one that traverses it as j -> i.
    """
    endpoints: tuple
    length: float
    adjacent_faces: tuple


@dataclass(frozen=True, eq=False)
class PolyhedralSurface:
    vertices: np.ndarray
    faces: tuple
    edges: tuple
    labels: dict = field(default_factory=dict)
    exact: tuple = None  # optional extended-precision vertex coordinates (mpf triples)

    @property
    def n_vertices(self):
        return len(self.vertices)

    def edge_index(self, i, j):
        """Position of the edge {i, j} in self.edges."""
        key = (min(i, j), max(i, j))
        for k, e in enumerate(self.edges):
            if e.endpoints == key:
                return k
        raise KeyError(f"No edge between vertices {i} and {j}")

    def vertex(self, name):
        return self.labels[name]

    def labelled_edge(self, a, b):
        """Edge index between two labelled vertices, e.g. ('A1', 'B1')."""
        return self.edge_index(self.labels[a], self.labels[b])

    def edge_name(self, k):
        """Readable name of edge k built from the vertex labels (falls back to indices)."""
        names = {}
        for name, idx in self.labels.items():
            names.setdefault(idx, name)
        i, j = self.edges[k].endpoints
        return f"{names.get(i, i)}{names.get(j, j)}"

    def face_with(self, *names):
        """Index of the face whose vertex set equals the given labelled vertices."""
        wanted = {self.labels[n] for n in names}
        for k, f in enumerate(self.faces):
            if set(f) == wanted:
                return k
        raise KeyError(f"No face with vertices {names}")

    def lengths(self):
        return np.array([e.length for e in self.edges])

    def diameter(self):
        v = self.vertices
        return float(max(np.linalg.norm(v[i] - v[j]) for i, j in combinations(range(len(v)), 2)))

    def face_points(self, k):
        return self.vertices[list(self.faces[k])]

    def with_vertices(self, vertices, exact=None):
        """Same combinatorics and labels, new vertex positions (edges re-measured)."""
        vertices = np.array(vertices, dtype=float)
        edges = tuple(Edge(e.endpoints, float(np.linalg.norm(vertices[e.endpoints[0]] - vertices[e.endpoints[1]])),
                           e.adjacent_faces) for e in self.edges)
        vertices.setflags(write=False)
        return PolyhedralSurface(vertices, self.faces, edges, dict(self.labels), exact)

    def exact_vertices(self):
        """Extended-precision coordinates; exact conversion of the floats when none were stored."""
        if self.exact is not None:
            return self.exact
        return tuple(tuple(mp.mpf(float(c)) for c in p) for p in self.vertices)


def build_surface(vertices, faces, labels=None, exact=None):
    """
    Validate a closed oriented triangulated surface and derive its edges.

    Args:
        vertices: Sequence of Point3 / 3-sequences
        faces: Sequence of ordered vertex-index triples
        labels: Optional mapping of vertex names to indices
        exact: Optional extended-precision coordinates carried alongside

    Returns:
        PolyhedralSurface: The validated surface
    """
    v = np.array([tuple(p) for p in vertices], dtype=float)
    if v.ndim != 2 or v.shape[1] != 3:
        raise ValueError(f"Vertices must be 3D points, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("Vertex coordinates must be finite")
    faces = tuple(tuple(int(i) for i in f) for f in faces)

    directed = {}
    for k, f in enumerate(faces):
        if len(f) != 3 or len(set(f)) != 3:
            raise DegenerateFace(f"Face {k} is not a triangle of distinct vertices: {f}")
        for i in f:
            if not 0 <= i < len(v):
                raise IndexError(f"Face {k} references vertex {i} out of range")
        for a, b in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
            if (a, b) in directed:
                raise OrientationMismatch(f"Directed edge {a}->{b} used by faces {directed[(a, b)]} and {k}")
            directed[(a, b)] = k

    scale = max(float(np.ptp(v, axis=0).max()), 1e-300)
    for k, f in enumerate(faces):
        area2 = np.linalg.norm(np.cross(v[f[1]] - v[f[0]], v[f[2]] - v[f[0]]))
        if area2 < 1e-12 * scale * scale:
            raise DegenerateFace(f"Face {k} {f} has collinear vertices")

    edges = []
    seen = set()
    for (a, b), k in sorted(directed.items()):
        key = (min(a, b), max(a, b))
        if key in seen:
            continue
        seen.add(key)
        forward = directed.get(key)
        backward = directed.get((key[1], key[0]))
        if forward is None or backward is None:
            undirected_count = sum(1 for f in faces if key[0] in f and key[1] in f)
            if undirected_count == 2:
                raise OrientationMismatch(f"Edge {key} is traversed in the same direction by both faces")
            raise NonManifoldEdge(f"Edge {key} belongs to {undirected_count} face(s), expected 2")
        count = sum(1 for f in faces if key[0] in f and key[1] in f)
        if count != 2:
            raise NonManifoldEdge(f"Edge {key} belongs to {count} faces, expected 2")
        length = float(np.linalg.norm(v[key[0]] - v[key[1]]))
        edges.append(Edge(key, length, (forward, backward)))

    v.setflags(write=False)
    return PolyhedralSurface(v, faces, tuple(edges), dict(labels or {}), exact)


# ---------------------------------------------------------------------------
# rigid motions

def rotation_about_axis(axis, angle):
    axis = np.asarray(axis, dtype=float)
    return Rotation.from_rotvec(axis / np.linalg.norm(axis) * angle).as_matrix()


def random_rigid_motion(rng):
    """Random proper rotation matrix and translation vector."""
    rot = Rotation.random(random_state=rng).as_matrix()
    return rot, rng.normal(size=3) * 3.0


def apply_rigid_motion(surface, rotation, translation):
    moved = surface.vertices @ np.asarray(rotation).T + np.asarray(translation)
    return surface.with_vertices(moved)


# ---------------------------------------------------------------------------
# extended precision vectors (tuples of mpf)

def mp_sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def mp_add(a, b):
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def mp_scale(s, a):
    return (s * a[0], s * a[1], s * a[2])


def mp_dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def mp_cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def mp_norm(a):
    return mp.sqrt(mp_dot(a, a))


def mp_unit(a):
    return mp_scale(1 / mp_norm(a), a)


# ---------------------------------------------------------------------------
# triangle predicates

def _unit(v):
    n = np.linalg.norm(v)
    return v / n if n > 0 else v.copy()


def _check_triangle(t):
    t = np.asarray(t, dtype=float)
    scale = max(np.linalg.norm(t[1] - t[0]), np.linalg.norm(t[2] - t[0]), 1e-300)
    if np.linalg.norm(np.cross(t[1] - t[0], t[2] - t[0])) < 1e-12 * scale * scale:
        raise DegenerateTriangle(f"Triangle {t.tolist()} is degenerate")
    return t


def point_triangle_distance(p, a, b, c):
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = float(np.dot(ab, ap))
    d2 = float(np.dot(ac, ap))
    if d1 <= 0 and d2 <= 0:
        return float(np.linalg.norm(p - a))
    bp = p - b
    d3 = float(np.dot(ab, bp))
    d4 = float(np.dot(ac, bp))
    if d3 >= 0 and d4 <= d3:
        return float(np.linalg.norm(p - b))
    vc = d1 * d4 - d3 * d2
    if vc <= 0 and d1 >= 0 and d3 <= 0:
        v = d1 / (d1 - d3)
        return float(np.linalg.norm(p - (a + v * ab)))
    cp = p - c
    d5 = float(np.dot(ab, cp))
    d6 = float(np.dot(ac, cp))
    if d6 >= 0 and d5 <= d6:
        return float(np.linalg.norm(p - c))
    vb = d5 * d2 - d1 * d6
    if vb <= 0 and d2 >= 0 and d6 <= 0:
        w = d2 / (d2 - d6)
        return float(np.linalg.norm(p - (a + w * ac)))
    va = d3 * d6 - d5 * d4
    if va <= 0 and (d4 - d3) >= 0 and (d5 - d6) >= 0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return float(np.linalg.norm(p - (b + w * (c - b))))
    n = _unit(np.cross(ab, ac))
    return abs(float(np.dot(p - a, n)))


def segment_segment_distance(p0, p1, q0, q1):
    d1 = p1 - p0
    d2 = q1 - q0
    r = p0 - q0
    a = float(np.dot(d1, d1))
    e = float(np.dot(d2, d2))
    f = float(np.dot(d2, r))
    c = float(np.dot(d1, r))
    b = float(np.dot(d1, d2))
    denom = a * e - b * b
    s = min(max((b * f - c * e) / denom, 0.0), 1.0) if denom > 1e-300 else 0.0
    t = (b * s + f) / e
    if t < 0.0:
        t = 0.0
        s = min(max(-c / a, 0.0), 1.0)
    elif t > 1.0:
        t = 1.0
        s = min(max((b - c) / a, 0.0), 1.0)
    return float(np.linalg.norm((p0 + d1 * s) - (q0 + d2 * t)))


def segment_crosses_triangle(p0, p1, a, b, c):
    """True when the segment p0p1 meets the triangle's interior transversally."""
    n = np.cross(b - a, c - a)
    s0 = float(np.dot(p0 - a, n))
    s1 = float(np.dot(p1 - a, n))
    if s0 * s1 > 0 or s0 == s1:
        return False
    x = p0 + (p1 - p0) * (s0 / (s0 - s1))
    for u, v in ((a, b), (b, c), (c, a)):
        if np.dot(np.cross(v - u, x - u), n) < 0:
            return False
    return True


def triangle_distance(t1, t2):
    """Euclidean distance between two closed triangles (0 when they intersect)."""
    for i in range(3):
        if segment_crosses_triangle(t1[i], t1[(i + 1) % 3], *t2):
            return 0.0
        if segment_crosses_triangle(t2[i], t2[(i + 1) % 3], *t1):
            return 0.0
    best = np.inf
    for i in range(3):
        for j in range(3):
            best = min(best, segment_segment_distance(t1[i], t1[(i + 1) % 3], t2[j], t2[(j + 1) % 3]))
        best = min(best, point_triangle_distance(t1[i], *t2), point_triangle_distance(t2[i], *t1))
    return best


def _in_sector(s, u, w, n):
    return np.dot(np.cross(u, s), n) >= -ANGLE_TOLERANCE and np.dot(np.cross(s, w), n) >= -ANGLE_TOLERANCE


def _sectors_overlap(v, a1, b1, a2, b2):
    """Do the two planar angular sectors at the common apex v share a direction?"""
    u1, w1 = _unit(a1 - v), _unit(b1 - v)
    u2, w2 = _unit(a2 - v), _unit(b2 - v)
    n1 = _unit(np.cross(u1, w1))
    n2 = _unit(np.cross(u2, w2))
    line = np.cross(n1, n2)
    if np.linalg.norm(line) > ANGLE_TOLERANCE:
        d = _unit(line)
        return any(_in_sector(s, u1, w1, n1) and _in_sector(s, u2, w2, n2) for s in (d, -d))
    # coplanar sectors
    if np.dot(n1, n2) < 0:
        u2, w2 = w2, u2
    return (any(_in_sector(s, u2, w2, n1) for s in (u1, w1))
            or any(_in_sector(s, u1, w1, n1) for s in (u2, w2)))


def triangle_intersection(t1, t2, shared=None, tolerance=0.0):
    """
    Test whether two closed triangles share a point not explained by the mesh.

    Args:
        t1, t2: 3x3 arrays of vertex positions
        shared: Optional list of (i, j) pairs saying vertex i of t1 is the mesh
            vertex j of t2 (adjacency-aware test)
        tolerance: Distance under which disjoint triangles count as touching

    Returns:
        bool: True when the triangles intersect outside their shared simplex
    """
    t1 = _check_triangle(t1)
    t2 = _check_triangle(t2)
    shared = list(shared or [])
    if len(shared) >= 3:
        return True
    if len(shared) == 2:
        (i1, j1), (i2, j2) = shared
        v0, v1 = t1[i1], t1[i2]
        a = t1[3 - i1 - i2]
        b = t2[3 - j1 - j2]
        e = _unit(v1 - v0)
        ua = a - v0 - np.dot(a - v0, e) * e
        ub = b - v0 - np.dot(b - v0, e) * e
        ua, ub = _unit(ua), _unit(ub)
        return bool(np.dot(ua, ub) > 0 and np.linalg.norm(np.cross(ua, ub)) < ANGLE_TOLERANCE)
    if len(shared) == 1:
        i, j = shared[0]
        others1 = [t1[k] for k in range(3) if k != i]
        others2 = [t2[k] for k in range(3) if k != j]
        return bool(_sectors_overlap(t1[i], others1[0], others1[1], others2[0], others2[1]))
    return bool(triangle_distance(t1, t2) <= tolerance)


def faces_intersect(surface, f1, f2, tolerance=None):
    """Adjacency-aware intersection test of two faces of a surface."""
    if tolerance is None:
        tolerance = INTERSECTION_TOLERANCE * surface.diameter()
    a, b = surface.faces[f1], surface.faces[f2]
    shared = [(i, b.index(a[i])) for i in range(3) if a[i] in b]
    return triangle_intersection(surface.face_points(f1), surface.face_points(f2), shared, tolerance)


def is_embedded(surface):
    """True iff no two faces meet outside their shared simplex."""
    tolerance = INTERSECTION_TOLERANCE * surface.diameter()
    for f1, f2 in combinations(range(len(surface.faces)), 2):
        if faces_intersect(surface, f1, f2, tolerance):
            logger.debug(f"Faces {surface.faces[f1]} and {surface.faces[f2]} intersect")
            return False
    return True
