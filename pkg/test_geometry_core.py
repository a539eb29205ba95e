"""
Tests for surface validation, triangle intersection and embeddedness.
"""
import itertools
import logging

import numpy as np
import pytest

from polyhedra import Type1Params, bricard_type1, build_surface, is_embedded, triangle_intersection
from polyhedra.errors import DegenerateFace, NonManifoldEdge, OrientationMismatch
from polyhedra.geometry_core import apply_rigid_motion, random_rigid_motion

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger('test_geometry_core')


def outward(vertices, faces):
    """Orient the faces of a convex polyhedron outward."""
    v = np.asarray(vertices, dtype=float)
    center = v.mean(axis=0)
    out = []
    for a, b, c in faces:
        n = np.cross(v[b] - v[a], v[c] - v[a])
        out.append((a, b, c) if np.dot(n, v[a] + v[b] + v[c] - 3 * center) > 0 else (a, c, b))
    return out


def regular_tetrahedron():
    vertices = [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
    return vertices, outward(vertices, list(itertools.combinations(range(4), 3)))


def regular_octahedron():
    vertices = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    faces = [(x, y, z) for x in (0, 1) for y in (2, 3) for z in (4, 5)]
    return vertices, outward(vertices, faces)


def test_tetrahedron_edges():
    """A regular tetrahedron is a valid surface with 6 edges."""
    logger.info("Testing tetrahedron validation...")
    s = build_surface(*regular_tetrahedron())
    assert s.n_vertices == 4
    assert len(s.faces) == 4
    assert len(s.edges) == 6
    assert all(abs(e.length - np.sqrt(8)) < 1e-12 for e in s.edges)


def test_octahedron_edges():
    """The octahedron satisfies Euler's count 6 - 12 + 8 = 2."""
    s = build_surface(*regular_octahedron())
    assert s.n_vertices - len(s.edges) + len(s.faces) == 2
    assert len(s.edges) == 12
    for e in s.edges:
        f1, f2 = e.adjacent_faces
        assert f1 != f2


def test_reversed_face_rejected():
    """Reversing one face of a tetrahedron breaks the orientation."""
    vertices, faces = regular_tetrahedron()
    faces[0] = tuple(reversed(faces[0]))
    with pytest.raises(OrientationMismatch):
        build_surface(vertices, faces)


def test_open_surface_rejected():
    vertices, faces = regular_tetrahedron()
    with pytest.raises(NonManifoldEdge):
        build_surface(vertices, faces[:3])


def test_degenerate_face_rejected():
    vertices = [(0, 0, 0), (1, 0, 0), (2, 0, 0), (0, 1, 0)]
    with pytest.raises(DegenerateFace):
        build_surface(vertices, [(0, 1, 2), (0, 2, 3), (0, 3, 1), (1, 3, 2)])


def test_parallel_triangles_disjoint():
    t1 = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
    t2 = t1 + np.array([0, 0, 1.0])
    assert not triangle_intersection(t1, t2)


def test_piercing_triangle():
    """A triangle pushed through another one intersects it."""
    t1 = np.array([[0, 0, 0], [2, 0, 0], [0, 2, 0]], dtype=float)
    t2 = np.array([[0.5, 0.5, -1], [0.5, 0.5, 1], [3, 3, 0.2]], dtype=float)
    assert triangle_intersection(t1, t2)


def test_shared_edge_excluded():
    """Two faces sharing one mesh edge and otherwise apart do not intersect."""
    t1 = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
    t2 = np.array([[0, 0, 0], [1, 0, 0], [0, -1, 0.5]], dtype=float)
    assert not triangle_intersection(t1, t2, shared=[(0, 0), (1, 1)])


def test_regular_octahedron_embedded():
    assert is_embedded(build_surface(*regular_octahedron()))


def test_type1_octahedron_self_intersects():
    """A Bricard octahedron of type 1 at a generic sample is not embedded."""
    logger.info("Testing embeddedness of a type-1 octahedron...")
    p = Type1Params(a1b1=5, a1b2=11, c1a1=12, c1b1=10, c1a2=10, c1b2=12)
    assert not is_embedded(bricard_type1(p))


def test_surface_is_immutable():
    s = build_surface(*regular_tetrahedron())
    with pytest.raises(ValueError):
        s.vertices[0, 0] = 5.0


def test_embedded_under_rigid_motion():
    """Rigid motions change neither answer of is_embedded."""
    p = Type1Params(a1b1=5, a1b2=11, c1a1=12, c1b1=10, c1a2=10, c1b2=12)
    surfaces = [build_surface(*regular_octahedron()), bricard_type1(p)]
    expected = [is_embedded(s) for s in surfaces]
    assert expected == [True, False]
    rng = np.random.default_rng(11)
    for _ in range(5):
        rotation, translation = random_rigid_motion(rng)
        assert [is_embedded(apply_rigid_motion(s, rotation, translation)) for s in surfaces] == expected


def edge_hits_triangle(p0, p1, tri, margin):
    """Solve p0 + s (p1 - p0) = a + u (b - a) + v (c - a); None when too close to a boundary to decide."""
    a, b, c = tri
    m = np.column_stack([p1 - p0, a - b, a - c])
    if abs(np.linalg.det(m)) < margin:
        return None
    s, u, v = np.linalg.solve(m, a - p0)
    slack = min(s, 1 - s, u, v, 1 - u - v)
    if abs(slack) < margin:
        return None
    return slack > 0


def test_intersection_matches_brute_force():
    """Random triangle pairs in general position agree with an edge-against-triangle solve."""
    logger.info("Testing triangle intersection against 1000 random pairs...")
    rng = np.random.default_rng(5)
    decided = 0
    hits = 0
    for _ in range(1000):
        t1 = rng.normal(size=(3, 3))
        t2 = rng.normal(size=(3, 3)) + rng.normal(scale=0.5, size=3)
        answers = ([edge_hits_triangle(t1[i], t1[(i + 1) % 3], t2, 1e-9) for i in range(3)]
                   + [edge_hits_triangle(t2[i], t2[(i + 1) % 3], t1, 1e-9) for i in range(3)])
        if any(a is None for a in answers):
            continue
        decided += 1
        hits += any(answers)
        assert triangle_intersection(t1, t2) == any(answers)
    assert decided > 950
    assert 0 < hits < decided


if __name__ == "__main__":
    logger.info("Starting geometry tests...")
    test_tetrahedron_edges()
    test_octahedron_edges()
    test_reversed_face_rejected()
    test_open_surface_rejected()
    test_degenerate_face_rejected()
    test_parallel_triangles_disjoint()
    test_piercing_triangle()
    test_shared_edge_excluded()
    test_regular_octahedron_embedded()
    test_type1_octahedron_self_intersects()
    test_surface_is_immutable()
    test_embedded_under_rigid_motion()
    test_intersection_matches_brute_force()
    logger.info("All geometry tests passed")
