"""
Tests for dihedral angles, branches, vertex links, volume and mean curvature.
"""
import logging
import math
from types import SimpleNamespace

import numpy as np
import pytest

from polyhedra import (TYPE3_REFERENCE, Type1Params, bricard_type1, bricard_type3_flat, build_surface,
                       dihedral_angle, equator_dehn_sum, equators, invariant_trace, link_convexity,
                       oriented_volume, total_mean_curvature, track_branches, trace_flex, vertex_link)
from polyhedra.bricard import admissible_intervals, symmetric_pairs
from polyhedra.errors import RadiusTooLarge
from polyhedra.invariants import LinkShape, dehn_vector
from test_geometry_core import outward, regular_octahedron

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger('test_invariants')

STEFFEN_LENGTHS = Type1Params(a1b1=5, a1b2=11, c1a1=12, c1b1=10, c1a2=10, c1b2=12)


def unit_cube(scale=1.0):
    """Unit cube with every square split along one diagonal, faces oriented outward."""
    vertices = [(x * scale, y * scale, z * scale) for x in (0, 1) for y in (0, 1) for z in (0, 1)]
    faces = []
    for axis in range(3):
        others = [a for a in range(3) if a != axis]
        for side in (0, 1):
            corners = []
            for u, w in ((0, 0), (1, 0), (1, 1), (0, 1)):
                bits = [0, 0, 0]
                bits[axis], bits[others[0]], bits[others[1]] = side, u, w
                corners.append(4 * bits[0] + 2 * bits[1] + bits[2])
            faces += [(corners[0], corners[1], corners[2]), (corners[0], corners[2], corners[3])]
    return vertices, outward(vertices, faces)


def type1_path(samples=60):
    lo, hi = max(admissible_intervals(STEFFEN_LENGTHS), key=lambda iv: iv[1] - iv[0])
    pad = 0.1 * (hi - lo)
    return trace_flex(bricard_type1(STEFFEN_LENGTHS, lo + pad), (lo + pad, hi - pad), samples)


def test_cube_angles():
    """Cube edges are right angles, diagonals of the squares are flat."""
    logger.info("Testing cube dihedral angles...")
    s = build_surface(*unit_cube())
    for k, e in enumerate(s.edges):
        value = dihedral_angle(s, k).value
        if abs(e.length - 1.0) < 1e-12:
            assert abs(value - math.pi / 2) < 1e-12
        else:
            assert abs(value - math.pi) < 1e-12


def test_inward_cube_angles():
    """Reversing every face turns pi/2 into 3pi/2."""
    vertices, faces = unit_cube()
    s = build_surface(vertices, [tuple(reversed(f)) for f in faces])
    for k, e in enumerate(s.edges):
        if abs(e.length - 1.0) < 1e-12:
            assert abs(dihedral_angle(s, k).value - 1.5 * math.pi) < 1e-12


def test_cube_volume_and_mean_curvature():
    s = build_surface(*unit_cube())
    assert abs(oriented_volume(s) - 1.0) < 1e-12
    assert abs(total_mean_curvature(s) - 6 * math.pi) < 1e-12
    vertices, faces = unit_cube()
    inward = build_surface(vertices, [tuple(reversed(f)) for f in faces])
    assert abs(oriented_volume(inward) + 1.0) < 1e-12


def test_mean_curvature_homogeneous():
    """Doubling every length doubles the total mean curvature."""
    small = build_surface(*unit_cube())
    large = build_surface(*unit_cube(2.0))
    assert abs(total_mean_curvature(large) - 2 * total_mean_curvature(small)) < 1e-12


def test_dehn_vector_of_cube():
    s = build_surface(*unit_cube())
    entries = dehn_vector(s).entries
    right = [(l, a) for l, a in entries if abs(l - 1.0) < 1e-12]
    assert len(right) == 12
    assert all(abs(a - math.pi / 2) < 1e-12 for _, a in right)


def test_dehn_vector_needs_closed_surface():
    s = build_surface(*unit_cube())
    thin = SimpleNamespace(faces=s.faces[:3], edges=s.edges)
    with pytest.raises(ValueError):
        dehn_vector(thin)


def test_octahedron_link():
    """The link of a regular octahedron vertex is a convex quadrilateral of pi/3 arcs."""
    s = build_surface(*regular_octahedron())
    link = vertex_link(s, 0, 0.1)
    assert len(link.neighbors) == 4
    assert all(abs(a - math.pi / 3) < 1e-12 for a in link.arcs)
    assert all(abs(a - math.acos(-1.0 / 3.0)) < 1e-12 for a in link.angles)
    assert link_convexity(link) is LinkShape.CONVEX


def test_link_radius_bound():
    s = build_surface(*regular_octahedron())
    with pytest.raises(RadiusTooLarge):
        vertex_link(s, 0, 2.0)


def test_flat_link():
    """At the flat type-3 position the link of A1 lies on one great circle."""
    flat, _ = bricard_type3_flat(TYPE3_REFERENCE)
    r = 1e-4 * min(flat.lengths())
    link = vertex_link(flat, flat.labels['A1'], r)
    assert link_convexity(link) is LinkShape.DEGENERATE_FLAT
    assert np.max(np.abs(link.points[:, 2])) < 1e-12


def test_constant_path_branches():
    s = bricard_type1(STEFFEN_LENGTHS)
    branches = track_branches([s, s, s])
    for b in branches:
        assert np.all(b.values == b.values[0])


def test_type1_invariants_constant():
    """Volume and mean curvature stay constant along a type-1 trace."""
    logger.info("Testing invariant constancy along a type-1 trace...")
    path = type1_path()
    frame = invariant_trace(path, track_branches(path))
    diameter = path.samples[0].surface.diameter()
    assert (frame['volume'] - frame['volume'].iloc[0]).abs().max() < 1e-9 * diameter ** 3
    assert (frame['mean_curvature'] - frame['mean_curvature'].iloc[0]).abs().max() < 1e-9 * diameter
    assert frame['alpha_A1B1'].std() > 1e-3


def test_type1_symmetric_sums():
    """Symmetric edges of a type-1 octahedron have angle sums fixed on one multiple of 2pi."""
    path = type1_path()
    branches = track_branches(path)
    s = path.samples[0].surface
    for a, b in symmetric_pairs('type1'):
        total = branches[s.labelled_edge(*a)].values + branches[s.labelled_edge(*b)].values
        m = round(total[0] / (2 * math.pi))
        assert np.max(np.abs(total - 2 * math.pi * m)) < 1e-9


def test_zero_functional_equator():
    s = bricard_type1(STEFFEN_LENGTHS)
    for eq in equators():
        assert equator_dehn_sum(s, eq, lambda x: 0.0) == 0.0


if __name__ == "__main__":
    logger.info("Starting invariant tests...")
    test_cube_angles()
    test_inward_cube_angles()
    test_cube_volume_and_mean_curvature()
    test_mean_curvature_homogeneous()
    test_dehn_vector_of_cube()
    test_dehn_vector_needs_closed_surface()
    test_octahedron_link()
    test_link_radius_bound()
    test_flat_link()
    test_constant_path_branches()
    test_type1_invariants_constant()
    test_type1_symmetric_sums()
    test_zero_functional_equator()
    logger.info("All invariant tests passed")
