"""
Tests for face gluing, subdivision, assembly bookkeeping and the Steffen polyhedron.
"""
import json
import logging
import math
from fractions import Fraction

import numpy as np
import pytest

from polyhedra import (GluingSpec, build_steffen, dihedral_angle, glue_external, glue_internal, is_embedded,
                       load_mesh, oriented_volume, steffen_flex_scan, subdivide_face)
from polyhedra.errors import (FacesDoNotCoincide, IncongruentFaces, InvalidParameters, NonManifoldResult,
                              OrientationConflict, PointNotInterior)
from polyhedra.geometry_core import random_rigid_motion
from polyhedra.steffen import AssemblyTrace, export_steffen_fixture, outward_tetrahedron, steffen_tetrahedron
from test_geometry_core import regular_tetrahedron

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger('test_steffen')

TETRA_ANGLE = math.acos(1.0 / 3.0)


def tetra(names=('D', 'E', 'F', 'L'), scale=1.0):
    vertices, _ = regular_tetrahedron()
    return outward_tetrahedron([tuple(scale * c for c in p) for p in vertices], names)


def bipyramid():
    """Two regular tetrahedra glued on DEF, the second one landing on the far side."""
    t1 = tetra()
    t2 = tetra()
    spec = GluingSpec.from_labels(t1, t2, (('D', 'D'), ('E', 'F'), ('F', 'E')))
    return t1, t2, glue_external(t1, t2, spec, label_suffix="'")


def test_glue_two_tetrahedra():
    """Gluing two tetrahedra gives a triangular bipyramid of twice the volume."""
    logger.info("Testing external gluing...")
    t1, _, (s, sigma) = bipyramid()
    assert sigma == 1
    assert s.n_vertices == 5
    assert len(s.faces) == 6
    assert len(s.edges) == 9
    assert abs(oriented_volume(s) - 2 * oriented_volume(t1)) < 1e-12
    assert is_embedded(s)


def test_glued_boundary_angles_add():
    """Edges of the glued face carry the sum of the two dihedral angles."""
    _, _, (s, _) = bipyramid()
    for a, b in (('D', 'E'), ('E', 'F'), ('F', 'D')):
        assert abs(dihedral_angle(s, s.labelled_edge(a, b)).value - 2 * TETRA_ANGLE) < 1e-12
    assert abs(dihedral_angle(s, s.labelled_edge('D', 'L')).value - TETRA_ANGLE) < 1e-12


def test_volume_additivity_random():
    """Oriented volume adds with the orientation sign of the second part."""
    logger.info("Testing volume additivity on random tetrahedra...")
    rng = np.random.default_rng(21)
    checked = 0
    while checked < 20:
        p = rng.normal(size=(4, 3))
        apex = rng.normal(size=3)
        q = np.vstack([p[:3], apex])
        if min(abs(np.linalg.det(p[1:] - p[0])), abs(np.linalg.det(q[1:] - q[0]))) < 0.3:
            continue
        rotation, translation = random_rigid_motion(rng)
        q = q @ rotation.T + translation
        t1 = outward_tetrahedron([tuple(x) for x in p], ('D', 'E', 'F', 'L'))
        t2 = outward_tetrahedron([tuple(x) for x in q], ('P', 'Q', 'R', 'S'))
        spec = GluingSpec.from_labels(t1, t2, (('D', 'P'), ('E', 'Q'), ('F', 'R')))
        s, sigma = glue_external(t1, t2, spec)
        assert sigma in (1, -1)
        assert abs(oriented_volume(s) - (oriented_volume(t1) + sigma * oriented_volume(t2))) < 1e-10
        checked += 1


def test_orientation_conflict():
    t1 = tetra()
    t2 = tetra()
    spec = GluingSpec.from_labels(t1, t2, (('D', 'D'), ('E', 'F'), ('F', 'E')), sign=-1)
    with pytest.raises(OrientationConflict):
        glue_external(t1, t2, spec)


def test_incongruent_faces():
    t1 = tetra()
    t2 = tetra(scale=1.5)
    spec = GluingSpec.from_labels(t1, t2, (('D', 'D'), ('E', 'F'), ('F', 'E')))
    with pytest.raises(IncongruentFaces):
        glue_external(t1, t2, spec)


def test_bad_correspondence():
    t1 = tetra()
    spec = GluingSpec(t1.face_with('D', 'E', 'F'), 0, ((0, 0), (1, 0), (2, 0)))
    with pytest.raises(InvalidParameters):
        glue_external(t1, tetra(), spec)


def test_internal_gluing_needs_coinciding_faces():
    """The apexes of a bipyramid are apart, so its side faces cannot be glued."""
    _, _, (s, _) = bipyramid()
    lab = s.labels
    with pytest.raises(FacesDoNotCoincide):
        glue_internal(s, s.face_with('D', 'E', 'L'), s.face_with('D', 'E', "L'"),
                      ((lab['D'], lab['D']), (lab['E'], lab['E']), (lab['L'], lab["L'"])))


def test_internal_gluing_non_manifold():
    """Closing up a doubled tetrahedron puts four faces on one edge."""
    t = tetra()
    doubled, sigma = glue_external(t, tetra(), GluingSpec.from_labels(
        t, t, (('D', 'D'), ('E', 'E'), ('F', 'F'))), label_suffix="'")
    assert sigma == -1
    lab = doubled.labels
    assert np.linalg.norm(doubled.vertices[lab['L']] - doubled.vertices[lab["L'"]]) < 1e-12
    with pytest.raises(NonManifoldResult):
        glue_internal(doubled, doubled.face_with('D', 'E', 'L'), doubled.face_with('D', 'E', "L'"),
                      ((lab['D'], lab['D']), (lab['E'], lab['E']), (lab['L'], lab["L'"])))


def test_internal_gluing_same_face():
    t = tetra()
    f = t.face_with('D', 'E', 'F')
    with pytest.raises(InvalidParameters):
        glue_internal(t, f, f, tuple((v, v) for v in t.faces[f]))


def test_subdivide_face():
    """Subdividing a face keeps the volume and adds flat edges."""
    logger.info("Testing face subdivision...")
    t = tetra()
    s = subdivide_face(t, t.face_with('D', 'E', 'F'), (Fraction(1, 3),) * 3, name='N')
    assert s.n_vertices == 5
    assert len(s.faces) == 6
    assert len(s.edges) == 9
    assert abs(oriented_volume(s) - oriented_volume(t)) < 1e-12
    n = s.labels['N']
    for k, e in enumerate(s.edges):
        value = dihedral_angle(s, k).value
        if n in e.endpoints:
            assert abs(value - math.pi) < 1e-12
        else:
            assert abs(value - TETRA_ANGLE) < 1e-12
    assert s.exact is not None


def test_subdivide_boundary_point():
    t = tetra()
    with pytest.raises(PointNotInterior):
        subdivide_face(t, 0, (1, 0, 0))
    with pytest.raises(PointNotInterior):
        subdivide_face(t, 0, (1, 1))


def test_steffen_tetrahedron():
    t = steffen_tetrahedron()
    expected = {('D', 'E'): 12, ('E', 'F'): 12, ('F', 'L'): 12, ('L', 'D'): 12, ('D', 'F'): 17, ('E', 'L'): 11}
    for (a, b), value in expected.items():
        assert abs(t.edges[t.labelled_edge(a, b)].length - value) < 1e-12
    assert oriented_volume(t) > 0


def test_assembly_trace():
    trace = AssemblyTrace()
    trace.add_base('T', 'convex')
    trace.add_base('O', 'bricard')
    assert trace.class_index == 0
    assert trace.record('glue_external', 'S1', ('T', 'O')) == 1
    assert trace.record('glue_internal', 'S', ('S1',)) == 2
    assert trace.class_index == 2
    with pytest.raises(InvalidParameters):
        trace.add_base('X', 'sphere')
    with pytest.raises(InvalidParameters):
        trace.record('glue_internal', 'Y', ('missing',))


def test_steffen_combinatorics():
    """The reference Steffen polyhedron has 9 vertices, 14 faces and 21 edges and is embedded."""
    logger.info("Testing the Steffen assembly...")
    a = build_steffen()
    s = a.surface
    assert s.n_vertices == 9
    assert len(s.faces) == 14
    assert len(s.edges) == 21
    for pair in (('E', 'L'), ('A1', 'B2'), ("A1'", "B2'")):
        with pytest.raises(KeyError):
            s.labelled_edge(*pair)
    assert abs(s.edges[s.labelled_edge('D', 'F')].length - 17) < 1e-9
    assert a.trace.class_index == 3
    assert a.coupling_residual < 1e-9
    assert is_embedded(s)


def test_steffen_scan():
    """Volume and mean curvature stay constant while the Steffen polyhedron flexes."""
    logger.info("Testing a short Steffen flex scan...")
    scan = steffen_flex_scan(samples=8)
    diameter = scan.path.samples[0].surface.diameter()
    assert len(scan.frame) == 8
    assert scan.volume_spread() < 1e-9 * diameter ** 3
    mc = scan.frame['mean_curvature']
    assert float(mc.max() - mc.min()) < 1e-9 * diameter
    assert scan.frame['face_drift'].max() < 1e-9
    assert scan.verdict.constant
    angles = [c for c in scan.frame.columns if c.startswith('alpha_')]
    assert len(angles) == 21
    assert max(scan.frame[c].std() for c in angles) > 1e-6


def test_export_fixture(tmp_path):
    a = build_steffen()
    obj = export_steffen_fixture(tmp_path, a)
    s = load_mesh(obj)
    assert s.n_vertices == 9
    assert len(s.faces) == 14
    assert s.labels['D'] == a.surface.labels['D']
    trace = json.loads((tmp_path / 'steffen.trace.json').read_text())
    assert trace['class_index'] == 3


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    logger.info("Starting Steffen tests...")
    test_glue_two_tetrahedra()
    test_glued_boundary_angles_add()
    test_volume_additivity_random()
    test_orientation_conflict()
    test_incongruent_faces()
    test_bad_correspondence()
    test_internal_gluing_needs_coinciding_faces()
    test_internal_gluing_non_manifold()
    test_internal_gluing_same_face()
    test_subdivide_face()
    test_subdivide_boundary_point()
    test_steffen_tetrahedron()
    test_assembly_trace()
    test_steffen_combinatorics()
    test_steffen_scan()
    with tempfile.TemporaryDirectory() as d:
        test_export_fixture(Path(d))
    logger.info("All Steffen tests passed")
