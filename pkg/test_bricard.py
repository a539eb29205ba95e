"""
Tests for the Bricard octahedron constructions.
"""
import logging

import mpmath as mp
import numpy as np
import pytest

from polyhedra import (TYPE2_REFERENCE, TYPE3_REFERENCE, Type1Params, Type3FlatParams, bricard_type1,
                       bricard_type2, bricard_type3_flat, equators, oriented_volume)
from polyhedra.bricard import (admissible_intervals, flat_identities, flex_parameter_of, reference_parameter,
                               tangent_length_identities)
from polyhedra.errors import InvalidParameters, InvalidTangentConfig, UnreachableConfiguration
from polyhedra.invariants import principal_angles
from polyhedra.relations import napier_left_sides

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger('test_bricard')

STEFFEN_LENGTHS = Type1Params(a1b1=5, a1b2=11, c1a1=12, c1b1=10, c1a2=10, c1b2=12)


def length(surface, a, b):
    return surface.edges[surface.labelled_edge(a, b)].length


def test_type1_lengths():
    """The type-1 octahedron has the requested edges and the symmetric ones."""
    logger.info("Testing type-1 edge lengths...")
    s = bricard_type1(STEFFEN_LENGTHS)
    expected = {
        ('A1', 'B1'): 5, ('A2', 'B2'): 5, ('A1', 'B2'): 11, ('A2', 'B1'): 11,
        ('C1', 'A1'): 12, ('C2', 'A2'): 12, ('C1', 'B1'): 10, ('C2', 'B2'): 10,
        ('C1', 'A2'): 10, ('C2', 'A1'): 10, ('C1', 'B2'): 12, ('C2', 'B1'): 12,
    }
    for (a, b), value in expected.items():
        assert abs(length(s, a, b) - value) < 1e-12, (a, b)


def test_type1_half_turn():
    """C2 is the half-turn image of C1 about the line through the midpoints of A1A2 and B1B2."""
    s = bricard_type1(STEFFEN_LENGTHS)
    v = s.vertices
    lab = s.labels
    m_a = 0.5 * (v[lab['A1']] + v[lab['A2']])
    m_b = 0.5 * (v[lab['B1']] + v[lab['B2']])
    d = (m_b - m_a) / np.linalg.norm(m_b - m_a)
    q = v[lab['C1']] - m_a
    image = m_a + 2 * np.dot(q, d) * d - q
    assert np.max(np.abs(image - v[lab['C2']])) < 1e-12


def test_type1_flexes():
    """Two parameters give the same edge lengths and different dihedral angles."""
    lo, hi = max(admissible_intervals(STEFFEN_LENGTHS), key=lambda iv: iv[1] - iv[0])
    s1 = bricard_type1(STEFFEN_LENGTHS, lo + 0.3 * (hi - lo))
    s2 = bricard_type1(STEFFEN_LENGTHS, lo + 0.7 * (hi - lo))
    assert np.max(np.abs(s1.lengths() - s2.lengths())) < 1e-12
    assert np.max(np.abs(principal_angles(s1) - principal_angles(s2))) > 1e-3


def test_flex_parameter_recovered():
    t = reference_parameter(STEFFEN_LENGTHS)
    assert abs(flex_parameter_of(bricard_type1(STEFFEN_LENGTHS, t)) - t) < 1e-10


def test_unreachable_parameter():
    """At t = 0 the directions to B1 and B2 are too close for the four-bar to close."""
    with pytest.raises(UnreachableConfiguration):
        bricard_type1(STEFFEN_LENGTHS, 0.0)


def test_invalid_triangle():
    with pytest.raises(InvalidParameters):
        Type1Params(a1b1=30, a1b2=11, c1a1=12, c1b1=10, c1a2=10, c1b2=12)


def test_type2_mirror():
    """The type-2 octahedron is symmetric in the bisector plane of A1A2."""
    logger.info("Testing type-2 mirror symmetry...")
    s = bricard_type2(TYPE2_REFERENCE)
    v = s.vertices
    lab = s.labels
    n = v[lab['A2']] - v[lab['A1']]
    n = n / np.linalg.norm(n)
    m = 0.5 * (v[lab['A1']] + v[lab['A2']])
    c1 = v[lab['C1']]
    mirrored = c1 - 2 * np.dot(c1 - m, n) * n
    assert np.max(np.abs(mirrored - v[lab['C2']])) < 1e-12
    for name in ('B1', 'B2'):
        assert abs(np.dot(v[lab[name]] - m, n)) < 1e-12
    assert abs(length(s, 'A1', 'B2') - length(s, 'A2', 'B2')) < 1e-12
    assert abs(length(s, 'A1', 'B1') - length(s, 'A2', 'B1')) < 1e-12
    assert abs(length(s, 'C2', 'A2') - 7) < 1e-12


def test_type3_flat():
    """The flat type-3 octahedron lies in a plane and has zero volume."""
    logger.info("Testing the flat type-3 construction...")
    s, tangency = bricard_type3_flat(TYPE3_REFERENCE)
    assert np.max(np.abs(s.vertices[:, 2])) == 0.0
    assert abs(oriented_volume(s)) < 1e-12
    assert tangency.k_a_residual < 1e-10
    assert tangency.rho_a > 0


def test_type3_tangent_lengths():
    s, tangency = bricard_type3_flat(TYPE3_REFERENCE)
    residuals = tangent_length_identities(s, tangency)
    scale = max(s.lengths())
    assert max(residuals.values()) < 1e-12 * scale
    assert abs(tangency.tangent_lengths[('A1', 'c11')] - tangency.tangent_lengths[('A1', 'c12')]) < 1e-12 * scale


def test_type3_plane_angles():
    """Supplementary plane angles at C1 and the opposite-angle equalities."""
    s, _ = bricard_type3_flat(TYPE3_REFERENCE)
    residuals = flat_identities(s)
    assert residuals['supplementary_C1_1'] < 1e-12
    assert residuals['supplementary_C1_2'] < 1e-12
    assert max(residuals.values()) < 1e-10


def test_type3_symmetric_example():
    """rho_C = 1, rho_B = 2 with centrally symmetric tangents: flat, volume 0, ratio rho_C / rho_B at A1 and A2."""
    logger.info("Testing the symmetric type-3 example...")
    with mp.workdps(50):
        normals = (mp.mpf(0), mp.pi / 6, mp.pi, 7 * mp.pi / 6)
    s, tangency = bricard_type3_flat(Type3FlatParams(1.0, 2.0, normals))
    assert np.max(np.abs(s.vertices[:, 2])) == 0.0
    assert abs(oriented_volume(s)) < 1e-12
    v = s.vertices
    lab = s.labels
    assert np.max(np.abs(v[lab['A1']] + v[lab['A2']])) < 1e-12
    assert np.max(np.abs(v[lab['C1']] + v[lab['C2']])) < 1e-12
    residuals = flat_identities(s)
    for name in ('opposite_A1_1', 'opposite_A1_2', 'opposite_A2_1', 'opposite_A2_2', 'half_angle_ratio_A1_A2'):
        assert residuals[name] < 1e-12, name
    for left in napier_left_sides(s):
        assert abs(abs(left) - 0.5) < 1e-12
    assert ('B1', 'B2', 'C1') in tangency.collinear


def test_type3_not_convex():
    with pytest.raises(InvalidTangentConfig):
        bricard_type3_flat(Type3FlatParams.from_degrees(1.0, 0.5, (0.0, 10.0, 20.0, 30.0)))


def test_equators_partition_edges():
    """The three equators use every edge exactly once."""
    s = bricard_type1(STEFFEN_LENGTHS)
    names = [e.name for e in equators()]
    assert names == ['A1B1A2B2', 'A1C1A2C2', 'B1C1B2C2']
    used = [k for e in equators() for k in e.edge_indices(s)]
    assert sorted(used) == list(range(12))


def test_equator_opposite_pairs():
    pairs = equators()[0].opposite_pairs()
    assert len(pairs) == 2
    flat = [frozenset(edge) for pair in pairs for edge in pair]
    assert len(set(flat)) == 4


if __name__ == "__main__":
    logger.info("Starting Bricard tests...")
    test_type1_lengths()
    test_type1_half_turn()
    test_type1_flexes()
    test_flex_parameter_recovered()
    test_unreachable_parameter()
    test_invalid_triangle()
    test_type2_mirror()
    test_type3_flat()
    test_type3_tangent_lengths()
    test_type3_plane_angles()
    test_type3_symmetric_example()
    test_type3_not_convex()
    test_equators_partition_edges()
    test_equator_opposite_pairs()
    logger.info("All Bricard tests passed")
