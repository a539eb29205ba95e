"""
Oriented dihedral angles with branch tracking, vertex links, oriented volume,
total mean curvature and Dehn vectors.
"""
from dataclasses import dataclass
from enum import Enum

import mpmath as mp
import numpy as np
import pandas as pd

from .errors import BranchAmbiguity, DegenerateEdge, RadiusTooLarge
from .geometry_core import (mp_cross, mp_dot, mp_scale, mp_sub, mp_unit,
                            point_triangle_distance)
from .log import get_logger

logger = get_logger('invariants')

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class DihedralAngle:
    edge: int
    value: float
    normals: tuple


@dataclass(frozen=True)
class DihedralBranch:
    """Continuous selection of one edge's angle along a path; windings[k] is the 2*pi multiple added at sample k."""
    edge: int
    values: np.ndarray
    windings: tuple

    @property
    def offset(self):
        return self.windings[0]


class LinkShape(str, Enum):
    CONVEX = 'convex'
    SELF_INTERSECTING = 'self-intersecting'
    DEGENERATE_FLAT = 'degenerate-flat'


@dataclass(frozen=True)
class VertexLink:
    vertex: int
    radius: float
    neighbors: tuple
    points: np.ndarray  # unit directions to the neighbours, in link order
    arcs: tuple  # arcs[k] joins points[k] and points[k+1]
    angles: tuple  # angles[k] is the dihedral angle at edge (vertex, neighbors[k])


@dataclass(frozen=True)
class DehnVector:
    entries: tuple  # (length, angle) per edge, in edge order

    def evaluate(self, functional):
        return sum(length * functional(angle) for length, angle in self.entries)


def _unit(v):
    return v / np.linalg.norm(v)


def _edge_frame(p_i, p_j, third1, third2, face1_pts):
    e = p_j - p_i
    length = np.linalg.norm(e)
    e = e / length
    n1 = _unit(np.cross(face1_pts[1] - face1_pts[0], face1_pts[2] - face1_pts[0]))
    u1 = third1 - p_i
    u1 = _unit(u1 - np.dot(u1, e) * e)
    u2 = third2 - p_i
    u2 = _unit(u2 - np.dot(u2, e) * e)
    return n1, u1, u2


def dihedral_angle(surface, edge):
    """
    Principal value in (0, 2*pi] of the oriented dihedral angle at an edge.

    The angle is the rotation carrying the half-plane of the face that runs the
    edge as i -> j onto the other face's half-plane, turning away from the first
    face's normal. A flat edge gives pi, coincident half-planes give 2*pi.

    Args:
        surface: PolyhedralSurface
        edge: Edge index or Edge

    Returns:
        DihedralAngle: Edge index, principal value and the two face normals
    """
    k = edge if isinstance(edge, (int, np.integer)) else surface.edges.index(edge)
    e = surface.edges[k]
    if e.length <= 0.0:
        raise DegenerateEdge(f"Edge {e.endpoints} has zero length")
    i, j = e.endpoints
    f1, f2 = surface.faces[e.adjacent_faces[0]], surface.faces[e.adjacent_faces[1]]
    a = next(v for v in f1 if v not in (i, j))
    b = next(v for v in f2 if v not in (i, j))
    v = surface.vertices
    n1, u1, u2 = _edge_frame(v[i], v[j], v[a], v[b], v[list(f1)])
    f2_pts = v[list(f2)]
    n2 = _unit(np.cross(f2_pts[1] - f2_pts[0], f2_pts[2] - f2_pts[0]))
    theta = float(np.arctan2(np.dot(u2, -n1), np.dot(u2, u1)))
    if theta <= 0.0:
        theta += TWO_PI
    return DihedralAngle(k, theta, (n1, n2))


def principal_angles(surface):
    return np.array([dihedral_angle(surface, k).value for k in range(len(surface.edges))])


def dihedral_angles_mp(surface, exact=None):
    """Principal dihedral values of every edge computed in mpmath from extended-precision vertices."""
    pts = exact if exact is not None else surface.exact_vertices()
    out = []
    for e in surface.edges:
        i, j = e.endpoints
        f1, f2 = surface.faces[e.adjacent_faces[0]], surface.faces[e.adjacent_faces[1]]
        a = next(v for v in f1 if v not in (i, j))
        b = next(v for v in f2 if v not in (i, j))
        ed = mp_unit(mp_sub(pts[j], pts[i]))
        n1 = mp_unit(mp_cross(mp_sub(pts[f1[1]], pts[f1[0]]), mp_sub(pts[f1[2]], pts[f1[0]])))
        u1 = mp_sub(pts[a], pts[i])
        u1 = mp_unit(mp_sub(u1, mp_scale(mp_dot(u1, ed), ed)))
        u2 = mp_sub(pts[b], pts[i])
        u2 = mp_unit(mp_sub(u2, mp_scale(mp_dot(u2, ed), ed)))
        theta = mp.atan2(-mp_dot(u2, n1), mp_dot(u2, u1))
        if theta <= 0:
            theta += 2 * mp.pi
        out.append(theta)
    return out


def unwrap_series(values, start=None):
    """
    Lift a sequence of principal values to a continuous branch.

    Returns:
        tuple: (lifted values, winding numbers)
    """
    values = np.asarray(values, dtype=float)
    lifted = np.empty_like(values)
    windings = []
    prev = values[0] if start is None else start
    m0 = int(round((prev - values[0]) / TWO_PI))
    lifted[0] = values[0] + TWO_PI * m0
    windings.append(m0)
    for k in range(1, len(values)):
        m = int(round((lifted[k - 1] - values[k]) / TWO_PI))
        candidate = values[k] + TWO_PI * m
        jump = abs(candidate - lifted[k - 1])
        if jump >= np.pi:
            raise BranchAmbiguity(f"Jump of {jump:.4f} rad between samples {k - 1} and {k}; path under-sampled")
        lifted[k] = candidate
        windings.append(m)
    return lifted, tuple(windings)


def _surfaces_of(path):
    return path.surfaces() if hasattr(path, 'surfaces') else list(path)


def track_branches(path):
    """
    Continuous angle branch per edge along a path (a FlexPath or a list of surfaces).

    The branch starts at the principal value of the first sample.
    """
    surfaces = _surfaces_of(path)
    raw = np.array([principal_angles(s) for s in surfaces])
    branches = []
    for k in range(raw.shape[1]):
        try:
            values, windings = unwrap_series(raw[:, k])
        except BranchAmbiguity as e:
            raise BranchAmbiguity(f"Edge {surfaces[0].edge_name(k)}: {e}")
        branches.append(DihedralBranch(k, values, windings))
    return branches


def branch_matrix(branches):
    """Samples x edges array of branch values."""
    return np.column_stack([b.values for b in branches])


# ---------------------------------------------------------------------------
# vertex links

def _link_order(surface, v):
    nxt = {}
    for f in surface.faces:
        if v in f:
            r = f.index(v)
            a, b = f[(r + 1) % 3], f[(r + 2) % 3]
            nxt[a] = b
    start = min(nxt)
    order = [start]
    while nxt[order[-1]] != start:
        order.append(nxt[order[-1]])
    return order


def plane_angle(surface, v, a, b):
    """Angle at vertex v between the segments to a and to b."""
    p = surface.vertices
    x, y = p[a] - p[v], p[b] - p[v]
    return float(np.arctan2(np.linalg.norm(np.cross(x, y)), np.dot(x, y)))


def labelled_angle(surface, a, v, b):
    """Plane angle written the usual way: labelled_angle(s, 'B2', 'A1', 'C1') is angle B2A1C1."""
    lab = surface.labels
    return plane_angle(surface, lab[v], lab[a], lab[b])


def vertex_link(surface, v, r):
    """
    Spherical polygon cut out by a sphere of radius r around vertex v.

    Arcs are the face angles at v, interior angles the dihedral angles of the
    incident edges.
    """
    neighbors = _link_order(surface, v)
    p = surface.vertices
    shortest = min(np.linalg.norm(p[w] - p[v]) for w in neighbors)
    if r >= shortest:
        raise RadiusTooLarge(f"Radius {r} is not below the shortest incident edge {shortest}")
    for f in surface.faces:
        if v in f:
            continue
        d = point_triangle_distance(p[v], *p[list(f)])
        # faces passing through the vertex (flat positions) do not restrict the radius
        if 0.0 < d <= r:
            raise RadiusTooLarge(f"Radius {r} reaches face {f} at distance {d}")
    points = np.array([_unit(p[w] - p[v]) for w in neighbors])
    n = len(neighbors)
    arcs = tuple(plane_angle(surface, v, neighbors[k], neighbors[(k + 1) % n]) for k in range(n))
    angles = tuple(dihedral_angle(surface, surface.edge_index(v, w)).value for w in neighbors)
    return VertexLink(v, r, tuple(neighbors), points, arcs, angles)


def _arcs_cross(p, q, r, s, eps=1e-12):
    n1 = np.cross(p, q)
    n2 = np.cross(r, s)
    line = np.cross(n1, n2)
    if np.linalg.norm(line) < eps:
        return False
    x = _unit(line)
    for c in (x, -x):
        if (np.dot(np.cross(p, c), n1) > eps and np.dot(np.cross(c, q), n1) > eps
                and np.dot(np.cross(r, c), n2) > eps and np.dot(np.cross(c, s), n2) > eps):
            return True
    return False


def link_convexity(link, flat_tolerance=1e-9):
    """Classify a quadrilateral link as convex, self-intersecting or degenerate-flat."""
    pts = link.points
    if len(pts) != 4:
        raise ValueError(f"Link convexity is defined for quadrilateral links, got {len(pts)} vertices")
    sigma = np.linalg.svd(pts, compute_uv=False)
    if sigma[-1] < flat_tolerance:
        return LinkShape.DEGENERATE_FLAT
    if _arcs_cross(pts[0], pts[1], pts[2], pts[3]) or _arcs_cross(pts[1], pts[2], pts[3], pts[0]):
        return LinkShape.SELF_INTERSECTING
    return LinkShape.CONVEX


# ---------------------------------------------------------------------------
# volume, mean curvature, Dehn vectors

def oriented_volume(surface):
    """Signed volume (1/6) sum det(v_i, v_j, v_k), positive for outward orientation."""
    v = surface.vertices - surface.vertices.mean(axis=0)
    f = np.asarray(surface.faces)
    return float(np.einsum('ij,ij->i', v[f[:, 0]], np.cross(v[f[:, 1]], v[f[:, 2]])).sum() / 6.0)


def oriented_volume_mp(surface, exact=None):
    pts = exact if exact is not None else surface.exact_vertices()
    total = mp.mpf(0)
    for i, j, k in surface.faces:
        total += mp_dot(pts[i], mp_cross(pts[j], pts[k]))
    return total / 6


def total_mean_curvature(surface, angles=None):
    """Sum over edges of |l| (pi - alpha_l); principal values unless branch values are given."""
    if angles is None:
        angles = principal_angles(surface)
    return float(np.dot(surface.lengths(), np.pi - np.asarray(angles)))


def dehn_vector(surface, angles=None):
    if len(surface.faces) < 4:
        raise ValueError(f"A closed surface needs at least 4 faces, got {len(surface.faces)}")
    if angles is None:
        angles = principal_angles(surface)
    return DehnVector(tuple((e.length, float(a)) for e, a in zip(surface.edges, angles)))


def equator_dehn_sum(surface, equator, functional, angles=None):
    """
    Sum of |l| f(alpha_l) over the four edges of an equator.

    Args:
        surface: Labelled octahedron
        equator: Equator (cyclic vertex labels)
        functional: Callable evaluator with f(pi) = 0 (raises FunctionalUndefined off its span)
        angles: Branch values per edge at this sample; principal values by default

    Returns:
        float: The equator's Dehn sum
    """
    if angles is None:
        angles = principal_angles(surface)
    total = 0.0
    for k in equator.edge_indices(surface):
        total += surface.edges[k].length * float(functional(angles[k]))
    return total


def face_side_lengths(surface):
    p = surface.vertices
    return np.array([[np.linalg.norm(p[f[(r + 1) % 3]] - p[f[r]]) for r in range(3)] for f in surface.faces])


def invariant_trace(path, branches=None):
    """
    Per-sample invariant table: t, volume, mean curvature and one column per edge branch.

    Returns:
        pandas.DataFrame: One row per path sample
    """
    surfaces = _surfaces_of(path)
    if branches is None:
        branches = track_branches(surfaces)
    angles = branch_matrix(branches)
    ts = path.parameters() if hasattr(path, 'parameters') else np.arange(len(surfaces), dtype=float)
    data = {
        't': ts,
        'volume': [oriented_volume(s) for s in surfaces],
        'mean_curvature': [total_mean_curvature(s, angles[k]) for k, s in enumerate(surfaces)],
    }
    for k in range(len(surfaces[0].edges)):
        data[f'alpha_{surfaces[0].edge_name(k)}'] = angles[:, k]
    return pd.DataFrame(data)
