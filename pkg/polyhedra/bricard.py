"""
Constructors for the three types of Bricard octahedra.

Types 1 and 2 are built from the spherical four-bar linkage formed by the four
faces around C1; the half-turn (type 1) or the mirror (type 2) then places C2.
Type 3 is built in its flat position from two concentric circles.
All constructions run in mpmath and keep the extended-precision vertices on the
returned surface.
"""
import math
from dataclasses import dataclass, field
from itertools import combinations

import mpmath as mp
import numpy as np

from .errors import InvalidParameters, InvalidTangentConfig, UnreachableConfiguration
from .geometry_core import (build_surface, mp_add, mp_cross, mp_dot, mp_norm,
                            mp_scale, mp_sub, mp_unit)
from .invariants import labelled_angle as ang
from .log import get_logger
from .relations import napier_left_sides

logger = get_logger('bricard')

VERTEX_NAMES = ('A1', 'A2', 'B1', 'B2', 'C1', 'C2')


@dataclass(frozen=True)
class OctahedronLabels:
    indices: dict = field(default_factory=lambda: {name: k for k, name in enumerate(VERTEX_NAMES)})

    def __post_init__(self):
        if sorted(self.indices) != sorted(VERTEX_NAMES):
            raise InvalidParameters(f"Octahedron labels must be exactly {VERTEX_NAMES}")
        if len(set(self.indices.values())) != 6:
            raise InvalidParameters("Octahedron labels must name six distinct vertices")

    def faces(self):
        """
        The eight triangles A_i B_j C_k, oriented consistently.

        A triangle keeps the order (A, B, C) when the number of index-2 vertices
        in it is even and is reversed otherwise.
        """
        ix = self.indices
        faces = []
        for i in (1, 2):
            for j in (1, 2):
                for k in (1, 2):
                    a, b, c = ix[f'A{i}'], ix[f'B{j}'], ix[f'C{k}']
                    faces.append((a, b, c) if (i + j + k) % 2 == 1 else (a, c, b))
        return faces


@dataclass(frozen=True)
class Equator:
    vertices: tuple  # cyclic labels, e.g. ('A1', 'B1', 'A2', 'B2')

    @property
    def name(self):
        return ''.join(self.vertices)

    def edges(self):
        v = self.vertices
        return tuple((v[k], v[(k + 1) % 4]) for k in range(4))

    def edge_indices(self, surface):
        return [surface.labelled_edge(a, b) for a, b in self.edges()]

    def opposite_pairs(self):
        """Opposite edges (l, l*) of the equator."""
        e = self.edges()
        return ((e[0], e[2]), (e[1], e[3]))


def equators(labels=None):
    """The three equators A1B1A2B2, A1C1A2C2, B1C1B2C2."""
    if labels is not None:
        OctahedronLabels(dict(labels))
    return (Equator(('A1', 'B1', 'A2', 'B2')),
            Equator(('A1', 'C1', 'A2', 'C2')),
            Equator(('B1', 'C1', 'B2', 'C2')))


def symmetric_pairs(kind):
    """Edge pairs exchanged by the symmetry of a type-1 or type-2 octahedron."""
    if kind == 'type1':
        return ((('A1', 'B1'), ('A2', 'B2')), (('A1', 'B2'), ('A2', 'B1')),
                (('A1', 'C1'), ('A2', 'C2')), (('A1', 'C2'), ('A2', 'C1')),
                (('B1', 'C1'), ('B2', 'C2')), (('B1', 'C2'), ('B2', 'C1')))
    if kind == 'type2':
        return ((('A1', 'B1'), ('A2', 'B1')), (('A1', 'B2'), ('A2', 'B2')),
                (('C1', 'B1'), ('C2', 'B1')), (('C1', 'B2'), ('C2', 'B2')),
                (('A1', 'C1'), ('A2', 'C2')), (('A1', 'C2'), ('A2', 'C1')))
    raise ValueError(f"No symmetric pairs for octahedron kind {kind!r}")


# ---------------------------------------------------------------------------
# types 1 and 2

def _check_triangle(p, q, r, what):
    if min(p, q, r) <= 0:
        raise InvalidParameters(f"Lengths of {what} must be positive: {p}, {q}, {r}")
    if not (p < q + r and q < p + r and r < p + q):
        raise InvalidParameters(f"Triangle inequality fails strictly for {what}: {p}, {q}, {r}")


@dataclass(frozen=True)
class Type1Params:
    """|A1B1| = |A2B2| = a1b1 and |A1B2| = |A2B1| = a1b2, plus the four edges at C1."""
    a1b1: float
    a1b2: float
    c1a1: float
    c1b1: float
    c1a2: float
    c1b2: float
    t: float = None
    branch: int = 1

    def __post_init__(self):
        _validate_four_bar(self)

    def star_lengths(self):
        """Opposite sides of the faces around C1, in the order C1A1B1, C1B1A2, C1A2B2, C1B2A1."""
        return (self.a1b1, self.a1b2, self.a1b1, self.a1b2)


@dataclass(frozen=True)
class Type2Params:
    """|A1B1| = |B1A2| = a1b1 and |A1B2| = |B2A2| = a1b2, plus the four edges at C1."""
    a1b1: float
    a1b2: float
    c1a1: float
    c1b1: float
    c1a2: float
    c1b2: float
    t: float = None
    branch: int = 1

    def __post_init__(self):
        _validate_four_bar(self)

    def star_lengths(self):
        return (self.a1b1, self.a1b1, self.a1b2, self.a1b2)


def _validate_four_bar(p):
    if p.branch not in (1, -1):
        raise InvalidParameters(f"branch must be +1 or -1, got {p.branch}")
    s = p.star_lengths()
    _check_triangle(p.c1a1, p.c1b1, s[0], 'face C1A1B1')
    _check_triangle(p.c1b1, p.c1a2, s[1], 'face C1B1A2')
    _check_triangle(p.c1a2, p.c1b2, s[2], 'face C1A2B2')
    _check_triangle(p.c1b2, p.c1a1, s[3], 'face C1B2A1')


def _law_of_cosines(p, q, r):
    """Angle opposite r in a triangle with sides p, q, r."""
    return mp.acos((mp.mpf(p) ** 2 + mp.mpf(q) ** 2 - mp.mpf(r) ** 2) / (2 * mp.mpf(p) * mp.mpf(q)))


def _star_angles(p):
    s = p.star_lengths()
    return (_law_of_cosines(p.c1a1, p.c1b1, s[0]),
            _law_of_cosines(p.c1b1, p.c1a2, s[1]),
            _law_of_cosines(p.c1a2, p.c1b2, s[2]),
            _law_of_cosines(p.c1b2, p.c1a1, s[3]))


def _closure(p, t):
    """Solve the spherical four-bar at C1 for input angle t; returns (u1, u2, u4, u3 in-plane part, normal, c^2)."""
    phi12, phi23, phi34, phi41 = _star_angles(p)
    t = mp.mpf(t)
    u1 = (mp.mpf(1), mp.mpf(0), mp.mpf(0))
    u2 = (mp.cos(phi12), mp.sin(phi12), mp.mpf(0))
    u4 = (mp.cos(phi41), mp.sin(phi41) * mp.cos(t), mp.sin(phi41) * mp.sin(t))
    g = mp_dot(u2, u4)
    den = 1 - g * g
    if den < mp.mpf(10) ** (-2 * mp.mp.dps // 3):
        raise UnreachableConfiguration(f"Directions to B1 and B2 are parallel at t={float(t)}")
    a = (mp.cos(phi23) - g * mp.cos(phi34)) / den
    b = (mp.cos(phi34) - g * mp.cos(phi23)) / den
    c2 = (1 - (a * a + b * b + 2 * a * b * g)) / den
    return u1, u2, u4, mp_add(mp_scale(a, u2), mp_scale(b, u4)), mp_cross(u2, u4), c2


def closure_margin(p, t, dps=30):
    """Squared out-of-plane coefficient of the four-bar; negative outside the closure range."""
    with mp.workdps(dps):
        try:
            return float(_closure(p, t)[5])
        except UnreachableConfiguration:
            return -1.0


def _star(p, t, dps):
    u1, u2, u4, base, normal, c2 = _closure(p, t)
    if c2 < 0:
        raise UnreachableConfiguration(f"Four-bar at C1 does not close for t={float(t)} (c^2={float(c2):.3e})")
    u3 = mp_add(base, mp_scale(p.branch * mp.sqrt(c2), normal))
    return {
        'C1': (mp.mpf(0), mp.mpf(0), mp.mpf(0)),
        'A1': mp_scale(mp.mpf(p.c1a1), u1),
        'B1': mp_scale(mp.mpf(p.c1b1), u2),
        'A2': mp_scale(mp.mpf(p.c1a2), u3),
        'B2': mp_scale(mp.mpf(p.c1b2), u4),
    }


def _surface_from_points(points, labels=None):
    labels = labels or OctahedronLabels()
    exact = [None] * 6
    for name, idx in labels.indices.items():
        exact[idx] = points[name]
    floats = [tuple(float(c) for c in p) for p in exact]
    return build_surface(floats, labels.faces(), labels.indices, tuple(exact))


def _resolve_t(p, t):
    if t is None:
        t = p.t
    if t is None:
        t = reference_parameter(p)
    return t


def bricard_type1(p, t=None, dps=50):
    """
    Type-1 (line-symmetric) octahedron at flex parameter t.

    t is the dihedral angle of the four-bar at edge C1A1; C2 is the image of C1
    under the half-turn about the line through the midpoints of A1A2 and B1B2.

    Args:
        p: Type1Params
        t: Flex parameter (defaults to p.t, then to the reference parameter)
        dps: Working precision in decimal digits

    Returns:
        PolyhedralSurface: Labelled octahedron carrying its extended-precision vertices
    """
    with mp.workdps(dps):
        return _surface_from_points(type1_points(p, _resolve_t(p, t), dps))


def type1_points(p, t, dps=50):
    """Labelled extended-precision vertices of the type-1 octahedron at t (evaluated at the current precision)."""
    pts = _star(p, t, dps)
    m_a = mp_scale(mp.mpf(1) / 2, mp_add(pts['A1'], pts['A2']))
    m_b = mp_scale(mp.mpf(1) / 2, mp_add(pts['B1'], pts['B2']))
    d = mp_sub(m_b, m_a)
    if mp_norm(d) < mp.mpf(10) ** (-dps // 2):
        d = mp_cross(mp_sub(pts['A2'], pts['A1']), mp_sub(pts['B2'], pts['B1']))
    pts['C2'] = mp_half_turn(pts['C1'], m_a, d)
    return pts


def bricard_type2(p, t=None, dps=50):
    """Type-2 (plane-symmetric) octahedron: C2 is C1 mirrored in the bisector plane of A1A2."""
    with mp.workdps(dps):
        pts = _star(p, _resolve_t(p, t), dps)
        m_a = mp_scale(mp.mpf(1) / 2, mp_add(pts['A1'], pts['A2']))
        n = mp_unit(mp_sub(pts['A2'], pts['A1']))
        pts['C2'] = mp_reflect(pts['C1'], m_a, n)
        return _surface_from_points(pts)


def mp_half_turn(point, line_point, direction):
    d = mp_unit(direction)
    q = mp_sub(point, line_point)
    return mp_add(line_point, mp_sub(mp_scale(2 * mp_dot(q, d), d), q))


def mp_reflect(point, plane_point, normal):
    q = mp_sub(point, plane_point)
    return mp_sub(point, mp_scale(2 * mp_dot(q, normal), normal))


def admissible_intervals(p, resolution=720, dps=30):
    """
    Closure intervals of the four-bar input angle on (-pi, pi].

    An interval that wraps across pi is reported with its upper end beyond pi.

    Returns:
        list: (lo, hi) pairs, endpoints refined by bisection
    """
    ts = np.linspace(-math.pi, math.pi, resolution + 1)
    ok = [closure_margin(p, t, dps) > 0 for t in ts]

    def refine(lo, hi):
        # lo feasible side, hi infeasible side
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if closure_margin(p, mid, dps) > 0:
                lo = mid
            else:
                hi = mid
        return lo

    intervals = []
    k = 0
    n = len(ts)
    while k < n:
        if not ok[k]:
            k += 1
            continue
        start = k
        while k + 1 < n and ok[k + 1]:
            k += 1
        lo = ts[start] if start == 0 else refine(ts[start], ts[start - 1])
        hi = ts[k] if k == n - 1 else refine(ts[k], ts[k + 1])
        intervals.append([lo, hi])
        k += 1
    if len(intervals) > 1 and ok[0] and ok[-1]:
        first = intervals.pop(0)
        intervals[-1][1] = first[1] + 2 * math.pi
    if len(intervals) == 1 and ok[0] and ok[-1] and all(ok):
        intervals = [[-math.pi, math.pi]]
    logger.debug(f"Closure intervals: {intervals}")
    return [tuple(iv) for iv in intervals]


def reference_parameter(p):
    """Midpoint of the widest closure interval."""
    intervals = admissible_intervals(p)
    if not intervals:
        raise UnreachableConfiguration(f"The four-bar of {p} never closes")
    lo, hi = max(intervals, key=lambda iv: iv[1] - iv[0])
    t = 0.5 * (lo + hi)
    return t - 2 * math.pi if t > math.pi else t


def flex_parameter_of(surface):
    """Recover the four-bar input angle (dihedral chart at C1A1) of a labelled type-1/2 sample."""
    v = surface.vertices
    lab = surface.labels
    c1 = v[lab['C1']]
    e = v[lab['A1']] - c1
    e = e / np.linalg.norm(e)
    p2 = v[lab['B1']] - c1
    p4 = v[lab['B2']] - c1
    p2 = p2 - np.dot(p2, e) * e
    p4 = p4 - np.dot(p4, e) * e
    return float(np.arctan2(np.dot(np.cross(p2, p4), e), np.dot(p2, p4)))


# ---------------------------------------------------------------------------
# type 3

@dataclass(frozen=True)
class Type3FlatParams:
    """
    Two concentric circles K_C (radius rho_c) and K_B (radius rho_b) centred at the origin.

    normal_angles are the directions of the outward normals of the four tangent
    lines of K_C carrying A1B1, B1A2, A2B2, B2A1, in counterclockwise order.
    """
    rho_c: float
    rho_b: float
    normal_angles: tuple

    def __post_init__(self):
        if self.rho_c <= 0 or self.rho_b <= 0:
            raise InvalidParameters("Circle radii must be positive")
        if abs(self.rho_c - self.rho_b) < 1e-12:
            raise InvalidParameters("The two circles must differ")
        if len(self.normal_angles) != 4:
            raise InvalidParameters("Four tangent directions are required")

    @classmethod
    def from_degrees(cls, rho_c, rho_b, normal_degrees):
        return cls(rho_c, rho_b, tuple(math.radians(d) for d in normal_degrees))

    def gaps(self):
        """Turning angles between consecutive normals at A1, B1, A2, B2."""
        th = self.normal_angles
        two_pi = 2 * math.pi
        return ((th[0] - th[3]) % two_pi, (th[1] - th[0]) % two_pi,
                (th[2] - th[1]) % two_pi, (th[3] - th[2]) % two_pi)


@dataclass(frozen=True)
class TangencyData:
    c_points: dict  # 'c11' ... tangency of line A_iB_j with K_C
    b_points: dict  # 'b11' ... tangency of line A_iC_j with K_B
    tangent_lengths: dict  # (vertex, point name) -> signed tangent length
    rho_a: float
    k_a_residual: float
    collinear: tuple = ()  # vertices lying on a line through two others


TYPE3_REFERENCE = Type3FlatParams.from_degrees(1.0, 0.5, (270.0, 300.0, 80.0, 130.0))


def _mp_line(theta, rho):
    return (mp.cos(theta), mp.sin(theta)), mp.mpf(rho)


def _mp_intersect(l1, l2):
    (a1, b1), r1 = l1
    (a2, b2), r2 = l2
    det = a1 * b2 - a2 * b1
    if abs(det) < mp.mpf(10) ** (-mp.mp.dps // 2):
        return None
    return ((r1 * b2 - r2 * b1) / det, (a1 * r2 - a2 * r1) / det)


def _mp_angle(v, a, b):
    x = (a[0] - v[0], a[1] - v[1])
    y = (b[0] - v[0], b[1] - v[1])
    return mp.atan2(abs(x[0] * y[1] - x[1] * y[0]), x[0] * y[0] + x[1] * y[1])


def _line_through(p, q):
    """Line {x : n.x = rho} through two points, with rho >= 0."""
    d = (q[0] - p[0], q[1] - p[1])
    n = (-d[1], d[0])
    norm = mp.sqrt(n[0] ** 2 + n[1] ** 2)
    n = (n[0] / norm, n[1] / norm)
    rho = n[0] * p[0] + n[1] * p[1]
    if rho < 0:
        n, rho = (-n[0], -n[1]), -rho
    return n, rho


def _foot(line):
    (a, b), r = line
    return (a * r, b * r)


def _signed_tangent(vertex, point, towards):
    d = mp.sqrt((point[0] - vertex[0]) ** 2 + (point[1] - vertex[1]) ** 2)
    s = (point[0] - vertex[0]) * (towards[0] - vertex[0]) + (point[1] - vertex[1]) * (towards[1] - vertex[1])
    return d if s >= 0 else -d


def _tangents_from(point, rho):
    r = mp.sqrt(point[0] ** 2 + point[1] ** 2)
    if r <= rho:
        raise InvalidTangentConfig(f"Point at distance {float(r)} has no tangents to a circle of radius {rho}")
    psi = mp.atan2(point[1], point[0])
    delta = mp.acos(mp.mpf(rho) / r)
    return _mp_line(psi + delta, rho), _mp_line(psi - delta, rho)


def _opposite_angles_equal(pts, tol):
    """Opposite plane angles agree at both A1 and A2."""
    for a in ('A1', 'A2'):
        v, b1, b2 = pts[a], pts['B1'], pts['B2']
        c1, c2 = pts['C1'], pts['C2']
        r1 = abs(_mp_angle(v, b2, c1) - _mp_angle(v, b1, c2))
        r2 = abs(_mp_angle(v, b2, c2) - _mp_angle(v, b1, c1))
        if max(r1, r2) >= tol:
            return False
    return True


def bricard_type3_flat(p, dps=50):
    """
    Flat position of a type-3 octahedron.

    A1B1A2B2 is the convex quadrilateral circumscribed about K_C. From A1 and
    A2 the two tangents to K_B are drawn; their four crossings offer two ways
    of naming C1, C2 and the one whose opposite plane angles agree at A1 and
    at A2 is taken. The quadrilateral B1C1B2C2 is then checked to be circumscribed
    about a third concentric circle K_A.

    Returns:
        tuple: (PolyhedralSurface, TangencyData)
    """
    gaps = p.gaps()
    if not all(0 < g < math.pi for g in gaps) or abs(sum(gaps) - 2 * math.pi) > 1e-9:
        raise InvalidTangentConfig(f"Tangent directions do not bound a convex quadrilateral (gaps {gaps})")
    with mp.workdps(dps):
        tol = mp.mpf(10) ** (-dps // 2)
        shift = -mp.pi / 2 - mp.mpf(p.normal_angles[0])
        th = [mp.mpf(a) + shift for a in p.normal_angles]
        la, lb, lc, ld = (_mp_line(a, p.rho_c) for a in th)
        pts = {'A1': _mp_intersect(ld, la), 'B1': _mp_intersect(la, lb),
               'A2': _mp_intersect(lb, lc), 'B2': _mp_intersect(lc, ld)}

        t1_plus, t1_minus = _tangents_from(pts['A1'], p.rho_b)
        t2_plus, t2_minus = _tangents_from(pts['A2'], p.rho_b)
        candidates = []
        for pair in ((t2_plus, t2_minus), (t2_minus, t2_plus)):
            c1 = _mp_intersect(t1_plus, pair[0])
            c2 = _mp_intersect(t1_minus, pair[1])
            if c1 is None or c2 is None:
                continue
            trial = dict(pts, C1=c1, C2=c2)
            if _opposite_angles_equal(trial, tol):
                candidates.append((trial, (t1_plus, t1_minus, pair[0], pair[1])))
        if len(candidates) != 1:
            raise InvalidTangentConfig(
                f"{len(candidates)} tangent pairings give equal opposite plane angles at A1 and A2; expected exactly one")
        pts, (l11, l12, l21, l22) = candidates[0]

        k_a_lines = [_line_through(pts[u], pts[w]) for u, w in
                     (('B1', 'C1'), ('C1', 'B2'), ('B2', 'C2'), ('C2', 'B1'))]
        dists = [r for _, r in k_a_lines]
        rho_a = sum(dists) / 4
        k_a_residual = max(abs(r - rho_a) for r in dists)
        if k_a_residual > mp.mpf(10) ** (-dps // 3):
            raise InvalidTangentConfig(f"B1C1B2C2 is not circumscribed about a concentric circle "
                                       f"(residual {float(k_a_residual):.3e})")

        c_points = {'c11': _foot(la), 'c21': _foot(lb), 'c22': _foot(lc), 'c12': _foot(ld)}
        b_points = {'b11': _foot(l11), 'b12': _foot(l12), 'b21': _foot(l21), 'b22': _foot(l22)}
        lengths = {}
        for i in (1, 2):
            for j in (1, 2):
                a, b, c = f'A{i}', f'B{j}', f'C{j}'
                cp, bp = c_points[f'c{i}{j}'], b_points[f'b{i}{j}']
                lengths[(a, f'c{i}{j}')] = _signed_tangent(pts[a], cp, pts[b])
                lengths[(b, f'c{i}{j}')] = _signed_tangent(pts[b], cp, pts[a])
                lengths[(a, f'b{i}{j}')] = _signed_tangent(pts[a], bp, pts[c])
                lengths[(c, f'b{i}{j}')] = _signed_tangent(pts[c], bp, pts[a])

        collinear = []
        for u, v, w in combinations(sorted(pts), 3):
            area = ((pts[v][0] - pts[u][0]) * (pts[w][1] - pts[u][1])
                    - (pts[v][1] - pts[u][1]) * (pts[w][0] - pts[u][0]))
            if abs(area) < tol:
                collinear.append((u, v, w))
        if collinear:
            logger.warning(f"Flat octahedron has collinear vertex triples: {collinear}")

        points3 = {k: (v[0], v[1], mp.mpf(0)) for k, v in pts.items()}
        surface = _surface_from_points(points3)
        tangency = TangencyData(
            {k: (float(v[0]), float(v[1])) for k, v in c_points.items()},
            {k: (float(v[0]), float(v[1])) for k, v in b_points.items()},
            {k: float(v) for k, v in lengths.items()},
            float(rho_a), float(k_a_residual), tuple(collinear))
    logger.info(f"Type-3 flat octahedron built (rho_A={tangency.rho_a:.6f})")
    return surface, tangency


def flat_identities(surface):
    """
    Residuals of the plane-angle identities of a flat type-3 octahedron.

    Opposite plane angles agree at A1, A2, B1 and B2. The half-angle ratios
    sin((x-y)/2)/sin((x+y)/2) of the angles from B2 at A1 and from B1 at A2
    towards C2 and C1 have equal magnitude (the ratio of the two circle radii);
    the angles themselves only agree across A1, A2 when |OA1| = |OA2|.

    Returns:
        dict: identity name -> absolute residual
    """
    left_a1, left_a2 = napier_left_sides(surface)
    return {
        'half_angle_ratio_A1_A2': abs(abs(left_a1) - abs(left_a2)),
        'opposite_A1_1': abs(ang(surface, 'B2', 'A1', 'C1') - ang(surface, 'B1', 'A1', 'C2')),
        'opposite_A1_2': abs(ang(surface, 'B2', 'A1', 'C2') - ang(surface, 'B1', 'A1', 'C1')),
        'opposite_A2_1': abs(ang(surface, 'B2', 'A2', 'C1') - ang(surface, 'B1', 'A2', 'C2')),
        'opposite_A2_2': abs(ang(surface, 'B2', 'A2', 'C2') - ang(surface, 'B1', 'A2', 'C1')),
        'opposite_B1_1': abs(ang(surface, 'A1', 'B1', 'C1') - ang(surface, 'A2', 'B1', 'C2')),
        'opposite_B1_2': abs(ang(surface, 'C1', 'B1', 'A2') - ang(surface, 'C2', 'B1', 'A1')),
        'opposite_B2_1': abs(ang(surface, 'A1', 'B2', 'C1') - ang(surface, 'A2', 'B2', 'C2')),
        'opposite_B2_2': abs(ang(surface, 'C1', 'B2', 'A2') - ang(surface, 'C2', 'B2', 'A1')),
        'supplementary_C1_1': abs(ang(surface, 'A1', 'C1', 'B2') + ang(surface, 'A2', 'C1', 'B1') - math.pi),
        'supplementary_C1_2': abs(ang(surface, 'A1', 'C1', 'B1') + ang(surface, 'A2', 'C1', 'B2') - math.pi),
    }


def tangent_length_identities(surface, tangency):
    """
    Residuals of the length identities of a flat type-3 octahedron.

    Every side A_iB_j (resp. A_iC_j) is the signed sum of the two tangent
    lengths to its point of contact with K_C (resp. K_B); the convex
    quadrilateral A1B1A2B2 also satisfies Pitot's equality.
    """
    def length(a, b):
        return float(np.linalg.norm(surface.vertices[surface.labels[a]] - surface.vertices[surface.labels[b]]))

    t = tangency.tangent_lengths
    out = {}
    for i in (1, 2):
        for j in (1, 2):
            a, b, c = f'A{i}', f'B{j}', f'C{j}'
            out[f'tangents_{a}{b}'] = abs(length(a, b) - (t[(a, f'c{i}{j}')] + t[(b, f'c{i}{j}')]))
            out[f'tangents_{a}{c}'] = abs(length(a, c) - abs(t[(a, f'b{i}{j}')] + t[(c, f'b{i}{j}')]))
    out['pitot_A1B1A2B2'] = abs(length('A1', 'B1') + length('A2', 'B2') - length('B1', 'A2') - length('B2', 'A1'))
    return out


TYPE2_REFERENCE = Type2Params(a1b1=4, a1b2=6, c1a1=7, c1b1=8, c1a2=8, c1b2=7)
