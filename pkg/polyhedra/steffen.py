"""
Gluing calculus for polyhedra assembled from convex pieces and Bricard octahedra,
and the nine-vertex Steffen polyhedron built from a tetrahedron and two copies
of a type-1 octahedron.
"""
import json
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from fractions import Fraction
from pathlib import Path

import mpmath as mp
import numpy as np
from scipy.optimize import brentq

from .bricard import Type1Params, admissible_intervals, bricard_type1, type1_points
from .config import load_settings
from .errors import (CouplingUnsolvable, DegenerateFace, FacesDoNotCoincide,
                     IncongruentFaces, InvalidParameters, NonManifoldEdge,
                     NonManifoldResult, OrientationConflict, OrientationMismatch,
                     PointNotInterior, UnreachableConfiguration)
from .flex_engine import FlexPath, FlexSample, GaugeFrame
from .geometry_core import (build_surface, is_embedded, mp_cross, mp_dot,
                            mp_scale, mp_sub, mp_unit)
from .invariants import face_side_lengths, invariant_trace, oriented_volume, track_branches
from .log import get_logger
from .mesh_io import write_labels, write_obj
from .relations import verify_dehn_constancy

logger = get_logger('steffen')

STEFFEN_OCTAHEDRON = Type1Params(a1b1=5, a1b2=11, c1a1=12, c1b1=10, c1a2=10, c1b2=12)
DAGGER = "'"

TETRAHEDRON_FACES = ((0, 1, 2), (0, 2, 3), (0, 3, 1), (1, 3, 2))


@dataclass(frozen=True)
class GluingSpec:
    """
    Faces to glue and the vertex correspondence between them.

    correspondence holds (vertex of face1, vertex of face2) pairs; for internal
    gluing both faces belong to the same surface. sign, when set, is the
    required orientation bookkeeping sign.
    """
    face1: int
    face2: int
    correspondence: tuple
    sign: int = None

    @classmethod
    def from_labels(cls, p1, p2, pairs, sign=None):
        """Build a spec from labelled vertex pairs, e.g. (('D', 'C1'), ('E', 'B2'), ('L', 'A1'))."""
        names1 = [a for a, _ in pairs]
        names2 = [b for _, b in pairs]
        return cls(p1.face_with(*names1), p2.face_with(*names2),
                   tuple((p1.labels[a], p2.labels[b]) for a, b in pairs), sign)


def _check_correspondence(f1, f2, correspondence):
    firsts = sorted(a for a, _ in correspondence)
    seconds = sorted(b for _, b in correspondence)
    if len(correspondence) != 3 or firsts != sorted(f1) or seconds != sorted(f2):
        raise InvalidParameters(f"Correspondence {correspondence} is not a bijection between {f1} and {f2}")


def _check_congruent(p1, p2, correspondence, tolerance):
    pts1 = p1.vertices
    pts2 = p2.vertices
    scale = max(p1.diameter(), p2.diameter())
    for (a1, a2), (b1, b2) in ((correspondence[0], correspondence[1]), (correspondence[1], correspondence[2]),
                               (correspondence[2], correspondence[0])):
        l1 = np.linalg.norm(pts1[a1] - pts1[b1])
        l2 = np.linalg.norm(pts2[a2] - pts2[b2])
        if abs(l1 - l2) > tolerance * scale:
            raise IncongruentFaces(f"Side {a1}{b1} has length {l1:.12g}, its partner {a2}{b2} has {l2:.12g}")


def _frame(a, b, c):
    e1 = mp_unit(mp_sub(b, a))
    r = mp_sub(c, a)
    e2 = mp_unit(mp_sub(r, mp_scale(mp_dot(r, e1), e1)))
    return a, (e1, e2, mp_cross(e1, e2))


def triangle_isometry(source, target):
    """Proper isometry sending a source triangle onto a congruent target triangle (vertices in order)."""
    o2, f = _frame(*source)
    o1, e = _frame(*target)

    def apply(x):
        d = mp_sub(x, o2)
        c = [mp_dot(d, fk) for fk in f]
        return tuple(o1[k] + c[0] * e[0][k] + c[1] * e[1][k] + c[2] * e[2][k] for k in range(3))
    return apply


def _rotations(face):
    return {face, face[1:] + face[:1], face[2:] + face[:2]}


def _validated(vertices, faces, labels, exact):
    try:
        return build_surface(vertices, faces, labels, exact)
    except (NonManifoldEdge, OrientationMismatch, DegenerateFace) as e:
        raise NonManifoldResult(f"Gluing does not give a closed oriented surface: {e}") from e


def glue_external(p1, p2, spec, label_suffix='', dps=50, tolerance=1e-12):
    """
    Glue two closed surfaces along congruent faces.

    p2 is moved by the proper isometry that sends its face onto p1's face
    under the correspondence; p1's coordinates are kept as they are. When the
    correspondence preserves the cyclic order of p1's face, p2 lands on the
    same side and its orientation is reversed (sign -1).

    Args:
        p1: Receiving PolyhedralSurface
        p2: PolyhedralSurface moved onto p1
        spec: GluingSpec with face1 in p1 and face2 in p2
        label_suffix: Appended to every label of p2
        dps: Working precision of the isometry
        tolerance: Relative tolerance of the congruence check

    Returns:
        tuple: (glued PolyhedralSurface, orientation sign of p2's contribution)
    """
    f1 = p1.faces[spec.face1]
    f2 = p2.faces[spec.face2]
    _check_correspondence(f1, f2, spec.correspondence)
    _check_congruent(p1, p2, spec.correspondence, tolerance)
    to1 = {b: a for a, b in spec.correspondence}
    sigma = -1 if tuple(to1[v] for v in f2) in _rotations(f1) else 1
    if spec.sign is not None and spec.sign != sigma:
        raise OrientationConflict(f"Correspondence {spec.correspondence} gives sign {sigma}, spec asks {spec.sign}")

    index = dict(to1)
    with mp.workdps(dps):
        P1 = p1.exact_vertices()
        P2 = p2.exact_vertices()
        iso = triangle_isometry([P2[b] for _, b in spec.correspondence], [P1[a] for a, _ in spec.correspondence])
        points = list(P1)
        for v in range(p2.n_vertices):
            if v not in index:
                index[v] = len(points)
                points.append(iso(P2[v]))
        new = np.array([[float(c) for c in p] for p in points[p1.n_vertices:]]).reshape(-1, 3)
    vertices = np.vstack([p1.vertices, new])

    faces = [f for k, f in enumerate(p1.faces) if k != spec.face1]
    for k, f in enumerate(p2.faces):
        if k == spec.face2:
            continue
        g = tuple(index[v] for v in f)
        faces.append(g if sigma == 1 else (g[0], g[2], g[1]))
    labels = dict(p1.labels)
    for name, v in p2.labels.items():
        name = name + label_suffix
        if name in labels and labels[name] != index[v]:
            raise InvalidParameters(f"Label {name!r} names different vertices in the two parts")
        labels[name] = index[v]
    exact = tuple(points) if p1.exact is not None and p2.exact is not None else None
    logger.debug(f"Glued faces {f1} and {f2} with sign {sigma}")
    return _validated(vertices, faces, labels, exact), sigma


def glue_internal(p, face1, face2, correspondence, tolerance=1e-9):
    """
    Glue two coinciding faces of one surface: both faces go, paired vertices merge.

    The merged vertex keeps the coordinates of the face1 vertex.
    """
    if face1 == face2:
        raise InvalidParameters("Internal gluing needs two different faces")
    f1 = p.faces[face1]
    f2 = p.faces[face2]
    _check_correspondence(f1, f2, correspondence)
    limit = tolerance * max(1.0, p.diameter())
    for a, b in correspondence:
        gap = float(np.linalg.norm(p.vertices[a] - p.vertices[b]))
        if gap > limit:
            raise FacesDoNotCoincide(f"Vertices {a} and {b} are {gap:.3e} apart")

    merge = {b: a for a, b in correspondence if a != b}
    keep = [v for v in range(p.n_vertices) if v not in merge]
    compact = {v: k for k, v in enumerate(keep)}
    index = {v: compact[merge.get(v, v)] for v in range(p.n_vertices)}
    faces = [tuple(index[v] for v in f) for k, f in enumerate(p.faces) if k not in (face1, face2)]
    labels = {name: index[v] for name, v in p.labels.items()}
    exact = tuple(p.exact[v] for v in keep) if p.exact is not None else None
    return _validated(p.vertices[keep], faces, labels, exact)


def _mp_number(x):
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / x.denominator
    return mp.mpf(x)


def subdivide_face(p, face, barycentric, name=None, dps=50):
    """
    Split a face into three coplanar faces around an interior point.

    Args:
        p: PolyhedralSurface
        face: Face index
        barycentric: Three positive weights (normalised to sum 1); Fractions stay exact
        name: Optional label of the new vertex

    Returns:
        PolyhedralSurface: The subdivided surface, carrying extended-precision vertices
    """
    if len(barycentric) != 3 or any(w <= 0 for w in barycentric):
        raise PointNotInterior(f"Barycentric weights {barycentric} do not give an interior point")
    a, b, c = p.faces[face]
    with mp.workdps(dps):
        w = [_mp_number(x) for x in barycentric]
        total = sum(w)
        pts = p.exact_vertices()
        x = tuple(sum(w[r] * pts[v][k] for r, v in enumerate((a, b, c))) / total for k in range(3))
        exact = tuple(pts) + (x,)
        vertices = np.vstack([p.vertices, [[float(c_) for c_ in x]]])
    n = p.n_vertices
    faces = list(p.faces)
    faces[face] = (a, b, n)
    faces += [(b, c, n), (c, a, n)]
    labels = dict(p.labels)
    if name:
        labels[name] = n
    return build_surface(vertices, faces, labels, exact)


# ---------------------------------------------------------------------------
# class bookkeeping

@dataclass(frozen=True)
class AssemblyStep:
    operation: str
    result: str
    inputs: tuple
    class_index: int
    details: dict = field(default_factory=dict)


@dataclass
class AssemblyTrace:
    """Operations applied to class-0 members (convex polyhedra, Bricard octahedra) and the class reached."""
    members: dict = field(default_factory=dict)
    steps: list = field(default_factory=list)

    def add_base(self, name, kind):
        if kind not in ('convex', 'bricard'):
            raise InvalidParameters(f"Base members are convex polyhedra or Bricard octahedra, got {kind!r}")
        self.members[name] = 0

    def record(self, operation, result, inputs, **details):
        missing = [n for n in inputs if n not in self.members]
        if missing:
            raise InvalidParameters(f"Unknown assembly inputs: {missing}")
        level = max(self.members[n] for n in inputs) + 1
        self.members[result] = level
        self.steps.append(AssemblyStep(operation, result, tuple(inputs), level, details))
        return level

    @property
    def class_index(self):
        return self.steps[-1].class_index if self.steps else 0

    def to_dict(self):
        return {
            'members': dict(sorted(self.members.items())),
            'steps': [{'operation': s.operation, 'result': s.result, 'inputs': list(s.inputs),
                       'class_index': s.class_index, 'details': s.details} for s in self.steps],
            'class_index': self.class_index,
        }

    def write_json(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))
        return path


# ---------------------------------------------------------------------------
# Steffen polyhedron

def relabel(surface, suffix):
    return replace(surface, labels={name + suffix: v for name, v in surface.labels.items()})


def outward_tetrahedron(points, names, exact=None):
    """Tetrahedron on four points with its faces oriented to positive volume."""
    labels = {n: k for k, n in enumerate(names)}
    t = build_surface(points, TETRAHEDRON_FACES, labels, exact)
    if oriented_volume(t) < 0:
        t = build_surface(points, [(a, c, b) for a, b, c in TETRAHEDRON_FACES], labels, exact)
    return t


def steffen_tetrahedron(dps=50):
    """The rigid tetrahedron DEFL: |DE| = |EF| = |FL| = |LD| = 12, |DF| = 17, |EL| = 11."""
    with mp.workdps(dps):
        half = mp.mpf(11) / 2
        r = mp.sqrt(144 - half ** 2)
        theta = 2 * mp.asin(mp.mpf(17) / (2 * r))
        zero = mp.mpf(0)
        exact = ((zero, r, zero), (-half, zero, zero), (zero, r * mp.cos(theta), r * mp.sin(theta)), (half, zero, zero))
        floats = [tuple(float(c) for c in p) for p in exact]
    return outward_tetrahedron(floats, ('D', 'E', 'F', 'L'), exact)


@dataclass(frozen=True, eq=False)
class SteffenAssembly:
    surface: object
    trace: AssemblyTrace
    t: float
    branch: int
    t_dagger: float
    branch_dagger: int
    coupling_residual: float

    def metadata(self):
        return {'t': self.t, 'branch': self.branch, 't_dagger': self.t_dagger,
                'branch_dagger': self.branch_dagger, 'coupling_residual': self.coupling_residual}


def _wrap(x):
    return (x + mp.pi) % (2 * mp.pi) - mp.pi


def _angle_about(point, e, l, ref):
    """Signed angle of a point about the line el, measured from the half-plane through ref."""
    axis = mp_unit(mp_sub(l, e))

    def perp(x):
        d = mp_sub(x, e)
        return mp_sub(d, mp_scale(mp_dot(d, axis), axis))
    r = mp_unit(perp(ref))
    s = mp_cross(axis, r)
    q = perp(point)
    return mp.atan2(mp_dot(q, s), mp_dot(q, r))


@lru_cache(maxsize=8)
def _widest_interval(params):
    intervals = admissible_intervals(params)
    if not intervals:
        raise UnreachableConfiguration(f"The four-bar of {params} never closes")
    return max(intervals, key=lambda iv: iv[1] - iv[0])


class _Coupling:
    """Signed angle between C2 of the second octahedron copy and C2 of the first, about the axis EL."""

    def __init__(self, params, s1, dps):
        self.params = params
        self.dps = dps
        ex = s1.exact_vertices()
        lab = s1.labels
        self.E, self.F, self.L, self.D = (ex[lab[n]] for n in ('E', 'F', 'L', 'D'))
        self.target = _angle_about(ex[lab['C2']], self.E, self.L, self.D)

    def c2_dagger(self, t, branch):
        pts = type1_points(replace(self.params, branch=branch), t, self.dps)
        iso = triangle_isometry([pts['A1'], pts['C1'], pts['B2']], [self.E, self.F, self.L])
        return iso(pts['C2'])

    def mismatch(self, t, branch):
        return _wrap(_angle_about(self.c2_dagger(t, branch), self.E, self.L, self.D) - self.target)

    def mismatch_float(self, t, branch):
        with mp.workdps(15):
            try:
                return float(self.mismatch(t, branch))
            except UnreachableConfiguration:
                return math.nan

    def roots(self, grid, branch):
        found = []
        g = [self.mismatch_float(t, branch) for t in grid]
        for a, b, ga, gb in zip(grid, grid[1:], g, g[1:]):
            if math.isnan(ga) or math.isnan(gb) or abs(ga - gb) > math.pi:
                continue
            if ga == 0.0:
                found.append(a)
            elif ga * gb < 0:
                found.append(brentq(lambda x: self.mismatch_float(x, branch), a, b, xtol=1e-14))
        return found

    def refine(self, t, branch):
        with mp.workdps(self.dps):
            try:
                return mp.findroot(lambda x: self.mismatch(x, branch), mp.mpf(t))
            except (ValueError, ZeroDivisionError, UnreachableConfiguration) as e:
                logger.warning(f"Extended-precision coupling refinement failed at t'={t:.6f}: {e}")
                return mp.mpf(t)


def _coupling_candidates(coupling, hint=None, resolution=120):
    lo, hi = _widest_interval(coupling.params)
    if hint is not None:
        branch, t0 = hint
        local = [t0 + 0.05 * k for k in range(-4, 5)]
        roots = coupling.roots(local, branch)
        if roots:
            return [(branch, min(roots, key=lambda r: abs(r - t0)))]
    pad = 1e-6 * (hi - lo)
    grid = list(np.linspace(lo + pad, hi - pad, resolution))
    return [(branch, r) for branch in (1, -1) for r in coupling.roots(grid, branch)]


def _assemble(params, t, branch, t_dagger, branch_dagger, s1, trace_base, dps):
    trace = AssemblyTrace(dict(trace_base.members), list(trace_base.steps))
    od = relabel(bricard_type1(replace(params, branch=branch_dagger), t_dagger, dps), DAGGER)
    trace.add_base('O' + DAGGER, 'bricard')
    s2, sigma = glue_external(s1, od, GluingSpec.from_labels(
        s1, od, (('E', 'A1' + DAGGER), ('F', 'C1' + DAGGER), ('L', 'B2' + DAGGER))), dps=dps)
    trace.record('glue_external', 'S2', ('S1', 'O' + DAGGER), faces=['EFL', 'A1{0}C1{0}B2{0}'.format(DAGGER)],
                 sign=sigma)
    lab = s2.labels
    c2, c2d = lab['C2'], lab['C2' + DAGGER]
    residual = float(np.linalg.norm(s2.vertices[c2] - s2.vertices[c2d]))
    surface = glue_internal(s2, s2.face_with('L', 'E', 'C2'), s2.face_with('L', 'E', 'C2' + DAGGER),
                            ((lab['L'], lab['L']), (lab['E'], lab['E']), (c2, c2d)))
    trace.record('glue_internal', 'steffen', ('S2',), faces=['LEC2', 'LEC2' + DAGGER])
    return SteffenAssembly(surface, trace, float(t), branch, float(t_dagger), branch_dagger, residual)


def build_steffen(t=None, branch=1, dagger=None, params=STEFFEN_OCTAHEDRON, dps=50, resolution=120):
    """
    Assemble the Steffen polyhedron at flex parameter t of the first octahedron copy.

    The tetrahedron stays fixed; the first copy is glued to it at DEL, the
    second at EFL, and the second copy is flexed until its C2 meets the first
    copy's C2 on their common circle about EL. The faces LEC2 of the two copies
    are then glued to each other.

    Args:
        t: Four-bar parameter of the first copy (default: reference parameter)
        branch: Four-bar branch of the first copy
        dagger: Optional (branch, t) of the second copy near which the coupling root is taken
        params: Type1Params of both copies
        dps: Working precision

    Returns:
        SteffenAssembly: Surface (9 vertices, 14 faces), assembly trace and coupling data
    """
    if t is None:
        ref = discover_steffen_range()
        t, branch = ref.reference, ref.branch
    with mp.workdps(dps):
        tetra = steffen_tetrahedron(dps)
        octa = bricard_type1(replace(params, branch=branch), t, dps)
        base = AssemblyTrace()
        base.add_base('T', 'convex')
        base.add_base('O', 'bricard')
        s1, sigma = glue_external(tetra, octa, GluingSpec.from_labels(tetra, octa, (('D', 'C1'), ('E', 'B2'),
                                                                                   ('L', 'A1'))), dps=dps)
        base.record('glue_external', 'S1', ('T', 'O'), faces=['DEL', 'C1B2A1'], sign=sigma)
        coupling = _Coupling(params, s1, dps)
        candidates = _coupling_candidates(coupling, dagger, resolution)
        if not candidates:
            raise CouplingUnsolvable(f"No flex of the second copy places its C2 at C2 for t={float(t):.6f}")
        assemblies = []
        for b, root in candidates:
            td = coupling.refine(root, b)
            try:
                assemblies.append(_assemble(params, t, branch, td, b, s1, base, dps))
            except (FacesDoNotCoincide, NonManifoldResult) as e:
                logger.debug(f"Coupling root t'={root:.6f} rejected: {e}")
    if not assemblies:
        raise CouplingUnsolvable(f"No coupling root gives a closed surface at t={float(t):.6f}")
    if dagger is None and len(assemblies) > 1:
        embedded = [a for a in assemblies if is_embedded(a.surface)]
        chosen = (embedded or assemblies)[0]
    else:
        chosen = assemblies[0]
    logger.debug(f"Steffen assembly at t={float(t):.6f}: t'={chosen.t_dagger:.6f} "
                 f"(branch {chosen.branch_dagger}), residual {chosen.coupling_residual:.2e}")
    return chosen


@dataclass(frozen=True)
class SteffenRange:
    """Empirical flex range: grid rows (t, solvable, embedded), the reference parameter and its runs."""
    branch: int
    grid: tuple
    reference: float
    solvable: tuple
    embedded: tuple

    def to_dict(self):
        return {'branch': self.branch, 'reference': self.reference, 'solvable': list(self.solvable),
                'embedded': [list(r) for r in self.embedded]}


def _runs(rows, column):
    runs = []
    current = []
    for row in rows:
        if row[column]:
            current.append(row[0])
        elif current:
            runs.append(current)
            current = []
    if current:
        runs.append(current)
    return runs


@lru_cache(maxsize=4)
def discover_steffen_range(resolution=61, dps=20, params=STEFFEN_OCTAHEDRON):
    """
    Scan the first copy's closure interval on both branches for solvable and embedded assemblies.

    The branch with the longest embedded run wins; its middle grid point is the
    reference parameter.
    """
    lo, hi = _widest_interval(params)
    pad = 1e-3 * (hi - lo)
    best = None
    for branch in (1, -1):
        rows = []
        hint = None
        for t in np.linspace(lo + pad, hi - pad, resolution):
            try:
                a = build_steffen(float(t), branch, hint, params, dps)
            except (CouplingUnsolvable, UnreachableConfiguration, NonManifoldResult):
                rows.append((float(t), False, False))
                hint = None
                continue
            hint = (a.branch_dagger, a.t_dagger)
            rows.append((float(t), True, is_embedded(a.surface)))
        embedded = _runs(rows, 2)
        score = max((len(r) for r in embedded), default=0)
        logger.info(f"Branch {branch}: {sum(r[1] for r in rows)} solvable, {sum(r[2] for r in rows)} embedded "
                    f"of {resolution} samples")
        if best is None or score > best[0]:
            best = (score, branch, rows, embedded)
    score, branch, rows, embedded = best
    solvable = _runs(rows, 1)
    if not solvable:
        raise CouplingUnsolvable("The coupling has no solution anywhere on the closure interval")
    if score:
        run = max(embedded, key=len)
    else:
        logger.warning("No embedded Steffen sample found; using the longest solvable run")
        run = max(solvable, key=len)
    reference = run[len(run) // 2]
    around = next(r for r in solvable if r[0] <= reference <= r[-1])
    return SteffenRange(branch, tuple(rows), reference, (around[0], around[-1]),
                        tuple((r[0], r[-1]) for r in embedded))


@dataclass(frozen=True, eq=False)
class SteffenScan:
    frame: object  # pandas.DataFrame, one row per sample
    assemblies: tuple
    path: FlexPath
    verdict: object
    embedded_intervals: tuple

    def volume_spread(self):
        v = self.frame['volume']
        return float(v.max() - v.min())

    def to_dict(self):
        return {
            'samples': int(len(self.frame)),
            'embedded_intervals': [list(r) for r in self.embedded_intervals],
            'volume_spread': self.volume_spread(),
            'max_face_drift': float(self.frame['face_drift'].max()),
            'max_coupling_residual': float(self.frame['coupling_residual'].max()),
            'dehn': self.verdict.to_dict(),
        }


def steffen_flex_scan(samples=None, interval=None, settings=None):
    """
    Flex the Steffen polyhedron over a parameter interval and record its invariants.

    Args:
        samples: Number of samples (defaults to a fifth of the configured sample count)
        interval: (lo, hi) of the first copy's parameter; defaults to the solvable run around the reference
        settings: Optional Settings

    Returns:
        SteffenScan: Per-sample table (t, embedded, volume, mean curvature, drifts), path and Dehn verdict
    """
    settings = settings or load_settings()
    samples = samples or max(settings.samples // 5, 2)
    found = discover_steffen_range()
    lo, hi = interval or found.solvable
    hint = None
    assemblies = []
    for t in np.linspace(lo, hi, samples):
        a = build_steffen(float(t), found.branch, hint, dps=settings.dps)
        hint = (a.branch_dagger, a.t_dagger)
        assemblies.append(a)

    first = assemblies[0].surface
    sides0 = face_side_lengths(first)
    lab = first.labels
    gauge = GaugeFrame(lab['D'], lab['E'], lab['L'])
    path = FlexPath(gauge, tuple(FlexSample(a.t, a.surface, a.coupling_residual) for a in assemblies),
                    {'kind': 'steffen-coupling'}, first.lengths(), metadata={'branch': found.branch})
    branches = track_branches(path)
    frame = invariant_trace(path, branches)
    frame['embedded'] = [is_embedded(a.surface) for a in assemblies]
    frame['face_drift'] = [float(np.max(np.abs(face_side_lengths(a.surface) - sides0))) for a in assemblies]
    frame['coupling_residual'] = [a.coupling_residual for a in assemblies]
    frame['t_dagger'] = [a.t_dagger for a in assemblies]
    verdict = verify_dehn_constancy(path, branches, settings=settings)
    embedded = tuple((r[0], r[-1]) for r in _runs(list(zip(frame['t'], frame['embedded'])), 1))
    logger.info(f"Steffen scan: {int(frame['embedded'].sum())} of {samples} samples embedded, "
                f"Dehn verdict {verdict.status.value}")
    return SteffenScan(frame, tuple(assemblies), path, verdict, embedded)


def export_steffen_fixture(directory, assembly=None):
    """Write the reference Steffen polyhedron as OBJ plus a labels side-table and its assembly trace."""
    assembly = assembly or build_steffen()
    directory = Path(directory)
    obj = write_obj(assembly.surface, directory / 'steffen.obj', comment='Steffen flexible polyhedron')
    write_labels(assembly.surface, directory / 'steffen.labels.json', assembly.metadata())
    assembly.trace.write_json(directory / 'steffen.trace.json')
    return obj
