"""
Suite targets for the check runner.
Each target knows how to construct its polyhedron, how to flex it and which checks to run.
"""
from dataclasses import dataclass, field
from pathlib import Path

import mpmath as mp
import numpy as np

from .bricard import (TYPE2_REFERENCE, TYPE3_REFERENCE, admissible_intervals,
                      bricard_type1, bricard_type2, bricard_type3_flat,
                      equators, flat_identities, flex_parameter_of,
                      reference_parameter, symmetric_pairs,
                      tangent_length_identities)
from .errors import (FunctionalUndefined, NoConvergence, PoleArgument, PolyhedraError,
                     PrecisionExhausted, RadiusTooLarge, SingularJacobian)
from .flex_engine import FlexProblem, trace_flex, trace_from_flat
from .invariants import (LinkShape, equator_dehn_sum, invariant_trace, link_convexity,
                         oriented_volume, track_branches, vertex_link)
from .geometry_core import is_embedded
from .log import get_logger
from .mesh_io import load_mesh
from .relations import (branch_angles_mp, certify_angle_relations,
                        napier_checks, napier_left_sides, sample_functionals,
                        verify_dehn_constancy)
from .steffen import DAGGER, STEFFEN_OCTAHEDRON, build_steffen, steffen_flex_scan

logger = get_logger('targets')

PASS = 'PASS'
FAIL = 'FAIL'
NOT_CERTIFIED = 'NOT_CERTIFIED'

# angle pairs tied by a relation in a type-3 octahedron
TYPE3_RELATED_PAIRS = ((('A1', 'B2'), ('A2', 'B2')), (('A1', 'B2'), ('A2', 'B1')), (('A1', 'B1'), ('A1', 'B2')),
                       (('A1', 'C1'), ('A1', 'C2')), (('A2', 'C1'), ('A2', 'C2')), (('A1', 'C1'), ('A2', 'C2')))


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    status: str
    residual: float = None
    tolerance: float = None
    sample: int = None
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {'check_id': self.check_id, 'status': self.status, 'residual': self.residual,
                'tolerance': self.tolerance, 'sample': self.sample, 'details': self.details}


def measured(check_id, values, tolerance, **details):
    """PASS when every per-sample residual is within tolerance; the worst sample is reported either way."""
    values = np.atleast_1d(np.asarray(values, dtype=float))
    worst = int(np.argmax(values))
    residual = float(values[worst])
    status = PASS if residual <= tolerance else FAIL
    return CheckResult(check_id, status, residual, float(tolerance), worst, details)


def certified(check_id, ok, **details):
    return CheckResult(check_id, PASS if ok else NOT_CERTIFIED, details=details)


def failed(check_id, error, sample=None):
    return CheckResult(check_id, FAIL, sample=sample, details={'error': f"{type(error).__name__}: {error}"})


@dataclass(frozen=True)
class Target:
    target_id: str
    description: str
    construct_fn: object  # settings -> PolyhedralSurface
    trace_fn: object  # (settings, samples) -> FlexPath
    checks_fn: object  # (settings, samples) -> list of CheckResult


# Dictionary of available targets
SUITE_TARGETS = {}


def register_target(target_id, construct_fn, trace_fn, checks_fn, description):
    """
    Register a suite target.

    Args:
        target_id: Unique identifier used on the command line
        construct_fn: Function building the reference surface from Settings
        trace_fn: Function tracing a flex from Settings and a sample count
        checks_fn: Function running every check from Settings and a sample count
        description: One-line description shown by list_targets
    """
    SUITE_TARGETS[target_id] = Target(target_id, description, construct_fn, trace_fn, checks_fn)


# ---------------------------------------------------------------------------
# shared checks

def _scale(path):
    return float(max(path.reference_lengths))


def _edge_names(surface):
    return [surface.edge_name(k) for k in range(len(surface.edges))]


def _pair_names(surface, pairs):
    return [tuple(sorted((surface.edge_name(surface.labelled_edge(*a)), surface.edge_name(surface.labelled_edge(*b)))))
            for a, b in pairs]


def path_checks(path, branches, settings, template=None, require_zero=True):
    """
    Edge lengths, volume, mean curvature and the Dehn verdict along a path.

    With require_zero the Dehn check passes only on a ZERO verdict; otherwise
    constancy is enough.
    """
    tol = settings.invariant_tolerance
    scale = _scale(path)
    ref = path.reference_lengths
    frame = invariant_trace(path, branches)
    results = [
        measured('lengths', [np.max(np.abs(s.lengths() - ref) / ref) for s in path.surfaces()], tol),
        measured('volume', np.abs(frame['volume'] - frame['volume'].iloc[0]), tol * scale ** 3),
        measured('mean_curvature', np.abs(frame['mean_curvature'] - frame['mean_curvature'].iloc[0]), tol * scale),
    ]
    try:
        verdict = verify_dehn_constancy(path, branches, settings=settings, template=template)
        results.append(certified('dehn', verdict.zero if require_zero else verdict.constant, **verdict.to_dict()))
    except PrecisionExhausted as e:
        results.append(CheckResult('dehn', NOT_CERTIFIED, details={'error': str(e)}))
    except (NoConvergence, SingularJacobian) as e:
        results.append(failed('dehn', e))
    return results


def relation_check(check_id, path, branches, index, pairs, settings):
    """Every expected pair of edges is tied by a certified relation at one sample."""
    surface = path.samples[index].surface
    problem = FlexProblem(path.samples[0].surface, path.gauge, settings)
    angles = branch_angles_mp(path, branches, index, problem, settings.dps)
    certs = certify_angle_relations(angles, _edge_names(surface), settings.angle_coefficient_bound,
                                    settings.pi_coefficient_bound, settings.dps)
    found = {tuple(sorted(c.support())) for c in certs}
    missing = [p for p in _pair_names(surface, pairs) if p not in found]
    return CheckResult(check_id, PASS if not missing else NOT_CERTIFIED, sample=index,
                       details={'missing': [list(m) for m in missing],
                                'certificates': [c.to_dict() for c in certs]})


def equator_check(path, branches, settings, indices):
    """Equator Dehn sums under sampled functionals on the certified span, at several samples."""
    problem = FlexProblem(path.samples[0].surface, path.gauge, settings)
    scale = _scale(path)
    residuals = []
    for idx in indices:
        surface = path.samples[idx].surface
        names = _edge_names(surface)
        angles = branch_angles_mp(path, branches, idx, problem, settings.dps)
        certs = certify_angle_relations(angles, names, settings.angle_coefficient_bound,
                                        settings.pi_coefficient_bound, settings.dps)
        functionals = sample_functionals(certs, dict(zip(names, angles)), settings.functionals,
                                         seed=settings.seed + idx)
        floats = [b.values[idx] for b in branches]
        worst = 0.0
        for f in functionals:
            for eq in equators():
                try:
                    worst = max(worst, abs(equator_dehn_sum(surface, eq, f, floats)))
                except FunctionalUndefined as e:
                    return failed('equator_dehn_sums', e, idx)
        residuals.append(worst)
    result = measured('equator_dehn_sums', residuals, settings.invariant_tolerance * scale)
    return CheckResult(result.check_id, result.status, result.residual, result.tolerance,
                       int(indices[result.sample]), {'samples': [int(i) for i in indices]})


def pair_sum_check(check_id, path, branches, pairs, period=np.pi):
    """
    Each pair's angle sum (or difference) stays on one multiple of period along the path.

    The sign is read off the first sample: a pair whose angles agree there is
    compared by difference, otherwise by sum.
    """
    surface = path.samples[0].surface
    residuals = np.zeros(len(path.samples))
    found = []
    for a, b in pairs:
        ka = surface.labelled_edge(*a)
        kb = surface.labelled_edge(*b)
        va = branches[ka].values
        vb = branches[kb].values
        d0 = va[0] - vb[0]
        sign = -1.0 if abs(d0 - 2 * np.pi * round(d0 / (2 * np.pi))) < 1e-6 else 1.0
        combined = va + sign * vb
        multiple = int(round(combined[0] / period))
        residuals = np.maximum(residuals, np.abs(combined - multiple * period))
        found.append({'edges': [surface.edge_name(ka), surface.edge_name(kb)],
                      'sign': int(sign), 'multiple_of_period': multiple})
    return measured(check_id, residuals, 1e-9, period=float(period), pairs=found)


def link_check(path, vertex='A1', flat_index=None):
    """Shape of the vertex link at every sample: degenerate-flat at the flat sample, self-intersecting elsewhere."""
    bad = []
    shapes = []
    for idx, surface in enumerate(path.surfaces()):
        v = surface.labels[vertex]
        r = 0.25 * min(surface.edges[k].length for k in range(len(surface.edges)) if v in surface.edges[k].endpoints)
        shape = None
        for _ in range(6):
            try:
                shape = link_convexity(vertex_link(surface, v, r))
                break
            except RadiusTooLarge:
                r /= 4
        expected = LinkShape.DEGENERATE_FLAT if idx == flat_index else LinkShape.SELF_INTERSECTING
        shapes.append(shape.value if shape is not None else None)
        if shape != expected:
            bad.append(idx)
    if bad:
        return CheckResult('link_convexity', FAIL, sample=bad[0],
                           details={'vertex': vertex, 'offending': bad, 'shape': shapes[bad[0]]})
    return CheckResult('link_convexity', PASS, details={'vertex': vertex, 'flat_index': flat_index})


def _spread(n, count, skip=()):
    picks = sorted({int(round(x)) for x in np.linspace(0, n - 1, min(count, n))} - set(skip))
    return picks or [0]


# ---------------------------------------------------------------------------
# types 1 and 2

def _four_bar_range(params, margin=0.1):
    lo, hi = max(admissible_intervals(params), key=lambda iv: iv[1] - iv[0])
    pad = margin * (hi - lo)
    return lo + pad, hi - pad


def _four_bar_target(kind, params, build):
    def construct(settings):
        return build(params, reference_parameter(params), settings.dps)

    def trace(settings, samples):
        lo, hi = _four_bar_range(params)
        return trace_flex(build(params, lo, settings.dps), (lo, hi), samples, settings=settings)

    def checks(settings, samples):
        lo, hi = _four_bar_range(params)
        logger.info(f"Checking the {kind} octahedron on {samples} samples over [{lo:.4f}, {hi:.4f}]")
        start = build(params, lo, settings.dps)
        try:
            path = trace_flex(start, (lo, hi), samples, settings=settings)
        except PolyhedraError as e:
            return [failed('flex', e)]
        branches = track_branches(path)
        results = path_checks(path, branches, settings)
        scale = _scale(path)
        deviation = []
        with mp.workdps(30):
            for s in path.surfaces():
                exact = path.gauge.normalize(build(params, flex_parameter_of(s), 30))
                deviation.append(np.max(np.abs(s.vertices - exact.vertices)))
        results.append(measured('closed_form', deviation, 1e-8 * scale))
        results.append(pair_sum_check('pair_sums', path, branches, symmetric_pairs(kind)))
        mid = len(path.samples) // 2
        results.append(relation_check('angle_relations', path, branches, mid, symmetric_pairs(kind), settings))
        results.append(equator_check(path, branches, settings, _spread(len(path.samples), settings.equator_samples)))
        return results

    return construct, trace, checks


register_target('type1', *_four_bar_target('type1', STEFFEN_OCTAHEDRON, bricard_type1),
                description="Line-symmetric Bricard octahedron with the edge lengths used in Steffen's polyhedron")
register_target('type2', *_four_bar_target('type2', TYPE2_REFERENCE, bricard_type2),
                description="Plane-symmetric Bricard octahedron")


# ---------------------------------------------------------------------------
# type 3

def _type3_construct(settings):
    return bricard_type3_flat(TYPE3_REFERENCE, settings.dps)[0]


def _type3_trace(settings, samples):
    return trace_from_flat(_type3_construct(settings), max(samples // 2, 2), settings=settings)


def _type3_checks(settings, samples):
    flat, tangency = bricard_type3_flat(TYPE3_REFERENCE, settings.dps)
    tol = settings.invariant_tolerance
    scale = float(max(flat.lengths()))
    results = [
        measured('flat_identities', list(flat_identities(flat).values()), tol),
        measured('tangent_lengths', list(tangent_length_identities(flat, tangency).values()), tol * scale),
        measured('k_a_circle', [tangency.k_a_residual], tol * scale),
    ]
    try:
        path = trace_from_flat(flat, max(samples // 2, 2), settings=settings)
    except PolyhedraError as e:
        return results + [failed('flex', e)]
    flat_index = path.metadata['flat_index']
    results.append(CheckResult('kickoff', PASS if path.metadata['kickoff_shape'] == 'self-intersecting' else FAIL,
                               details={'shape': path.metadata['kickoff_shape'], 'flat_index': flat_index}))
    branches = track_branches(path)
    results += path_checks(path, branches, settings)

    n = len(path.samples)
    away = min(n - 1, flat_index + max(1, (n - flat_index) // 2))
    results.append(pair_sum_check('pair_sums', path, branches, TYPE3_RELATED_PAIRS, period=2 * np.pi))
    results.append(relation_check('angle_relations', path, branches, away, TYPE3_RELATED_PAIRS, settings))
    results.append(link_check(path, 'A1', flat_index))
    results.append(measured('zero_volume', [abs(oriented_volume(s)) for s in path.surfaces()],
                            settings.invariant_tolerance * scale ** 3))
    picks = _spread(n, settings.equator_samples, skip=(flat_index,))
    results.append(equator_check(path, branches, settings, picks))

    napier = []
    sides = []
    for idx in picks:
        surface = path.samples[idx].surface
        napier.append(max([r for r in napier_checks(surface).values() if r is not None], default=0.0))
        try:
            left4, left5 = napier_left_sides(surface)
            sides.append(abs(abs(left4) - abs(left5)))
        except (ZeroDivisionError, PoleArgument):
            sides.append(0.0)
    results.append(measured('napier', napier, tol))
    results.append(measured('napier_left_sides', sides, tol))
    return results


register_target('type3', _type3_construct, _type3_trace, _type3_checks,
                description="Bricard octahedron of type 3 flexed through its flat position")


# ---------------------------------------------------------------------------
# Steffen polyhedron

def _steffen_samples(samples):
    return max(samples // 5, 5)


def _steffen_trace(settings, samples):
    return steffen_flex_scan(_steffen_samples(samples), settings=settings).path


def _steffen_checks(settings, samples):
    try:
        scan = steffen_flex_scan(_steffen_samples(samples), settings=settings)
    except PolyhedraError as e:
        return [failed('steffen_scan', e)]
    tol = settings.invariant_tolerance
    surfaces = scan.path.surfaces()
    scale = _scale(scan.path)
    frame = scan.frame
    first = surfaces[0]
    counts = [0.0 if (s.n_vertices, len(s.faces), len(s.edges)) == (9, 14, 21) else 1.0 for s in surfaces]
    removed = []
    for a, b in (('E', 'L'), ('A1', 'B2'), ('A1' + DAGGER, 'B2' + DAGGER)):
        try:
            first.labelled_edge(a, b)
            removed.append(1.0)
        except KeyError:
            removed.append(0.0)
    rigid = [first.labels[n] for n in ('D', 'E', 'F', 'L')]
    return [
        measured('combinatorics', counts, 0.0, expected=[9, 14, 21]),
        measured('removed_edges', removed, 0.0),
        measured('tetrahedron_rigid', [np.max(np.abs(s.vertices[rigid] - first.vertices[rigid])) for s in surfaces],
                 1e-10 * scale),
        measured('face_congruence', frame['face_drift'], 1e-10 * scale),
        measured('coupling', frame['coupling_residual'], 1e-9 * scale),
        CheckResult('embedded_subinterval', PASS if scan.embedded_intervals else FAIL,
                    details={'intervals': [list(r) for r in scan.embedded_intervals]}),
        measured('volume', np.abs(frame['volume'] - frame['volume'].iloc[0]), tol * scale ** 3),
        measured('mean_curvature', np.abs(frame['mean_curvature'] - frame['mean_curvature'].iloc[0]), tol * scale),
        certified('dehn', scan.verdict.zero, **scan.verdict.to_dict()),
    ]


register_target('steffen', lambda settings: build_steffen(dps=settings.dps).surface, _steffen_trace, _steffen_checks,
                description="Steffen's nine-vertex embedded flexible polyhedron")


# ---------------------------------------------------------------------------
# custom meshes

def custom_target(mesh_path):
    """Target for a mesh file: traced by pseudo-arclength, checked for lengths, invariants and Dehn verdict."""
    mesh_path = Path(mesh_path)

    def construct(settings):
        return load_mesh(mesh_path)

    def trace(settings, samples):
        surface = load_mesh(mesh_path)
        return trace_flex(surface, (0.0, 0.25 * surface.diameter()), samples, driver='arclength', settings=settings)

    def checks(settings, samples):
        surface = load_mesh(mesh_path)
        results = [CheckResult('embedded', PASS if is_embedded(surface) else FAIL)]
        try:
            path = trace(settings, samples)
        except PolyhedraError as e:
            return results + [failed('flex', e)]
        return results + path_checks(path, track_branches(path), settings, require_zero=False)

    return Target('custom', f"Mesh {mesh_path}", construct, trace, checks)


def get_target(target_id, mesh=None):
    """
    Get a target by ID.

    Args:
        target_id: ID of a registered target, or 'custom'
        mesh: Mesh file for the custom target

    Returns:
        Target: The target
    """
    if target_id == 'custom':
        if mesh is None:
            raise ValueError("The custom target needs a mesh file")
        return custom_target(mesh)
    if target_id not in SUITE_TARGETS:
        raise ValueError(f"Unknown target ID: {target_id}. Available targets: {list(SUITE_TARGETS.keys())}")
    return SUITE_TARGETS[target_id]


def list_targets():
    """List all registered targets."""
    return list(SUITE_TARGETS.keys())
