"""
Integer relations among dihedral angles and pi, Q-linear functionals on their
certified span, Dehn-invariant verdicts and Napier's analogy checks.
"""
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import reduce
from itertools import combinations

import mpmath as mp
import numpy as np
import sympy

from .config import load_settings
from .errors import (FunctionalUndefined, InconsistentAssignment, PoleArgument,
                     PrecisionExhausted)
from .invariants import dihedral_angle, dihedral_angles_mp, labelled_angle
from .log import get_logger

logger = get_logger('relations')

LENGTH_COEFFICIENT_BOUND = 1000


@dataclass(frozen=True)
class RelationCertificate:
    """sum(coefficients[k] * values[k]) == 0; the last value is pi when a pi term is present."""
    names: tuple
    values: tuple
    coefficients: tuple
    residual: float
    bound: int
    precision: int

    def coefficient_of(self, name):
        return self.coefficients[self.names.index(name)] if name in self.names else 0

    def support(self):
        return tuple(n for n, c in zip(self.names, self.coefficients) if c != 0 and n != 'pi')

    def to_dict(self):
        return {
            'names': list(self.names),
            'values': [mp.nstr(v, 30) for v in self.values],
            'coefficients': list(self.coefficients),
            'residual': self.residual,
            'precision': self.precision,
        }


class DehnStatus(str, Enum):
    ZERO = 'ZERO'
    CONSTANT = 'CONSTANT'
    NOT_CERTIFIED = 'NOT_CERTIFIED'


@dataclass(frozen=True)
class DehnVerdict:
    status: DehnStatus
    constant: bool
    zero: bool
    basis: tuple  # lengths spanning the Q-span of the edge lengths
    sample_indices: tuple
    certificates: tuple = ()
    notes: tuple = ()

    def to_dict(self):
        return {
            'status': self.status.value,
            'constant': self.constant,
            'zero': self.zero,
            'basis': [float(b) for b in self.basis],
            'sample_indices': list(self.sample_indices),
            'certificates': [c.to_dict() for c in self.certificates],
            'notes': list(self.notes),
        }


def _precision_of(values):
    if any(isinstance(v, (float, np.floating, int)) and not isinstance(v, bool) for v in values):
        return 15
    return mp.mp.dps


def _normalise(coefficients):
    g = reduce(math.gcd, (abs(c) for c in coefficients))
    coefficients = [c // g for c in coefficients]
    first = next(c for c in coefficients if c != 0)
    if first < 0:
        coefficients = [-c for c in coefficients]
    return tuple(coefficients)


def find_integer_relation(values, bound, precision=None, names=None):
    """
    Search an integer relation with coefficients up to bound (PSLQ).

    Args:
        values: Finite reals (mpf values carry the working precision)
        bound: Largest admissible coefficient
        precision: Decimal digits the values are accurate to (inferred when omitted)
        names: Optional names stored on the certificate

    Returns:
        RelationCertificate or None: The relation, primitive and with a positive leading coefficient
    """
    values = list(values)
    if not 2 <= len(values) <= 20:
        raise ValueError(f"Relation search takes 2 to 20 values, got {len(values)}")
    precision = precision or _precision_of(values)
    needed = len(values) * math.log10(max(bound, 2)) + 5
    if precision < needed:
        raise PrecisionExhausted(f"{precision} digits cannot certify {len(values)} values at bound {bound} "
                                 f"(need about {needed:.0f})")
    with mp.workdps(precision + 10):
        xs = [mp.mpf(v) for v in values]
        if not all(mp.isfinite(x) for x in xs):
            raise ValueError("Relation search needs finite values")
        tol = mp.mpf(10) ** (-(3 * precision) // 4)
        # maxcoeff bounds the norm of relations ruled out, not the largest entry
        search = max(bound * len(xs) * 10, 1000)
        rel = mp.pslq(xs, tol=tol, maxcoeff=search, maxsteps=50000)
        if rel is None:
            return None
        coefficients = _normalise(rel)
        if max(abs(c) for c in coefficients) > bound:
            logger.debug(f"Relation {coefficients} exceeds the coefficient bound {bound}")
            return None
        residual = abs(mp.fsum(c * x for c, x in zip(coefficients, xs)))
        limit = mp.mpf(10) ** (-(precision // 2)) * max(abs(x) for x in xs) * max(abs(c) for c in coefficients)
        if residual > limit:
            return None
    names = tuple(names) if names else tuple(f'x{k}' for k in range(len(values)))
    return RelationCertificate(names, tuple(xs), coefficients, float(residual), bound, precision)


def certify_angle_relations(angles, names=None, angle_bound=None, pi_bound=None, precision=None):
    """
    Single and pairwise relations among angles and pi.

    A single relation says an angle lies in pi*Q; a pairwise relation links two
    angles (both coefficients non-zero) up to a multiple of pi. Pairs made of
    two angles that are each in pi*Q are not reported again.

    Returns:
        list: RelationCertificate values, singles first
    """
    settings = load_settings() if angle_bound is None or pi_bound is None else None
    angle_bound = angle_bound or settings.angle_coefficient_bound
    pi_bound = pi_bound or settings.pi_coefficient_bound
    names = list(names) if names else [f'x{k}' for k in range(len(angles))]
    precision = precision or _precision_of(angles)
    pi = mp.pi
    certs = []
    rational = set()
    for name, a in zip(names, angles):
        c = find_integer_relation([a, pi], pi_bound, precision, (name, 'pi'))
        if c is not None and c.coefficients[0] != 0 and abs(c.coefficients[0]) <= angle_bound:
            certs.append(c)
            rational.add(name)
    for (n1, a1), (n2, a2) in combinations(zip(names, angles), 2):
        if n1 in rational and n2 in rational:
            continue
        c = find_integer_relation([a1, a2, pi], pi_bound, precision, (n1, n2, 'pi'))
        if c is None:
            continue
        c1, c2, _ = c.coefficients
        if c1 == 0 or c2 == 0 or max(abs(c1), abs(c2)) > angle_bound:
            continue
        certs.append(c)
    logger.debug(f"Certified {len(certs)} relations among {len(angles)} angles")
    return certs


def relation_span_dimension(certs, names):
    """Rank of the certified relations restricted to the named angles."""
    if not certs:
        return 0
    rows = [[c.coefficient_of(n) for n in names] for c in certs]
    return sympy.Matrix(rows).rank()


# ---------------------------------------------------------------------------
# functionals

@dataclass(frozen=True, eq=False)
class FunctionalSpec:
    """
    A Q-linear functional known on the certified span of some named angles and pi.

    f(pi) = 0 always; angles outside the span cannot be evaluated.
    """
    values: dict  # name -> extended-precision angle
    assignment: dict  # name -> sympy Rational
    certificates: tuple = ()
    tolerance: float = 1e-9

    def of(self, name):
        if name == 'pi':
            return sympy.Integer(0)
        return self.assignment[name]

    def __call__(self, x):
        x = mp.mpf(x)
        scale = max(1.0, abs(float(x)))
        for name, v in self.values.items():
            if abs(float(v - x)) < self.tolerance * scale:
                return float(self.assignment[name])
        # callers pass double-precision angles
        precision = 15
        c = find_integer_relation([x, mp.pi], 16, precision, ('x', 'pi'))
        if c is not None and c.coefficients[0] != 0:
            return 0.0
        for name, v in self.values.items():
            c = find_integer_relation([x, v, mp.pi], 16, precision, ('x', name, 'pi'))
            if c is not None and c.coefficients[0] != 0:
                return float(-sympy.Rational(c.coefficients[1], c.coefficients[0]) * self.assignment[name])
        raise FunctionalUndefined(f"{float(x)} is outside the certified span")


def _relation_matrix(certs, names):
    return sympy.Matrix([[c.coefficient_of(n) for n in names] for c in certs]) if certs \
        else sympy.zeros(0, len(names))


def build_functional(certs, assignment, values=None):
    """
    Extend an assignment to a functional consistent with every certificate.

    Args:
        certs: RelationCertificate values over named angles (and pi)
        assignment: name -> rational value on some of the names
        values: Optional name -> angle map (defaults to the values stored on the certificates)

    Returns:
        FunctionalSpec: The functional, with unconstrained directions set to 0
    """
    values = dict(values or {})
    for c in certs:
        for n, v in zip(c.names, c.values):
            if n != 'pi':
                values.setdefault(n, v)
    for n in assignment:
        if n not in values:
            raise InconsistentAssignment(f"Assignment names {n!r}, which is not in the certified span")
    names = sorted(values)
    rows = [list(r) for r in _relation_matrix(certs, names).tolist()]
    rhs = [0] * len(rows)
    for n, v in assignment.items():
        rows.append([1 if m == n else 0 for m in names])
        rhs.append(sympy.Rational(Fraction(v).numerator, Fraction(v).denominator) if not isinstance(v, sympy.Basic)
                   else v)
    if not rows:
        return FunctionalSpec(values, {n: sympy.Integer(0) for n in names}, tuple(certs))
    A = sympy.Matrix(rows)
    b = sympy.Matrix(rhs)
    try:
        sol, params = A.gauss_jordan_solve(b)
    except ValueError as e:
        raise InconsistentAssignment(f"Assignment {assignment} contradicts the certified relations: {e}")
    sol = sol.subs({p: 0 for p in params})
    return FunctionalSpec(values, {n: sympy.nsimplify(sol[k]) for k, n in enumerate(names)}, tuple(certs))


def sample_functionals(certs, values, count, seed=0):
    """Random functionals on the certified span: integer combinations of the relation-space null space."""
    names = sorted(values)
    A = _relation_matrix(certs, names)
    basis = A.nullspace() if A.rows else [sympy.eye(len(names))[:, k] for k in range(len(names))]
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        vec = sympy.zeros(len(names), 1)
        for b in basis:
            vec += int(rng.integers(-5, 6)) * b
        out.append(FunctionalSpec(dict(values), {n: sympy.nsimplify(vec[k]) for k, n in enumerate(names)},
                                  tuple(certs)))
    return out


# ---------------------------------------------------------------------------
# Dehn verdicts

def rational_basis(values, bound=LENGTH_COEFFICIENT_BOUND, precision=None):
    """
    Greedy Q-basis of a list of positive reals.

    Returns:
        tuple: (indices of the basis elements, matrix q with values[i] = sum_j q[i][j] * basis[j])
    """
    basis = []
    q = []
    for i, v in enumerate(values):
        row = None
        if basis:
            candidates = [values[j] for j in basis] + [v]
            rel = find_integer_relation(candidates, bound, precision)
            if rel is not None and rel.coefficients[-1] != 0:
                cv = rel.coefficients[-1]
                row = [sympy.Rational(-rel.coefficients[k], cv) for k in range(len(basis))]
        if row is None:
            basis.append(i)
            for r in q:
                r.append(sympy.Integer(0))
            row = [sympy.Integer(0)] * (len(basis) - 1) + [sympy.Integer(1)]
        q.append(row)
    width = len(basis)
    return basis, [r + [sympy.Integer(0)] * (width - len(r)) for r in q]


def _in_pi_rationals(value, weight, pi_bound, precision):
    """Whether an integer combination of angles (coefficients summing to weight in absolute value) lies in pi*Q."""
    if abs(value) < mp.mpf(10) ** (-(precision // 2)):
        return True, None
    cert = find_integer_relation([value, mp.pi], 2 * pi_bound * max(weight, 1), precision, ('w', 'pi'))
    return cert is not None and cert.coefficients[0] != 0, cert


def branch_angles_mp(path, branches, index, problem, dps):
    """Extended-precision angles of one sample, lifted onto the given branches (polishing samples without exact vertices)."""
    from .flex_engine import polish_sample
    sample = path.samples[index]
    surface = sample.surface
    if surface.exact is None and surface is not problem.template:
        surface = polish_sample(problem, sample, dps).surface
    with mp.workdps(dps):
        principal = dihedral_angles_mp(surface)
        lifted = []
        for k, a in enumerate(principal):
            m = round((branches[k].values[index] - float(a)) / (2 * math.pi))
            lifted.append(a + 2 * m * mp.pi)
    return lifted


def verify_dehn_constancy(path, branches, sample_indices=None, settings=None, template=None):
    """
    Certify that every Dehn invariant stays constant along a path, and whether it vanishes.

    Edge lengths are split over a Q-basis; the invariant is constant when, for
    every basis length, the matching combination of angle changes lies in
    pi*Q, and zero when the same holds for the angles themselves at the first
    sample. A NOT_CERTIFIED verdict means no certificate was found, not that
    the invariant changes.

    The edge lengths are taken from template (by default the first sample
    carrying extended-precision vertices); other samples are polished against
    them.

    Returns:
        DehnVerdict: Status, basis and all certificates used
    """
    from .flex_engine import FlexProblem
    settings = settings or load_settings()
    dps = settings.dps
    n = len(path.samples)
    if sample_indices is None:
        sample_indices = sorted({0, n // 4, n // 2, (3 * n) // 4, n - 1})
    sample_indices = tuple(sample_indices)
    if template is None:
        template = next((s.surface for s in path.samples if s.surface.exact is not None), path.samples[0].surface)
    problem = FlexProblem(template, path.gauge, settings)
    certs = []
    notes = []
    with mp.workdps(dps):
        pts = template.exact_vertices()
        lengths = [mp.sqrt(sum((pts[i][k] - pts[j][k]) ** 2 for k in range(3))) for i, j in
                   (e.endpoints for e in template.edges)]
        basis, q = rational_basis(lengths, precision=dps)
        logger.info(f"Edge lengths span a Q-space of dimension {len(basis)}")

        i0 = sample_indices[0]
        alpha0 = branch_angles_mp(path, branches, i0, problem, dps)

        def combined(vals, j):
            den = reduce(lambda a, b: a * b // math.gcd(a, b), (int(q[i][j].q) for i in range(len(vals))), 1)
            ints = [int(q[i][j] * den) for i in range(len(vals))]
            return sum(n * v for n, v in zip(ints, vals)), sum(abs(n) for n in ints)

        constant = True
        for idx in sample_indices[1:]:
            alpha = branch_angles_mp(path, branches, idx, problem, dps)
            delta = [a - b for a, b in zip(alpha, alpha0)]
            for j in range(len(basis)):
                w, weight = combined(delta, j)
                ok, cert = _in_pi_rationals(w, weight, settings.pi_coefficient_bound, dps)
                if cert is not None:
                    certs.append(cert)
                if not ok:
                    constant = False
                    notes.append(f"sample {idx}: change along basis length {j} not certified in pi*Q")

        zero = True
        for j in range(len(basis)):
            w, weight = combined(alpha0, j)
            ok, cert = _in_pi_rationals(w, weight, settings.pi_coefficient_bound, dps)
            if cert is not None:
                certs.append(cert)
            if not ok:
                zero = False
                notes.append(f"basis length {j}: invariant at sample {i0} not certified in pi*Q")
        names = [template.edge_name(k) for k in range(len(template.edges))]
        certs.extend(certify_angle_relations(alpha0, names, settings.angle_coefficient_bound,
                                             settings.pi_coefficient_bound, dps))
    status = DehnStatus.ZERO if constant and zero else (DehnStatus.CONSTANT if constant else DehnStatus.NOT_CERTIFIED)
    logger.info(f"Dehn verdict {status.value} over samples {sample_indices}")
    return DehnVerdict(status, constant, zero and constant, tuple(lengths[j] for j in basis),
                       sample_indices, tuple(certs), tuple(notes))


# ---------------------------------------------------------------------------
# spherical trigonometry

def napier_residual(a, b, c, A, B, C, pole_tolerance=1e-8):
    """
    |sin((a-b)/2) / sin((a+b)/2) - tan((A-B)/2) / cot(C/2)| for a spherical triangle.

    Raises:
        PoleArgument: When an argument sits within pole_tolerance of a pole
    """
    s = math.sin((a + b) / 2)
    if abs(s) < pole_tolerance:
        raise PoleArgument(f"sin((a+b)/2) = {s:.2e}")
    if abs(math.cos((A - B) / 2)) < pole_tolerance:
        raise PoleArgument("(A-B)/2 is at a pole of the tangent")
    if abs(math.cos(C / 2)) < pole_tolerance or abs(math.sin(C / 2)) < pole_tolerance:
        raise PoleArgument("C/2 is at a pole of the cotangent")
    return abs(math.sin((a - b) / 2) / s - math.tan((A - B) / 2) * math.tan(C / 2))


def dihedral_napier_residual(surface, vertex, b, pole_tolerance=1e-8):
    """
    Napier's analogy on the link triangle C1-b-C2 at a vertex, in dihedral angles.

    The sides through b are the plane angles x = angle(b, vertex, C2) and
    y = angle(b, vertex, C1); the angle at b is the dihedral angle alpha of
    edge (vertex, b). When the link is a crossed quadrilateral with equal
    opposite sides, the two remaining angles of the triangle differ by the
    dihedral angle beta of edge (vertex, C1), so

        |sin((x-y)/2) / sin((x+y)/2)| = |tan(beta/2) tan(alpha/2)|.

    A convex link breaks the identity.

    Raises:
        PoleArgument: When sin((x+y)/2) vanishes or a half angle sits at a pole of the tangent
    """
    x = labelled_angle(surface, b, vertex, 'C2')
    y = labelled_angle(surface, b, vertex, 'C1')
    alpha = dihedral_angle(surface, surface.labelled_edge(vertex, b)).value
    beta = dihedral_angle(surface, surface.labelled_edge(vertex, 'C1')).value
    s = math.sin((x + y) / 2)
    if abs(s) < pole_tolerance:
        raise PoleArgument(f"sin((x+y)/2) = {s:.2e}")
    for name, angle in (('alpha', alpha), ('beta', beta)):
        if abs(math.cos(angle / 2)) < pole_tolerance:
            raise PoleArgument(f"{name}/2 is at a pole of the tangent")
    return abs(abs(math.sin((x - y) / 2) / s) - abs(math.tan(beta / 2) * math.tan(alpha / 2)))


def napier_checks(surface, pole_tolerance=1e-8):
    """
    Dihedral Napier residuals at A1 and A2 of a type-3 sample, skipping poles.

    Returns:
        dict: 'vertex:apex' -> residual (None when skipped at a pole)
    """
    out = {}
    for vertex, b in (('A1', 'B2'), ('A1', 'B1'), ('A2', 'B1'), ('A2', 'B2')):
        name = f'{vertex}:{b}'
        try:
            out[name] = dihedral_napier_residual(surface, vertex, b, pole_tolerance)
        except PoleArgument as e:
            logger.warning(f"Napier check {name} skipped: {e}")
            out[name] = None
    return out


def face_angle_ratio(surface, vertex, b, c_first, c_second):
    """sin((x - y)/2) / sin((x + y)/2) with x = angle(b, vertex, c_first), y = angle(b, vertex, c_second)."""
    x = labelled_angle(surface, b, vertex, c_first)
    y = labelled_angle(surface, b, vertex, c_second)
    return math.sin((x - y) / 2) / math.sin((x + y) / 2)


def napier_left_sides(surface):
    """The face-angle ratios at A1 and at A2 of a type-3 octahedron; they agree in magnitude, the sign follows the labelling."""
    return (face_angle_ratio(surface, 'A1', 'B2', 'C2', 'C1'),
            face_angle_ratio(surface, 'A2', 'B1', 'C2', 'C1'))
