"""
Numerical continuation of flexes.

Every edge length is kept fixed through squared-length residuals, the rigid
motions are removed by a GaugeFrame and one extra equation (the driver) picks
the point along the one-dimensional flex. Singular flat positions are left with
a second-order predictor built from the self-stresses of the flat framework.
"""
import json
from dataclasses import dataclass, field
from pathlib import Path

import mpmath as mp
import numpy as np
import pandas as pd
from scipy.linalg import null_space
from scipy.optimize import least_squares

from .bricard import flex_parameter_of
from .config import load_settings
from .errors import (CombinatoricsMismatch, InvalidParameters,
                     KernelDimensionUnexpected, NoConvergence, SingularJacobian,
                     WrongBranch)
from .invariants import LinkShape, dihedral_angle, link_convexity, vertex_link
from .log import get_logger
from .mesh_io import mesh_from_dict, mesh_to_dict

logger = get_logger('flex_engine')

TWO_PI = 2.0 * np.pi
KERNEL_GAP = 1e3  # smallest accepted sigma_second_last / sigma_last away from flat positions


# ---------------------------------------------------------------------------
# gauge

@dataclass(frozen=True)
class GaugeFrame:
    """
    Removes the six rigid-motion degrees of freedom.

    The pinned vertex sits at the origin, the axis vertex on the positive
    x-axis and the plane vertex in the xy-plane with positive y.
    """
    pinned: int
    axis: int
    plane: int

    def __post_init__(self):
        if len({self.pinned, self.axis, self.plane}) != 3:
            raise InvalidParameters(f"Gauge vertices must be distinct: {self}")

    def fixed_coordinates(self):
        p, a, q = self.pinned, self.axis, self.plane
        return (3 * p, 3 * p + 1, 3 * p + 2, 3 * a + 1, 3 * a + 2, 3 * q + 2)

    def free_coordinates(self, n_vertices):
        fixed = set(self.fixed_coordinates())
        return np.array([i for i in range(3 * n_vertices) if i not in fixed])

    @classmethod
    def for_surface(cls, surface, flat=False):
        """Default frame: C1, A1, B1 for octahedra (A1, A2, B1 in a flat position), else the first face."""
        lab = surface.labels
        if {'A1', 'A2', 'B1', 'C1'} <= set(lab):
            if flat:
                return cls(lab['A1'], lab['A2'], lab['B1'])
            return cls(lab['C1'], lab['A1'], lab['B1'])
        return cls(*surface.faces[0])

    def normalize(self, surface):
        """Rigidly move a surface into this frame (in extended precision when it carries exact vertices)."""
        if surface.exact is not None:
            pts = surface.exact
            o = pts[self.pinned]
            e1 = _mp_unit([pts[self.axis][k] - o[k] for k in range(3)])
            r = [pts[self.plane][k] - o[k] for k in range(3)]
            proj = sum(r[k] * e1[k] for k in range(3))
            r = [r[k] - proj * e1[k] for k in range(3)]
            if mp.sqrt(sum(c * c for c in r)) < mp.mpf(10) ** (-mp.mp.dps // 2):
                raise InvalidParameters("Gauge vertices are collinear")
            e2 = _mp_unit(r)
            e3 = [e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2], e1[0] * e2[1] - e1[1] * e2[0]]
            exact = []
            for p in pts:
                d = [p[k] - o[k] for k in range(3)]
                exact.append(tuple(sum(d[k] * e[k] for k in range(3)) for e in (e1, e2, e3)))
            floats = np.array([[float(c) for c in p] for p in exact])
        else:
            v = surface.vertices
            o = v[self.pinned]
            e1 = _unit(v[self.axis] - o)
            r = v[self.plane] - o
            r = r - np.dot(r, e1) * e1
            if np.linalg.norm(r) < 1e-12 * max(surface.diameter(), 1.0):
                raise InvalidParameters("Gauge vertices are collinear")
            e2 = _unit(r)
            e3 = np.cross(e1, e2)
            floats = (v - o) @ np.column_stack([e1, e2, e3])
            exact = None
        x = floats.reshape(-1)
        x[list(self.fixed_coordinates())] = 0.0
        if exact is not None:
            exact = [list(p) for p in exact]
            for i in self.fixed_coordinates():
                exact[i // 3][i % 3] = mp.mpf(0)
            exact = tuple(tuple(p) for p in exact)
        return surface.with_vertices(x.reshape(-1, 3), exact)


def _unit(v):
    return v / np.linalg.norm(v)


def _mp_unit(v):
    n = mp.sqrt(sum(c * c for c in v))
    return [c / n for c in v]


# ---------------------------------------------------------------------------
# drivers

@dataclass(frozen=True)
class CoordinateDriver:
    vertex: int
    axis: int = 2

    def value(self, problem, x, near=None):
        return float(x[3 * self.vertex + self.axis])

    def gradient(self, problem, x):
        g = np.zeros_like(x)
        g[3 * self.vertex + self.axis] = 1.0
        return g

    def describe(self):
        return {'kind': 'coordinate', 'vertex': self.vertex, 'axis': 'xyz'[self.axis]}


@dataclass(frozen=True, eq=False)
class AngleDriver:
    """A periodic chart given by an angle function of the surface, unwrapped toward a nearby value."""
    name: str
    angle: object  # surface -> float
    step: float = 1e-7

    def value(self, problem, x, near=None):
        a = self.angle(problem.surface_at(x))
        if near is not None:
            a += TWO_PI * round((near - a) / TWO_PI)
        return float(a)

    def gradient(self, problem, x):
        h = self.step * problem.scale
        base = self.value(problem, x)
        g = np.zeros_like(x)
        for i in problem.free:
            xp = x.copy()
            xm = x.copy()
            xp[i] += h
            xm[i] -= h
            g[i] = (self.value(problem, xp, base) - self.value(problem, xm, base)) / (2 * h)
        return g

    def describe(self):
        return {'kind': 'angle', 'name': self.name}


def dihedral_driver(surface, a, b):
    """Driver following the oriented dihedral angle at edge ab (labels or indices)."""
    lab = surface.labels
    i = lab.get(a, a)
    j = lab.get(b, b)
    k = surface.edge_index(i, j)
    return AngleDriver(f'dihedral {surface.edge_name(k)}', lambda s: dihedral_angle(s, k).value)


def four_bar_driver():
    """Driver equal to the type-1/2 construction parameter (four-bar input angle at C1A1)."""
    return AngleDriver('four-bar', flex_parameter_of)


# ---------------------------------------------------------------------------
# problem, samples and paths

@dataclass(frozen=True)
class FlexSample:
    t: float
    surface: object
    residual: float


@dataclass(frozen=True, eq=False)
class FlexProblem:
    """Start surface moved into its gauge frame, with the edge data the solver needs."""
    template: object
    gauge: GaugeFrame
    settings: object

    @classmethod
    def from_surface(cls, surface, gauge=None, settings=None):
        gauge = gauge or GaugeFrame.for_surface(surface)
        settings = settings or load_settings()
        with mp.workdps(settings.dps):
            template = gauge.normalize(surface)
        return cls(template, gauge, settings)

    @property
    def free(self):
        return self.gauge.free_coordinates(self.template.n_vertices)

    @property
    def edge_array(self):
        return np.array([e.endpoints for e in self.template.edges])

    @property
    def reference_squared(self):
        return self.template.lengths() ** 2

    @property
    def scale(self):
        return max(self.template.lengths())

    def surface_at(self, x, exact=None):
        return self.template.with_vertices(np.asarray(x).reshape(-1, 3), exact)

    def start_vector(self):
        return self.template.vertices.reshape(-1).copy()


def squared_residual(x, edges, reference_squared):
    p = x.reshape(-1, 3)
    d = p[edges[:, 0]] - p[edges[:, 1]]
    return np.einsum('ij,ij->i', d, d) - reference_squared


def squared_jacobian(x, edges):
    p = x.reshape(-1, 3)
    d = p[edges[:, 0]] - p[edges[:, 1]]
    J = np.zeros((len(edges), x.size))
    for r, (i, j) in enumerate(edges):
        J[r, 3 * i:3 * i + 3] = 2 * d[r]
        J[r, 3 * j:3 * j + 3] = -2 * d[r]
    return J


def constraint_residual(surface, reference):
    """
    Squared-length residual of every edge against a reference.

    Args:
        surface: PolyhedralSurface
        reference: PolyhedralSurface with the same combinatorics, or its edge lengths

    Returns:
        numpy.ndarray: current squared length minus reference squared length per edge
    """
    if hasattr(reference, 'edges'):
        if [e.endpoints for e in reference.edges] != [e.endpoints for e in surface.edges]:
            raise CombinatoricsMismatch("Surfaces have different edge sets")
        ref = reference.lengths()
    else:
        ref = np.asarray(reference, dtype=float)
        if ref.shape != (len(surface.edges),):
            raise CombinatoricsMismatch(f"Expected {len(surface.edges)} reference lengths, got {ref.shape}")
    edges = np.array([e.endpoints for e in surface.edges])
    return squared_residual(surface.vertices.reshape(-1), edges, ref ** 2)


@dataclass(frozen=True, eq=False)
class FlexPath:
    gauge: GaugeFrame
    samples: tuple
    driver: dict
    reference_lengths: np.ndarray
    step_bound: float = np.inf
    metadata: dict = field(default_factory=dict)

    def surfaces(self):
        return [s.surface for s in self.samples]

    def parameters(self):
        return np.array([s.t for s in self.samples])

    def residuals(self):
        return np.array([s.residual for s in self.samples])

    def max_length_drift(self):
        """Largest relative edge-length change against sample 0."""
        ref = self.reference_lengths
        return float(max(np.max(np.abs(s.lengths() - ref) / ref) for s in self.surfaces()))

    def max_step(self):
        v = [s.vertices for s in self.surfaces()]
        if len(v) < 2:
            return 0.0
        return float(max(np.max(np.linalg.norm(b - a, axis=1)) for a, b in zip(v, v[1:])))

    def gauge_fixed(self):
        """True when the gauge coordinates are bit-identical across samples."""
        idx = list(self.gauge.fixed_coordinates())
        first = self.samples[0].surface.vertices.reshape(-1)[idx]
        return all(np.array_equal(s.surface.vertices.reshape(-1)[idx], first) for s in self.samples)

    def reversed(self):
        return FlexPath(self.gauge, tuple(reversed(self.samples)), self.driver, self.reference_lengths,
                        self.step_bound, dict(self.metadata))


def _solve(problem, x0, extra, tolerance=None, max_iterations=None):
    """Gauss-Newton on the squared-length residuals plus extra (value, gradient) equations."""
    settings = problem.settings
    tolerance = tolerance or settings.newton_tolerance
    max_iterations = max_iterations or settings.newton_max_iterations
    edges = problem.edge_array
    ref = problem.reference_squared
    free = problem.free
    x = x0.copy()
    for it in range(max_iterations + 1):
        F = np.concatenate([squared_residual(x, edges, ref), [f(x) for f, _ in extra]])
        if np.max(np.abs(F)) < tolerance:
            return x
        if it == max_iterations or not np.all(np.isfinite(F)):
            break
        J = squared_jacobian(x, edges)
        if extra:
            J = np.vstack([J, [g(x) for _, g in extra]])
        dx = np.linalg.lstsq(J[:, free], -F, rcond=None)[0]
        x[free] += dx
        if np.max(np.abs(x)) > 1e6 * problem.scale:
            break
    raise NoConvergence(f"Newton did not converge in {max_iterations} iterations (residual {np.max(np.abs(F)):.3e})")


def _length_singular_values(problem, x):
    J = squared_jacobian(x, problem.edge_array)[:, problem.free]
    return np.linalg.svd(J, compute_uv=False)


def tangent_vector(problem, x):
    """Unit vector spanning the smallest right singular direction of the length Jacobian."""
    J = squared_jacobian(x, problem.edge_array)[:, problem.free]
    _, _, vt = np.linalg.svd(J)
    t = np.zeros_like(x)
    t[problem.free] = vt[-1]
    return t


def kernel_gap(problem, surface):
    """
    Ratio of the two smallest singular values of the gauge-fixed length Jacobian.

    The last singular value is floored at rounding level, so a surface with a
    multi-dimensional kernel gives a ratio near or below one.
    """
    s = _length_singular_values(problem, surface.vertices.reshape(-1))
    floor = np.finfo(float).eps * len(s) * s[0]
    return float(s[-2] / max(s[-1], floor))


def _check_kernel(problem, samples):
    for k, sample in enumerate(samples):
        gap = kernel_gap(problem, sample.surface)
        if gap < KERNEL_GAP:
            raise KernelDimensionUnexpected(f"Flex kernel is not one-dimensional at sample {k} "
                                            f"(singular value gap {gap:.3e})")


def _check_regular(problem, x, driver):
    J = squared_jacobian(x, problem.edge_array)
    Jf = J[:, problem.free]
    s = np.linalg.svd(Jf, compute_uv=False)
    if len(s) >= 2 and s[-2] < 1e-9 * s[0]:
        raise SingularJacobian(f"Length Jacobian lost rank beyond the flex kernel (sigma={s[-2]:.3e})")
    Ja = np.vstack([J, driver.gradient(problem, x)])[:, problem.free]
    sa = np.linalg.svd(Ja, compute_uv=False)
    if sa[-1] < 1e-10 * sa[0]:
        raise SingularJacobian("Driver chart folds here (driver gradient orthogonal to the flex)")


def flex_step(problem, current, target, driver, guess=None, check=True):
    """
    Move one sample to a new driver value.

    Args:
        problem: FlexProblem
        current: FlexSample, already satisfying the length constraints
        target: Driver value to reach
        driver: CoordinateDriver or AngleDriver
        guess: Optional predicted coordinates; the kernel tangent is used otherwise
        check: Whether to test the Jacobian for folds and rank loss

    Returns:
        FlexSample: Newton-corrected sample with the driver at target
    """
    if target == current.t:
        return current
    x = current.surface.vertices.reshape(-1).copy()
    if guess is None:
        guess = x.copy()
        tangent = tangent_vector(problem, x)
        slope = float(np.dot(driver.gradient(problem, x), tangent))
        if abs(slope) > 1e-12:
            guess = x + (target - current.t) / slope * tangent
    extra = [(lambda y: driver.value(problem, y, target) - target, lambda y: driver.gradient(problem, y))]
    y = _solve(problem, guess, extra)
    if check:
        _check_regular(problem, y, driver)
    residual = float(np.max(np.abs(squared_residual(y, problem.edge_array, problem.reference_squared))))
    return FlexSample(float(target), problem.surface_at(y), residual)


def _start_sample(problem, driver, t0=None):
    x = problem.start_vector()
    residual = float(np.max(np.abs(squared_residual(x, problem.edge_array, problem.reference_squared))))
    if residual > 1e-10:
        raise NoConvergence(f"Start surface violates its own lengths (residual {residual:.3e})")
    value = driver.value(problem, x, t0)
    return FlexSample(value, problem.template, residual)


def _advance(problem, current, target, driver, previous=None, min_step=None):
    """Reach target from current, halving the step on failure down to min_step."""
    if min_step is None:
        min_step = problem.settings.min_step_fraction * abs(target - current.t)
    sample = current
    prev = previous
    while sample.t != target:
        step = target - sample.t
        while True:
            t_next = sample.t + step
            guess = None
            if prev is not None and prev.t != sample.t:
                ratio = (t_next - sample.t) / (sample.t - prev.t)
                guess = (sample.surface.vertices.reshape(-1)
                         + ratio * (sample.surface.vertices - prev.surface.vertices).reshape(-1))
            try:
                nxt = flex_step(problem, sample, t_next, driver, guess)
                break
            except (NoConvergence, SingularJacobian) as e:
                step /= 2.0
                logger.debug(f"Halving step at t={sample.t:.6f}: {e}")
                if abs(step) < min_step:
                    raise
        prev, sample = sample, nxt
    return sample, prev


def trace_flex(start, driving_range, samples, driver=None, gauge=None, settings=None):
    """
    Trace a flex over a range of driver values.

    Args:
        start: PolyhedralSurface satisfying its own edge lengths
        driving_range: (t_first, t_last) in driver units; 'arclength' traces use (0, length)
        samples: Number of samples, including both ends
        driver: CoordinateDriver, AngleDriver or 'arclength' (four-bar chart for octahedra by default)
        gauge: Optional GaugeFrame
        settings: Optional Settings

    Returns:
        FlexPath: The sampled path

    Raises:
        KernelDimensionUnexpected: When the start or a sample has no isolated one-dimensional flex kernel
    """
    problem = FlexProblem.from_surface(start, gauge, settings)
    _check_kernel(problem, [FlexSample(0.0, problem.template, 0.0)])
    if driver == 'arclength':
        path = _trace_arclength(problem, driving_range, samples)
        _check_kernel(problem, path.samples)
        return path
    if driver is None:
        if 'C1' not in start.labels:
            raise InvalidParameters("A driver is required for unlabelled surfaces")
        driver = four_bar_driver()
    t0, t1 = (float(v) for v in driving_range)
    first = _start_sample(problem, driver, t0)
    if t0 == t1 or samples < 2:
        return _make_path(problem, [FlexSample(first.t, first.surface, first.residual)], driver.describe())
    if abs(first.t - t0) > 1e-14:
        first, _ = _advance(problem, first, t0, driver)
    out = [first]
    prev = None
    min_step = problem.settings.min_step_fraction * abs(t1 - t0)
    for target in np.linspace(t0, t1, samples)[1:]:
        nxt, prev = _advance(problem, out[-1], float(target), driver, prev, min_step)
        out.append(nxt)
        logger.debug(f"Sample {len(out) - 1}/{samples - 1} at t={target:.6f}")
    _check_kernel(problem, out)
    path = _make_path(problem, out, driver.describe())
    logger.info(f"Traced {len(out)} samples over [{t0:.6f}, {t1:.6f}], max drift {path.max_length_drift():.2e}")
    return path


def _make_path(problem, samples, driver, metadata=None):
    return FlexPath(problem.gauge, tuple(samples), driver, problem.template.lengths(),
                    0.25 * problem.template.diameter(), metadata or {})


def _arclength_steps(problem, x_start, hint, h, steps, t_start=0.0, sign=1.0):
    """Pseudo-arclength continuation; returns samples with t = t_start + sign * cumulative arclength."""
    settings = problem.settings
    tangent = tangent_vector(problem, x_start)
    if np.dot(tangent, hint) < 0:
        tangent = -tangent
    x = x_start
    t = t_start
    out = []
    for k in range(steps):
        step = h
        while True:
            x_pred = x + step * tangent
            direction = tangent.copy()
            extra = [(lambda y, p=x_pred, d=direction: float(np.dot(d, y - p)), lambda y, d=direction: d)]
            try:
                y = _solve(problem, x_pred, extra)
                moved = np.linalg.norm(y - x)
                if moved > 2.0 * step or moved < 0.25 * step:
                    raise NoConvergence(f"Corrector jumped {moved:.3e} for a step of {step:.3e}")
                break
            except NoConvergence as e:
                step /= 2.0
                logger.debug(f"Arclength step halved to {step:.3e}: {e}")
                if step < settings.min_step_fraction * h * steps:
                    raise
        new_tangent = tangent_vector(problem, y)
        if np.dot(new_tangent, y - x) < 0:
            new_tangent = -new_tangent
        t += sign * float(np.linalg.norm(y - x))
        residual = float(np.max(np.abs(squared_residual(y, problem.edge_array, problem.reference_squared))))
        out.append(FlexSample(t, problem.surface_at(y), residual))
        x, tangent = y, new_tangent
    return out


def _trace_arclength(problem, driving_range, samples, orientation=1.0):
    lo, hi = (float(v) for v in driving_range)
    x0 = problem.start_vector()
    first = FlexSample(lo, problem.template, float(np.max(np.abs(
        squared_residual(x0, problem.edge_array, problem.reference_squared)))))
    if hi == lo or samples < 2:
        return _make_path(problem, [first], {'kind': 'arclength'})
    h = (hi - lo) / (samples - 1)
    hint = orientation * tangent_vector(problem, x0)
    rest = _arclength_steps(problem, x0, hint, abs(h), samples - 1, lo, np.sign(h))
    return _make_path(problem, [first] + rest, {'kind': 'arclength'})


# ---------------------------------------------------------------------------
# flat positions

@dataclass(frozen=True, eq=False)
class Kickoff:
    direction: np.ndarray  # unit first-order flex direction (full coordinate vector)
    curvature: np.ndarray  # second-order correction for the direction scaled to 1 at norm_index
    sample: FlexSample  # corrected position one step off the plane
    shape: LinkShape
    candidates: tuple  # (unit direction, link shape) for both orientations of every second-order flex
    norm_index: int  # coordinate driven off the plane (largest component of the direction)


def _stress_and_cone(problem, x0):
    J = squared_jacobian(x0, problem.edge_array)
    free = problem.free
    z_free = np.array([i for i in free if i % 3 == 2])
    xy_free = np.array([i for i in free if i % 3 != 2])
    J_xy = J[:, xy_free]
    if null_space(J_xy).shape[1] != 0:
        raise KernelDimensionUnexpected("Flat framework has an infinitesimal in-plane flex")
    stresses = null_space(J_xy.T)
    if stresses.shape[1] == 0:
        raise KernelDimensionUnexpected("Flat framework carries no self-stress")
    return J_xy, stresses, z_free, xy_free


def _quadratic_terms(z_full, edges):
    z = z_full.reshape(-1, 3)[:, 2]
    return (z[edges[:, 0]] - z[edges[:, 1]]) ** 2


def _second_order_directions(problem, x0, stresses, z_free):
    """
    Unit out-of-plane directions z with stress . q(z) = 0 for every self-stress, one per antipodal pair.

    The system is solved on the unit sphere from seeded random starts, so no
    coordinate of a solution has to be nonzero.
    """
    edges = problem.edge_array

    def full(values):
        z = np.zeros_like(x0)
        z[z_free] = values
        return z

    def equations(values):
        return np.append(stresses.T @ _quadratic_terms(full(values), edges), values @ values - 1.0)

    rng = np.random.default_rng(problem.settings.seed)
    starts = rng.normal(size=(max(64, 16 * len(z_free)), len(z_free)))
    found = []
    for start in starts:
        sol = least_squares(equations, start / np.linalg.norm(start), xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if np.max(np.abs(equations(sol.x))) > 1e-10:
            continue
        v = sol.x / np.linalg.norm(sol.x)
        if all(min(np.max(np.abs(v - f)), np.max(np.abs(v + f))) > 1e-6 for f in found):
            found.append(v)
    logger.debug(f"{len(found)} second-order flex directions at the flat position")
    return [full(v) for v in found]


def _kick_sample(problem, x0, z, w, s, norm_index):
    guess = x0 + s * z + s * s * w
    extra = [(lambda y: y[norm_index] - s, lambda y: np.eye(1, y.size, norm_index)[0])]
    y = _solve(problem, guess, extra)
    residual = float(np.max(np.abs(squared_residual(y, problem.edge_array, problem.reference_squared))))
    return FlexSample(float(s), problem.surface_at(y), residual)


def _link_vertex(problem):
    lab = problem.template.labels
    return lab.get('A1', problem.gauge.pinned)


def flex_kickoff(flat, gauge=None, settings=None, step=None):
    """
    Leave a flat (coplanar) position along the branch whose vertex link is self-intersecting.

    Every second-order flex direction is tried in both orientations (a
    direction and its mirror image in the plane); the branch whose link at A1
    becomes self-intersecting is kept.

    Args:
        flat: Flat PolyhedralSurface
        gauge: Optional GaugeFrame (A1, A2, B1 for labelled octahedra)
        settings: Optional Settings
        step: Distance the driven coordinate is moved off the plane

    Returns:
        Kickoff: Unit direction, curvature term and the corrected first sample

    Raises:
        KernelDimensionUnexpected: When no second-order flex leaves the plane
        WrongBranch: When every candidate link is convex, or several distinct branches self-intersect
    """
    problem = FlexProblem.from_surface(flat, gauge or GaugeFrame.for_surface(flat, flat=True), settings)
    x0 = problem.start_vector()
    diameter = problem.template.diameter()
    if np.max(np.abs(problem.template.vertices[:, 2])) > 1e-9 * diameter:
        raise InvalidParameters("flex_kickoff needs a flat (coplanar) surface")
    J_xy, stresses, z_free, xy_free = _stress_and_cone(problem, x0)
    step = step or 1e-3 * diameter
    pinv = np.linalg.pinv(J_xy)
    v_link = _link_vertex(problem)
    r = 1e-6 * min(problem.template.lengths())

    directions = _second_order_directions(problem, x0, stresses, z_free)
    if not directions:
        raise KernelDimensionUnexpected("No second-order flex leaves the flat position")
    candidates = []
    for k, d in enumerate(directions):
        norm_index = int(z_free[np.argmax(np.abs(d[z_free]))])
        z = d / d[norm_index]
        unit = z / np.linalg.norm(z)
        w = np.zeros_like(x0)
        w[xy_free] = -pinv @ _quadratic_terms(z, problem.edge_array)
        for sign in (1.0, -1.0):
            try:
                sample = _kick_sample(problem, x0, z, w, sign * step, norm_index)
            except NoConvergence as e:
                logger.warning(f"Second-order candidate {k} ({'+' if sign > 0 else '-'}) could not be corrected: {e}")
                continue
            shape = link_convexity(vertex_link(sample.surface, v_link, r))
            logger.debug(f"Kickoff candidate {k} ({'+' if sign > 0 else '-'}) gives a {shape.value} link")
            candidates.append((k, sign * unit, w, sample, shape, norm_index))
    if not candidates:
        raise KernelDimensionUnexpected("No second-order flex could be corrected off the flat position")
    chosen = [c for c in candidates if c[4] is LinkShape.SELF_INTERSECTING]
    if not chosen:
        raise WrongBranch(f"All {len(candidates)} flex candidates give a convex vertex link")
    if len({c[0] for c in chosen}) > 1:
        raise WrongBranch(f"{len({c[0] for c in chosen})} flex directions give a self-intersecting link; "
                          f"refusing to choose")
    _, direction, w, sample, shape, norm_index = chosen[0]
    logger.info(f"Kickoff selected (candidates: {[c[4].value for c in candidates]})")
    return Kickoff(direction, w, sample, shape, tuple((c[1], c[4]) for c in candidates), norm_index)


def check_chart_overlap(problem, sample, driver):
    """
    Consistency of a chart at a sample reached through another one.

    The sample is pushed along the flex and solved back to its own driver
    value; the returned displacement is zero when both charts agree.
    """
    x = sample.surface.vertices.reshape(-1)
    value = driver.value(problem, x)
    extra = [(lambda y: driver.value(problem, y, value) - value, lambda y: driver.gradient(problem, y))]
    y = _solve(problem, x + 1e-4 * problem.scale * tangent_vector(problem, x), extra)
    return float(np.max(np.abs(y - x)))


def trace_from_flat(flat, samples_per_direction=100, length=None, settings=None):
    """
    Trace a flex through a flat position in both directions.

    Near the flat position the z-coordinate of the normalising vertex drives
    the flex; the path then switches to pseudo-arclength. The returned path is
    parametrised by signed arclength with the flat position at t = 0.
    """
    gauge = GaugeFrame.for_surface(flat, flat=True)
    problem = FlexProblem.from_surface(flat, gauge, settings)
    kick = flex_kickoff(flat, gauge, problem.settings)
    x0 = problem.start_vector()
    diameter = problem.template.diameter()
    length = length or 0.5 * diameter
    h = length / samples_per_direction
    norm_vertex = kick.norm_index // 3
    chart = CoordinateDriver(norm_vertex, 2)
    min_step = problem.settings.min_step_fraction * length

    branches = []
    for sign in (1.0, -1.0):
        z = kick.direction / kick.direction[kick.norm_index]
        s0 = sign * abs(kick.sample.t)
        first = _kick_sample(problem, x0, z, kick.curvature, s0, kick.norm_index)
        t = sign * float(np.linalg.norm(first.surface.vertices - problem.template.vertices))
        side = [FlexSample(t, first.surface, first.residual)]
        # z chart while it is regular
        current = FlexSample(s0, first.surface, first.residual)
        target_count = max(samples_per_direction // 5, 1)
        prev = None
        for _ in range(target_count):
            target = current.t + sign * h
            try:
                nxt, prev = _advance(problem, current, target, chart, prev, min_step)
            except (NoConvergence, SingularJacobian) as e:
                logger.info(f"Leaving the coordinate chart at z={current.t:.4f}: {e}")
                break
            t += sign * float(np.linalg.norm(nxt.surface.vertices - current.surface.vertices))
            side.append(FlexSample(t, nxt.surface, nxt.residual))
            current = nxt
        else:
            try:
                drift = check_chart_overlap(problem, current, chart)
            except NoConvergence:
                drift = np.inf
            if drift > 1e-9 * diameter:
                logger.warning(f"Coordinate chart is not consistent at the switch (drift {drift:.2e})")
        x_switch = side[-1].surface.vertices.reshape(-1)
        if len(side) > 1:
            hint = x_switch - side[-2].surface.vertices.reshape(-1)
        else:
            hint = x_switch - x0
        remaining = samples_per_direction - len(side)
        if remaining > 0:
            side.extend(_arclength_steps(problem, x_switch, hint, h, remaining, t, sign))
        branches.append(side)

    flat_sample = FlexSample(0.0, problem.template, float(np.max(np.abs(
        squared_residual(x0, problem.edge_array, problem.reference_squared)))))
    samples = list(reversed(branches[1])) + [flat_sample] + branches[0]
    logger.info(f"Traced {len(samples)} samples through the flat position")
    return _make_path(problem, samples, {'kind': 'flat-start', 'chart': chart.describe()},
                      {'flat_index': len(branches[1]), 'kickoff_shape': kick.shape.value})


# ---------------------------------------------------------------------------
# extended precision polishing

def polish_sample(problem, sample, dps=None, tolerance=None):
    """
    Newton-polish a sample in mpmath against the template's extended-precision lengths.

    The free coordinate with the largest flex-tangent component is held at its
    current value; the remaining free coordinates are solved through the
    normal equations. Newton runs with ten guard digits until the squared
    lengths agree to 10^-dps relative to the longest edge, so the returned
    coordinates carry dps correct digits.

    Returns:
        FlexSample: Same position carrying extended-precision vertices
    """
    dps = dps or problem.settings.dps
    x_float = sample.surface.vertices.reshape(-1)
    tangent = tangent_vector(problem, x_float)
    free = list(problem.free)
    held = max(free, key=lambda i: abs(tangent[i]))
    unknowns = [i for i in free if i != held]
    edges = [e.endpoints for e in problem.template.edges]
    with mp.workdps(dps + 10):
        tolerance = tolerance or mp.mpf(10) ** (-dps) * mp.mpf(problem.scale) ** 2
        ref_pts = problem.template.exact_vertices()
        ref = [sum((ref_pts[i][k] - ref_pts[j][k]) ** 2 for k in range(3)) for i, j in edges]
        x = [mp.mpf(float(c)) for c in x_float]
        for _ in range(50):
            F = []
            J = mp.zeros(len(edges), len(unknowns))
            col = {u: c for c, u in enumerate(unknowns)}
            for r, (i, j) in enumerate(edges):
                d = [x[3 * i + k] - x[3 * j + k] for k in range(3)]
                F.append(sum(c * c for c in d) - ref[r])
                for k in range(3):
                    if 3 * i + k in col:
                        J[r, col[3 * i + k]] = 2 * d[k]
                    if 3 * j + k in col:
                        J[r, col[3 * j + k]] = -2 * d[k]
            if max(abs(f) for f in F) < tolerance:
                break
            Fm = mp.matrix(F)
            dx = mp.lu_solve(J.T * J, -(J.T * Fm))
            for c, u in enumerate(unknowns):
                x[u] += dx[c]
        else:
            raise NoConvergence("Extended-precision polishing did not converge")
        exact = tuple(tuple(x[3 * v + k] for k in range(3)) for v in range(len(x) // 3))
        floats = np.array([[float(c) for c in p] for p in exact])
        residual = float(max(abs(f) for f in F))
    return FlexSample(sample.t, problem.surface_at(floats.reshape(-1), exact), residual)


# ---------------------------------------------------------------------------
# export / import

def _vertex_names(surface):
    names = {idx: name for name, idx in surface.labels.items()}
    return [names.get(k, f'v{k}') for k in range(surface.n_vertices)]


def path_to_frame(path):
    """CSV layout: t, then x, y, z per vertex, then the residual."""
    names = _vertex_names(path.samples[0].surface)
    rows = []
    for s in path.samples:
        row = {'t': s.t}
        for name, p in zip(names, s.surface.vertices):
            row[f'{name}_x'], row[f'{name}_y'], row[f'{name}_z'] = (float(c) for c in p)
        row['residual'] = s.residual
        rows.append(row)
    return pd.DataFrame(rows)


def write_path_csv(path, filename):
    filename = Path(filename)
    filename.parent.mkdir(parents=True, exist_ok=True)
    path_to_frame(path).to_csv(filename, index=False, float_format='%.17g')
    return filename


def read_path_csv(filename, template, gauge=None):
    """Replay a CSV path against a template surface with the same vertex order."""
    frame = pd.read_csv(filename)
    names = _vertex_names(template)
    samples = []
    for _, row in frame.iterrows():
        v = np.array([[row[f'{n}_x'], row[f'{n}_y'], row[f'{n}_z']] for n in names])
        samples.append(FlexSample(float(row['t']), template.with_vertices(v), float(row['residual'])))
    gauge = gauge or GaugeFrame.for_surface(template)
    return FlexPath(gauge, tuple(samples), {'kind': 'replay'}, samples[0].surface.lengths())


def path_to_dict(path):
    return {
        'gauge': {'pinned': path.gauge.pinned, 'axis': path.gauge.axis, 'plane': path.gauge.plane},
        'driver': path.driver,
        'mesh': mesh_to_dict(path.samples[0].surface),
        'samples': [{'t': s.t, 'vertices': s.surface.vertices.tolist(), 'residual': s.residual}
                    for s in path.samples],
        'metadata': path.metadata,
    }


def write_path_json(path, filename):
    filename = Path(filename)
    filename.parent.mkdir(parents=True, exist_ok=True)
    filename.write_text(json.dumps(path_to_dict(path), indent=2, sort_keys=True))
    return filename


def read_path_json(filename):
    data = json.loads(Path(filename).read_text())
    template = mesh_from_dict(data['mesh'])
    samples = tuple(FlexSample(s['t'], template.with_vertices(s['vertices']), s['residual'])
                    for s in data['samples'])
    gauge = GaugeFrame(**data['gauge'])
    return FlexPath(gauge, samples, data['driver'], samples[0].surface.lengths(),
                    metadata=data.get('metadata', {}))
