"""
Tests for the flex tracer: constraint residuals, single steps, full traces and flat kickoffs.
"""
import logging

import mpmath as mp
import numpy as np
import pytest

from polyhedra import (TYPE3_REFERENCE, GaugeFrame, Type1Params, bricard_type1, bricard_type3_flat,
                       flex_kickoff, is_embedded, load_settings, trace_flex, trace_from_flat)
from polyhedra.bricard import admissible_intervals, flex_parameter_of
from polyhedra.errors import KernelDimensionUnexpected
from polyhedra.flex_engine import (KERNEL_GAP, FlexProblem, _start_sample, constraint_residual, flex_step,
                                   four_bar_driver, kernel_gap, polish_sample, read_path_csv, read_path_json,
                                   write_path_csv, write_path_json)
from polyhedra.geometry_core import apply_rigid_motion, random_rigid_motion
from polyhedra.invariants import LinkShape

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger('test_flex_engine')

STEFFEN_LENGTHS = Type1Params(a1b1=5, a1b2=11, c1a1=12, c1b1=10, c1a2=10, c1b2=12)


def four_bar_range(params=STEFFEN_LENGTHS, margin=0.1):
    lo, hi = max(admissible_intervals(params), key=lambda iv: iv[1] - iv[0])
    pad = margin * (hi - lo)
    return lo + pad, hi - pad


def test_residual_of_reference_is_zero():
    s = bricard_type1(STEFFEN_LENGTHS)
    assert np.max(np.abs(constraint_residual(s, s))) < 1e-12


def test_residual_under_rigid_motion():
    """Lengths are invariant under rigid motions."""
    s = bricard_type1(STEFFEN_LENGTHS)
    rotation, translation = random_rigid_motion(np.random.default_rng(3))
    moved = apply_rigid_motion(s, rotation, translation)
    assert np.max(np.abs(constraint_residual(moved, s))) < 1e-10


def test_residual_first_order():
    """Pulling a vertex along one incident edge changes that squared length by about 2|l|delta."""
    s = bricard_type1(STEFFEN_LENGTHS)
    k = s.labelled_edge('A1', 'B1')
    i, j = s.edges[k].endpoints
    d = s.vertices[j] - s.vertices[i]
    d = d / np.linalg.norm(d)
    delta = 1e-7
    v = s.vertices.copy()
    v[j] = v[j] + delta * d
    r = constraint_residual(s.with_vertices(v), s)
    assert abs(r[k] - 2 * s.edges[k].length * delta) < 1e-10
    untouched = [m for m, e in enumerate(s.edges) if j not in e.endpoints]
    assert np.max(np.abs(r[untouched])) < 1e-12


def test_step_to_same_value():
    s = bricard_type1(STEFFEN_LENGTHS, four_bar_range()[0])
    problem = FlexProblem.from_surface(s)
    driver = four_bar_driver()
    current = _start_sample(problem, driver)
    assert flex_step(problem, current, current.t, driver) is current


def test_small_step_keeps_lengths():
    lo, hi = four_bar_range()
    problem = FlexProblem.from_surface(bricard_type1(STEFFEN_LENGTHS, lo))
    driver = four_bar_driver()
    current = _start_sample(problem, driver, lo)
    nxt = flex_step(problem, current, lo + 0.01, driver)
    assert abs(nxt.t - (lo + 0.01)) < 1e-15
    assert np.max(np.abs(nxt.surface.lengths() / problem.template.lengths() - 1)) < 1e-10


def test_type1_trace():
    """A type-1 trace over 200 samples keeps every edge length and follows the closed form."""
    logger.info("Testing a 200-sample type-1 trace...")
    lo, hi = four_bar_range()
    path = trace_flex(bricard_type1(STEFFEN_LENGTHS, lo), (lo, hi), 200)
    assert len(path.samples) == 200
    assert path.max_length_drift() < 1e-10
    assert path.gauge_fixed()
    assert path.samples[0].surface.exact is not None
    scale = max(path.reference_lengths)
    for s in path.surfaces()[::40]:
        exact = path.gauge.normalize(bricard_type1(STEFFEN_LENGTHS, flex_parameter_of(s)))
        assert np.max(np.abs(s.vertices - exact.vertices)) < 1e-8 * scale


def test_zero_length_range():
    lo, _ = four_bar_range()
    start = bricard_type1(STEFFEN_LENGTHS, lo)
    path = trace_flex(start, (lo, lo), 10)
    assert len(path.samples) == 1
    normalized = GaugeFrame.for_surface(start).normalize(start)
    assert np.max(np.abs(path.samples[0].surface.vertices - normalized.vertices)) < 1e-12


def test_flat_kickoff():
    """Leaving the flat type-3 position makes the link at A1 self-intersecting."""
    logger.info("Testing the flat kickoff...")
    flat, _ = bricard_type3_flat(TYPE3_REFERENCE)
    kick = flex_kickoff(flat)
    assert kick.shape is LinkShape.SELF_INTERSECTING
    assert abs(np.linalg.norm(kick.direction) - 1.0) < 1e-12
    assert len(kick.candidates) >= 1
    assert not is_embedded(kick.sample.surface)


def test_trace_from_flat():
    flat, _ = bricard_type3_flat(TYPE3_REFERENCE)
    path = trace_from_flat(flat, 20, settings=load_settings())
    assert path.metadata['flat_index'] == 20
    assert len(path.samples) == 41
    assert path.samples[20].t == 0.0
    assert path.max_length_drift() < 1e-10
    ts = path.parameters()
    assert np.all(np.diff(ts) > 0)


def test_forward_backward_retrace():
    """Tracing a type-1 flex back over the same range revisits the forward samples."""
    logger.info("Testing a forward-then-backward retrace...")
    lo, hi = four_bar_range()
    forward = trace_flex(bricard_type1(STEFFEN_LENGTHS, lo), (lo, hi), 30)
    backward = trace_flex(bricard_type1(STEFFEN_LENGTHS, hi), (hi, lo), 30, gauge=forward.gauge)
    scale = max(forward.reference_lengths)
    assert np.allclose(backward.parameters()[::-1], forward.parameters(), rtol=0, atol=1e-12)
    for a, b in zip(forward.surfaces(), reversed(backward.surfaces())):
        assert np.max(np.abs(a.vertices - b.vertices)) < 1e-8 * scale


def test_kernel_gap():
    """Traced type-1 samples have a one-dimensional flex kernel; a flat start does not."""
    lo, hi = four_bar_range()
    path = trace_flex(bricard_type1(STEFFEN_LENGTHS, lo), (lo, hi), 20)
    problem = FlexProblem(path.samples[0].surface, path.gauge, load_settings())
    assert min(kernel_gap(problem, s) for s in path.surfaces()) > KERNEL_GAP
    flat, _ = bricard_type3_flat(TYPE3_REFERENCE)
    assert kernel_gap(FlexProblem.from_surface(flat), flat) < 1.0
    with pytest.raises(KernelDimensionUnexpected):
        trace_flex(flat, (0.0, 0.1), 5)


def test_kickoff_candidates_come_in_mirror_pairs():
    """Each second-order direction is tried with its mirror image, which gives the same link shape."""
    flat, _ = bricard_type3_flat(TYPE3_REFERENCE)
    kick = flex_kickoff(flat)
    assert len(kick.candidates) % 2 == 0
    for direction, shape in kick.candidates:
        mirrors = [s for d, s in kick.candidates if np.max(np.abs(d + direction)) < 1e-12]
        assert mirrors == [shape]


def test_polish_sample():
    """Polishing reaches the extended-precision edge lengths of the template."""
    lo, _ = four_bar_range()
    problem = FlexProblem.from_surface(bricard_type1(STEFFEN_LENGTHS, lo))
    driver = four_bar_driver()
    current = _start_sample(problem, driver, lo)
    sample = flex_step(problem, current, lo + 0.05, driver)
    polished = polish_sample(problem, sample)
    assert np.max(np.abs(polished.surface.vertices - sample.surface.vertices)) < 1e-9 * problem.scale
    with mp.workdps(problem.settings.dps):
        ref = problem.template.exact_vertices()
        pts = polished.surface.exact_vertices()
        worst = max(abs(sum((pts[i][k] - pts[j][k]) ** 2 for k in range(3))
                        - sum((ref[i][k] - ref[j][k]) ** 2 for k in range(3)))
                    for i, j in (e.endpoints for e in problem.template.edges))
        assert worst < mp.mpf(10) ** -45 * problem.scale ** 2


def test_path_files_round_trip(tmp_path):
    """A path written to CSV and JSON reads back with the same samples."""
    lo, hi = four_bar_range()
    path = trace_flex(bricard_type1(STEFFEN_LENGTHS, lo), (lo, hi), 8)
    scale = max(path.reference_lengths)
    from_csv = read_path_csv(write_path_csv(path, tmp_path / 'type1.path.csv'), path.samples[0].surface,
                             path.gauge)
    from_json = read_path_json(write_path_json(path, tmp_path / 'type1.path.json'))
    for replay in (from_csv, from_json):
        assert len(replay.samples) == len(path.samples)
        assert np.allclose(replay.parameters(), path.parameters(), rtol=1e-15, atol=0)
        for a, b in zip(path.surfaces(), replay.surfaces()):
            assert np.max(np.abs(a.vertices - b.vertices)) <= 1e-15 * scale
    assert all(np.array_equal(a.vertices, b.vertices) for a, b in zip(path.surfaces(), from_json.surfaces()))
    assert from_json.gauge == path.gauge
    assert from_json.metadata == path.metadata


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    logger.info("Starting flex engine tests...")
    test_residual_of_reference_is_zero()
    test_residual_under_rigid_motion()
    test_residual_first_order()
    test_step_to_same_value()
    test_small_step_keeps_lengths()
    test_type1_trace()
    test_zero_length_range()
    test_flat_kickoff()
    test_trace_from_flat()
    test_forward_backward_retrace()
    test_kernel_gap()
    test_kickoff_candidates_come_in_mirror_pairs()
    test_polish_sample()
    with tempfile.TemporaryDirectory() as d:
        test_path_files_round_trip(Path(d))
    logger.info("All flex engine tests passed")
