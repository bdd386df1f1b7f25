import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from latent_modes.traclus import LineSegment, pairwise_distances, segment_distance
from traclus_oracles import distance as oracle_distance
from traclus_oracles import random_segments

coord = st.floats(-50, 50, allow_nan=False)
points = st.tuples(coord, coord)
segments = st.builds(lambda s, e, ep, k: LineSegment(np.array(s), np.array(e), ep, k, k + 1),
                     points, points, st.integers(0, 3), st.integers(0, 5))


def as_tuple(seg):
    return (list(seg.start), list(seg.end), seg.provenance)


def test_identical_segments():
    a = LineSegment([0, 0], [1, 1])
    assert tuple(segment_distance(a, a)) == (0.0, 0.0, 0.0, 0.0)


def test_parallel_offset():
    a = LineSegment([0, 0], [4, 0], 0)
    b = LineSegment([0, 2.5], [4, 2.5], 1)
    d = segment_distance(a, b)
    assert d.perpendicular == pytest.approx(2.5) and d.parallel == 0.0 and d.angle == pytest.approx(0.0)
    assert d.total == pytest.approx(2.5)


def test_perpendicular_segments_angle_is_shorter_length():
    a = LineSegment([0, 0], [4, 0])
    b = LineSegment([1, 1], [1, 3])
    assert segment_distance(a, b).angle == pytest.approx(2.0)


def test_obtuse_angle_uses_full_length():
    a = LineSegment([0, 0], [4, 0])
    b = LineSegment([2, 1], [1, 1.5])
    assert segment_distance(a, b).angle == pytest.approx(np.hypot(1, 0.5))


def test_degenerate_segment_acts_as_point():
    a = LineSegment([0, 0], [4, 0])
    p = LineSegment([2, 3], [2, 3])
    d = segment_distance(a, p)
    assert d.perpendicular == pytest.approx(3.0) and d.angle == 0.0 and p.degenerate


def test_mismatched_dimensions():
    with pytest.raises(ValueError):
        segment_distance(LineSegment([0, 0], [1, 1]), LineSegment([0, 0, 0], [1, 1, 1]))


def test_weights_scale_components():
    a, b = LineSegment([0, 0], [4, 0]), LineSegment([5, 1], [6, 2])
    d = segment_distance(a, b)
    w = segment_distance(a, b, (2.0, 0.5, 3.0))
    assert w.total == pytest.approx(2 * d.perpendicular + 0.5 * d.parallel + 3 * d.angle)


@given(segments, segments)
def test_matches_oracle_and_is_symmetric(a, b):
    d = segment_distance(a, b)
    assert d.total == pytest.approx(oracle_distance(as_tuple(a), as_tuple(b)), rel=1e-9, abs=1e-9)
    assert d.total == segment_distance(b, a).total
    assert min(d) >= 0


@given(segments)
def test_self_distance_zero(a):
    assert segment_distance(a, a).total == 0.0


@pytest.mark.parametrize("seed", range(3))
def test_pairwise_matrix_matches_scalar(seed):
    segs = random_segments(np.random.default_rng(seed), 40, dim=3)
    D = pairwise_distances(segs, chunk_elems=500)
    assert np.array_equal(D, D.T) and np.all(np.diag(D) == 0)
    for i in range(0, 40, 3):
        for j in range(i + 1, 40, 5):
            assert D[i, j] == pytest.approx(segment_distance(segs[i], segs[j]).total, rel=1e-12, abs=1e-12)
