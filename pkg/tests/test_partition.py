import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from latent_modes.traclus import characteristic_points, mdl_cost, partition
from traclus_oracles import exhaustive_partition, mdl


def l_shape():
    arm1 = [(2.0 * k, 0.0) for k in range(10)]
    arm2 = [(18.0, 3.0 * k) for k in range(1, 11)]
    return np.array(arm1 + arm2)


def test_collinear_points_give_one_segment():
    pts = np.column_stack([np.arange(10) * 2.0, np.arange(10) * 2.0])
    assert characteristic_points(pts) == [0, 9]
    segs = partition(pts, episode_id=4, step_indices=range(10, 20))
    assert len(segs) == 1 and segs[0].provenance == (4, 10, 19)


def test_l_shape_corner_matches_exhaustive_oracle():
    pts = l_shape()
    oracle_cps, _ = exhaustive_partition([list(p) for p in pts])
    assert oracle_cps == [0, 9, 19]
    assert characteristic_points(pts) == oracle_cps
    segs = partition(pts)
    assert len(segs) == 2 and np.array_equal(segs[0].end, [18.0, 0.0])


def test_two_points():
    segs = partition(np.array([[0.0, 0.0], [1.0, 1.0]]))
    assert len(segs) == 1


def test_too_few_points():
    with pytest.raises(ValueError):
        partition(np.zeros((1, 2)))


def test_mdl_examples():
    collinear = np.array([[0.0, 0.0], [3.0, 0.0], [7.0, 0.0]])
    assert mdl_cost(collinear, 0, 2, True) == pytest.approx(np.log2(7.0))
    unit = np.array([[0.0, 0.0], [0.5, 0.1], [1.0, 0.0]])
    assert mdl_cost(unit, 0, 2, True) - mdl_cost(unit, 0, 2, True, (0, 0, 0)) == 0.0
    assert mdl_cost(unit, 0, 2, True, (0, 0, 0)) == 0.0
    pts = np.random.default_rng(0).normal(size=(5, 3)) * 10
    for i in range(4):
        assert mdl_cost(pts, i, i + 1, True) == pytest.approx(mdl_cost(pts, i, i + 1, False))
    with pytest.raises(ValueError):
        mdl_cost(pts, 3, 3, True)


@given(st.integers(0, 2**16), st.integers(2, 30), st.sampled_from([2, 3]))
def test_partition_invariants(seed, n, dim):
    pts = np.cumsum(np.random.default_rng(seed).normal(size=(n, dim)) * 5, axis=0)
    cps = characteristic_points(pts)
    assert cps[0] == 0 and cps[-1] == n - 1
    assert all(a < b for a, b in zip(cps, cps[1:]))
    segs = partition(pts, 1, range(100, 100 + n))
    assert [s.start_step for s in segs] == [100 + c for c in cps[:-1]]
    assert [s.end_step for s in segs] == [100 + c for c in cps[1:]]


@given(st.integers(0, 2**16))
def test_mdl_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(8, 2)) * rng.uniform(0.5, 20)
    i, j = sorted(rng.choice(8, 2, replace=False))
    for flag in (True, False):
        assert mdl_cost(pts, i, j, flag) == pytest.approx(mdl([list(p) for p in pts], i, j, flag), abs=1e-9)
