import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from latent_modes.mountain_car import EnvConfig, EnvState, initial_state_grid
from latent_modes.policy import BCConfig, forward, init_network, teacher_action
from latent_modes.rollout import (Episode, StepRecord, TrajectoryDataset, assemble_dataset, build_dataset,
                                  dedup_episodes, read_dataset_csv, run_episode, write_dataset_csv)

ENV = EnvConfig()


@pytest.fixture(scope="module")
def untrained():
    return init_network(BCConfig(hidden_sizes=(8, 8), seed=1))



def test_overrides_on_every_step_replay_the_teacher(trained_net):
    s0 = EnvState(-0.6, 0.0)
    # teacher rollout written out by hand
    from latent_modes.mountain_car import step
    state, teacher_states, teacher_actions = s0, [], []
    for k in range(ENV.max_steps):
        a = teacher_action(state)
        teacher_states.append(state)
        teacher_actions.append(a)
        r = step(state, a, ENV, k)
        state = r.next_state
        if r.terminated or r.truncated:
            break
    ep = run_episode(trained_net, ENV, s0, list(enumerate(teacher_actions)))
    assert [s.state for s in ep.steps] == teacher_states
    assert [s.action for s in ep.steps] == teacher_actions


def test_latent_comes_from_network_on_overridden_steps(trained_net):
    ep = run_episode(trained_net, ENV, EnvState(-0.35, 0.028), [(0, -1.0)])
    assert ep.steps[0].action == -1.0
    np.testing.assert_array_equal(ep.steps[0].latent, forward(trained_net, ep.steps[0].state)[1])


def test_duplicate_override_rejected(trained_net):
    with pytest.raises(ValueError):
        run_episode(trained_net, ENV, EnvState(-0.5, 0.0), [(0, 1.0), (0, -1.0)])
    with pytest.raises(ValueError):
        run_episode(trained_net, ENV, EnvState(-0.5, 0.0), [(-1, 1.0)])


def test_dataset_invariants(default_dataset, trained_net):
    ds = default_dataset
    assert len(ds.episodes) == 100
    assert [ep.episode_id for ep in ds.episodes] == list(range(100))
    assert ds.latent_matrix.shape == (sum(len(ep) for ep in ds.episodes), 64)
    assert len(set(ds.row_provenance)) == len(ds.row_provenance)
    for r, (ep_id, k) in enumerate(ds.row_provenance):
        step = ds.episode(ep_id).steps[k]
        assert step.step_index == k
        np.testing.assert_array_equal(ds.latent_matrix[r], forward(trained_net, step.state)[1])


def test_episode_invariants(default_dataset):
    for ep in default_dataset.episodes:
        assert ep.terminated != ep.truncated
        assert [s.step_index for s in ep.steps] == list(range(len(ep)))
        assert ep.total_reward == sum(s.reward for s in ep.steps)
        if ep.terminated:
            assert ep.steps[-1].reward == 100.0
            assert ep.total_reward == 100 - (len(ep) - 1)


def test_truncated_episodes_stay_out_of_latents(untrained):
    cfg = EnvConfig(max_steps=20)
    grid = initial_state_grid(2, 2)
    ds = build_dataset(untrained, cfg, grid)
    truncated = {ep.episode_id for ep in ds.episodes if ep.truncated}
    assert truncated
    assert not truncated & {ep for ep, _ in ds.row_provenance}
    full = build_dataset(untrained, cfg, grid, include_truncated=True)
    assert full.latent_matrix.shape[0] == sum(len(ep) for ep in full.episodes)


def test_single_state_and_goal_grids(untrained):
    one = build_dataset(untrained, ENV, [EnvState(-0.5, 0.0)], include_truncated=True)
    assert len(one.episodes) == 1 and one.latent_matrix.shape[0] == len(one.episodes[0])
    goal = build_dataset(untrained, ENV, initial_state_grid(2, 2, (0.5, 0.6), (0.0, 0.07)))
    assert all(len(ep) == 1 and ep.total_reward == 100.0 for ep in goal.episodes)


def test_empty_grid_rejected(untrained):
    with pytest.raises(ValueError):
        build_dataset(untrained, ENV, [])


def test_build_is_deterministic(trained_net):
    grid = initial_state_grid(3, 3)
    a, b = build_dataset(trained_net, ENV, grid), build_dataset(trained_net, ENV, grid)
    assert np.array_equal(a.latent_matrix, b.latent_matrix) and a.row_provenance == b.row_provenance


def hausdorff_oracle(a, b):
    def directed(x, y):
        return max(min(float(np.hypot(*(p - q))) for q in y) for p in x)
    return max(directed(a, b), directed(b, a))


def _toy_episode(ep_id, states):
    steps = [StepRecord(k, EnvState(*s), np.zeros(2), 0.0, -1.0) for k, s in enumerate(states)]
    return Episode(ep_id, steps, True, False)


def test_dedup_rules():
    a = _toy_episode(0, [(-0.5, 0.0), (-0.4, 0.01)])
    b = _toy_episode(1, [(-0.5, 0.0), (-0.4, 0.01)])
    c = _toy_episode(2, [(0.1, -0.05), (0.3, 0.06)])
    ds = assemble_dataset([a, b, c])
    assert dedup_episodes(ds, 0.0) == [0, 2]
    assert dedup_episodes(ds, 1e-6) == [0, 2]
    assert dedup_episodes(ds, float("inf")) == [0]
    with pytest.raises(ValueError):
        dedup_episodes(ds, -1.0)


def test_dedup_keeps_distinct_starts(default_dataset):
    assert dedup_episodes(default_dataset, 0.0) == list(range(100))


@given(st.floats(0, 2), st.integers(0, 2**16))
def test_dedup_kept_set_is_a_greedy_cover(tau, seed):
    rng = np.random.default_rng(seed)
    eps = [_toy_episode(i, rng.uniform([-1.2, -0.07], [0.6, 0.07], size=(3, 2))) for i in range(6)]
    ds = assemble_dataset(eps)
    kept = dedup_episodes(ds, tau)
    states = np.vstack([ep.states() for ep in eps])
    lo, span = states.min(axis=0), np.ptp(states, axis=0)
    norm = {ep.episode_id: (ep.states() - lo) / span for ep in eps}
    assert kept[0] == 0
    for i, a in enumerate(kept):
        for b in kept[i + 1:]:
            assert hausdorff_oracle(norm[a], norm[b]) > tau
    for ep in eps:
        if ep.episode_id not in kept:
            earlier = [k for k in kept if k < ep.episode_id]
            assert any(hausdorff_oracle(norm[ep.episode_id], norm[k]) <= tau for k in earlier)


def test_csv_round_trip(tmp_path, trained_net, untrained):
    ds = build_dataset(untrained, EnvConfig(max_steps=15), initial_state_grid(2, 2))
    path = tmp_path / "d.csv"
    write_dataset_csv(ds, path)
    back = read_dataset_csv(path)
    assert np.array_equal(back.latent_matrix, ds.latent_matrix)
    assert back.row_provenance == ds.row_provenance
    for x, y in zip(ds.episodes, back.episodes):
        assert (x.terminated, x.truncated, len(x)) == (y.terminated, y.truncated, len(y))
        assert [s.state for s in x.steps] == [s.state for s in y.steps]


def test_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_dataset_csv(path)
