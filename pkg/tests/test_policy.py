import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from latent_modes.mountain_car import EnvState
from latent_modes.policy import (BCConfig, DenseLayer, PolicyNetwork, WeightFileError, forward, forward_batch,
                                 init_network, load_weights, mse_loss_and_grads, net_from_dict, net_to_dict,
                                 save_weights, teacher_action, train_bc)


def zero_net(hidden=4):
    return PolicyNetwork((DenseLayer(np.zeros((hidden, 2)), np.zeros(hidden), "tanh"),
                          DenseLayer(np.zeros((1, hidden)), np.zeros(1), "tanh")))


def random_net(rng, sizes=(2, 5, 3, 1), activation="tanh"):
    layers = []
    for k, (i, o) in enumerate(zip(sizes[:-1], sizes[1:])):
        act = "tanh" if k == len(sizes) - 2 else activation
        layers.append(DenseLayer(rng.normal(size=(o, i)), rng.normal(size=o), act))
    return PolicyNetwork(tuple(layers))


def test_zero_network_outputs_zero():
    action, latent = forward(zero_net(), EnvState(-0.3, 0.01))
    assert action == 0.0 and np.array_equal(latent, np.zeros(4))


def test_identity_hidden_layer_exposes_state():
    w = np.zeros((4, 2))
    w[0, 0] = w[1, 1] = 1.0
    net = PolicyNetwork((DenseLayer(w, np.zeros(4), "identity"),
                         DenseLayer(np.ones((1, 4)), np.zeros(1), "tanh")))
    _, latent = forward(net, EnvState(-0.3, 0.02))
    assert latent[0] == -0.3 and latent[1] == 0.02


def test_forward_rejects_wrong_input_width():
    with pytest.raises(ValueError):
        forward(zero_net(), np.zeros(3))


def test_network_invariants():
    with pytest.raises(ValueError):
        PolicyNetwork((DenseLayer(np.zeros((1, 2)), np.zeros(1), "tanh"),))
    with pytest.raises(ValueError):
        PolicyNetwork((DenseLayer(np.zeros((3, 2)), np.zeros(3), "tanh"),
                       DenseLayer(np.zeros((1, 4)), np.zeros(1), "tanh")))
    with pytest.raises(ValueError):
        DenseLayer(np.zeros((3, 2)), np.zeros(3), "sigmoid")


@pytest.mark.parametrize("v, expected", [(0.01, 1.0), (-0.01, -1.0), (0.0, 1.0)])
def test_teacher(v, expected):
    assert teacher_action(EnvState(-0.5, v)) == expected


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.integers(0, 2**16))
def test_action_is_squashed(p, v, seed):
    action, _ = forward(random_net(np.random.default_rng(seed)), np.array([p, v]))
    assert -1.0 <= action <= 1.0


@given(st.integers(0, 2**16))
def test_batch_matches_single(seed):
    rng = np.random.default_rng(seed)
    net = random_net(rng, activation="relu")
    X = rng.normal(size=(6, 2))
    actions, latents = forward_batch(net, X)
    for x, a, h in zip(X, actions, latents):
        a1, h1 = forward(net, x)
        assert a == pytest.approx(a1, abs=1e-14)
        np.testing.assert_allclose(h, h1, atol=1e-14)


def _flatten(net):
    return np.concatenate([np.concatenate([l.weights.ravel(), l.bias]) for l in net.layers])


def _rebuild(net, theta):
    layers, k = [], 0
    for l in net.layers:
        nw = l.weights.size
        w = theta[k:k + nw].reshape(l.weights.shape)
        b = theta[k + nw:k + nw + l.bias.size]
        k += nw + l.bias.size
        layers.append(DenseLayer(w, b, l.activation))
    return PolicyNetwork(tuple(layers))


def bc_gradient_rel_error(seed, h=1e-5):
    """Central differences on a 5-parameter net (2 -> 1 -> 1)."""
    rng = np.random.default_rng(seed)
    net = random_net(rng, sizes=(2, 1, 1), activation=("tanh", "relu", "identity")[seed % 3])
    X = rng.normal(size=(8, 2))
    y = rng.uniform(-1, 1, size=8)
    _, grads = mse_loss_and_grads(net, X, y)
    analytic = np.concatenate([np.concatenate([dw.ravel(), db]) for dw, db in grads])
    theta = _flatten(net)
    assert theta.size == 5
    numeric = np.empty_like(theta)
    for k in range(theta.size):
        e = np.zeros_like(theta)
        e[k] = h
        numeric[k] = (mse_loss_and_grads(_rebuild(net, theta + e), X, y)[0]
                      - mse_loss_and_grads(_rebuild(net, theta - e), X, y)[0]) / (2 * h)
    return np.linalg.norm(analytic - numeric) / max(np.linalg.norm(analytic), np.linalg.norm(numeric), 1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_bc_gradient_matches_finite_differences(seed):
    assert bc_gradient_rel_error(seed) < 1e-4


def test_zero_epochs_returns_initialization():
    cfg = BCConfig(epochs=0, seed=3)
    assert train_bc(cfg).net == init_network(cfg)


def test_training_is_deterministic():
    cfg = BCConfig(epochs=2, hidden_sizes=(8, 8), seed=5)
    assert train_bc(cfg).net == train_bc(cfg).net


def test_trained_policy_follows_teacher(trained_net):
    action, latent = forward(trained_net, EnvState(-0.5, 0.05))
    assert action > 0 and teacher_action(EnvState(-0.5, 0.05)) > 0
    assert latent.shape == (64,) and trained_net.latent_dim == 64


def test_weight_round_trip(tmp_path, trained_net):
    path = tmp_path / "w.json"
    save_weights(trained_net, path)
    assert load_weights(path) == trained_net


def test_mismatched_dimensions_named():
    data = net_to_dict(zero_net())
    data["layers"][1]["weights"] = [[0.0] * 3]
    with pytest.raises(WeightFileError, match="layer 1: expected in_dim 4"):
        net_from_dict(data)


@pytest.mark.parametrize("mutate, message", [
    (lambda d: d.update(layers=[]), "at least 2 layers"),
    (lambda d: d.update(input_dim="two"), "input_dim"),
    (lambda d: d["layers"][0].update(activation="swish"), "layer 0: unknown activation"),
    (lambda d: d["layers"][0].pop("bias"), "layer 0: malformed"),
    (lambda d: d["layers"][1].update(weights=[[0.0] * 4] * 2, bias=[0.0, 0.0]), "output width"),
])
def test_malformed_weight_files(mutate, message):
    data = net_to_dict(zero_net())
    mutate(data)
    with pytest.raises(WeightFileError, match=message):
        net_from_dict(json.loads(json.dumps(data)))


def test_invalid_json_file(tmp_path):
    path = tmp_path / "w.json"
    path.write_text("{not json")
    with pytest.raises(WeightFileError):
        load_weights(path)
