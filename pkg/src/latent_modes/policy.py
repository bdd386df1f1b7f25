"""Dense feed-forward policy, energy-pumping teacher, and behavior cloning."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dimred.adam import AdamHyper, adam_update, zero_moments
from .mountain_car import MAX_POSITION, MAX_SPEED, MIN_POSITION, EnvState

ACTIVATIONS = ("tanh", "relu", "identity")

# box used to normalize states during training; folded into the first layer afterwards
_STATE_CENTER = np.array([(MIN_POSITION + MAX_POSITION) / 2, 0.0])
_STATE_SCALE = np.array([(MAX_POSITION - MIN_POSITION) / 2, MAX_SPEED])


class WeightFileError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DenseLayer:
    weights: np.ndarray  # out_dim x in_dim
    bias: np.ndarray
    activation: str = "tanh"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        b = np.asarray(self.bias, dtype=float)
        if w.ndim != 2 or b.shape != (w.shape[0],):
            raise ValueError(f"inconsistent layer shapes {w.shape} / {b.shape}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    def __eq__(self, other):
        if not isinstance(other, DenseLayer):
            return NotImplemented
        return (self.activation == other.activation
                and np.array_equal(self.weights, other.weights)
                and np.array_equal(self.bias, other.bias))


def _activate(z, activation):
    if activation == "tanh":
        return np.tanh(z)
    if activation == "relu":
        return np.maximum(z, 0.0)
    return z


def _activation_grad(z, h, activation):
    if activation == "tanh":
        return 1.0 - h * h
    if activation == "relu":
        return (z > 0).astype(float)
    return np.ones_like(z)


@dataclass(frozen=True, eq=False)
class PolicyNetwork:
    layers: tuple[DenseLayer, ...]
    input_dim: int = 2

    def __post_init__(self):
        layers = tuple(self.layers)
        if len(layers) < 2:
            raise ValueError("a policy needs at least two layers")
        expected = self.input_dim
        for k, layer in enumerate(layers):
            if layer.in_dim != expected:
                raise ValueError(f"layer {k}: expected in_dim {expected}, got {layer.in_dim}")
            if not (np.all(np.isfinite(layer.weights)) and np.all(np.isfinite(layer.bias))):
                raise ValueError(f"layer {k}: non-finite parameters")
            expected = layer.out_dim
        if expected != 1:
            raise ValueError(f"output layer must have width 1, got {expected}")
        object.__setattr__(self, "layers", layers)

    @property
    def latent_dim(self) -> int:
        return self.layers[-2].out_dim

    def __eq__(self, other):
        if not isinstance(other, PolicyNetwork):
            return NotImplemented
        return self.input_dim == other.input_dim and self.layers == other.layers


def _as_input(state) -> np.ndarray:
    if isinstance(state, EnvState):
        return state.as_array()
    return np.asarray(state, dtype=float)


def forward(net: PolicyNetwork, state) -> tuple[float, np.ndarray]:
    """Deterministic mean action and second-to-last-layer activations."""
    h = _as_input(state)
    if h.shape != (net.input_dim,):
        raise ValueError(f"state has shape {h.shape}, network expects ({net.input_dim},)")
    latent = h
    for k, layer in enumerate(net.layers):
        h = _activate(layer.weights @ h + layer.bias, layer.activation)
        if k == len(net.layers) - 2:
            latent = h
    return float(h[0]), latent


def forward_batch(net: PolicyNetwork, X) -> tuple[np.ndarray, np.ndarray]:
    """Batched ``forward``; rows of ``X`` are states."""
    h = np.asarray(X, dtype=float)
    latent = h
    for k, layer in enumerate(net.layers):
        h = _activate(h @ layer.weights.T + layer.bias, layer.activation)
        if k == len(net.layers) - 2:
            latent = h
    return h[:, 0], latent


def teacher_action(state) -> float:
    """Bang-bang energy pumping: push in the direction of motion (+1 at rest)."""
    velocity = _as_input(state)[1]
    return 1.0 if velocity >= 0 else -1.0


def mse_loss_and_grads(net: PolicyNetwork, X, targets) -> tuple[float, list[tuple[np.ndarray, np.ndarray]]]:
    """Mean squared error of the network output and its gradient per layer (dW, db)."""
    X = np.asarray(X, dtype=float)
    targets = np.asarray(targets, dtype=float)
    pre, post = [], [X]
    h = X
    for layer in net.layers:
        z = h @ layer.weights.T + layer.bias
        h = _activate(z, layer.activation)
        pre.append(z)
        post.append(h)
    residual = h[:, 0] - targets
    loss = float(np.mean(residual * residual))

    grads = [None] * len(net.layers)
    delta = (2.0 / len(X)) * residual[:, None]
    for k in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[k]
        delta = delta * _activation_grad(pre[k], post[k + 1], layer.activation)
        grads[k] = (delta.T @ post[k], delta.sum(axis=0))
        delta = delta @ layer.weights
    return loss, grads


@dataclass(frozen=True)
class BCConfig:
    hidden_sizes: tuple[int, ...] = (64, 64)
    learning_rate: float = 1e-3
    epochs: int = 60
    batch_size: int = 128
    seed: int = 0
    sample_grid: tuple[int, int] = (61, 61)
    activation: str = "tanh"

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        object.__setattr__(self, "sample_grid", tuple(int(n) for n in self.sample_grid))
        if not self.hidden_sizes or min(self.hidden_sizes) < 1:
            raise ValueError("hidden_sizes must be non-empty and positive")
        if self.learning_rate <= 0 or self.epochs < 0 or self.batch_size < 1:
            raise ValueError("learning_rate and batch_size must be positive, epochs >= 0")
        if len(self.sample_grid) != 2 or min(self.sample_grid) < 1:
            raise ValueError("sample_grid must be two positive integers")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")


@dataclass
class TrainResult:
    net: PolicyNetwork
    final_loss: float
    loss_history: list[float] = field(default_factory=list)


def _init_normalized(config: BCConfig, rng: np.random.Generator) -> list[DenseLayer]:
    sizes = (2, *config.hidden_sizes, 1)
    layers = []
    for k, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        bound = 1.0 / math.sqrt(fan_in)
        w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        b = rng.uniform(-bound, bound, size=fan_out)
        act = "tanh" if k == len(sizes) - 2 else config.activation
        layers.append(DenseLayer(w, b, act))
    return layers


def _fold_normalization(layers: list[DenseLayer]) -> PolicyNetwork:
    """Absorb the fixed state normalization into the first layer."""
    first = layers[0]
    w = first.weights / _STATE_SCALE[None, :]
    b = first.bias - w @ _STATE_CENTER
    return PolicyNetwork((DenseLayer(w, b, first.activation), *layers[1:]))


def _normalize_states(X):
    return (np.asarray(X, dtype=float) - _STATE_CENTER) / _STATE_SCALE


def init_network(config: BCConfig = BCConfig()) -> PolicyNetwork:
    """The seeded initialization that ``train_bc`` starts from."""
    return _fold_normalization(_init_normalized(config, np.random.default_rng(config.seed)))


def teacher_dataset(config: BCConfig) -> tuple[np.ndarray, np.ndarray]:
    n_pos, n_vel = config.sample_grid
    positions = np.linspace(MIN_POSITION, MAX_POSITION, n_pos)
    velocities = np.linspace(-MAX_SPEED, MAX_SPEED, n_vel)
    X = np.array([(p, v) for p in positions for v in velocities])
    y = np.where(X[:, 1] >= 0, 1.0, -1.0)
    return X, y


def train_bc(config: BCConfig = BCConfig()) -> TrainResult:
    """Fit the policy to the teacher by minibatch Adam on mean squared error.

    Training runs in normalized state coordinates; the returned network
    takes raw states.
    """
    rng = np.random.default_rng(config.seed)
    layers = _init_normalized(config, rng)
    X, y = teacher_dataset(config)
    Xn = _normalize_states(X)
    hyper = AdamHyper(lr=config.learning_rate)
    params = [p for layer in layers for p in (layer.weights, layer.bias)]
    moments = [zero_moments(p) for p in params]
    acts = [layer.activation for layer in layers]

    history = []
    t = 0
    for _ in range(config.epochs):
        order = rng.permutation(len(Xn))
        for lo in range(0, len(order), config.batch_size):
            batch = order[lo:lo + config.batch_size]
            net = PolicyNetwork(tuple(DenseLayer(params[2 * k], params[2 * k + 1], a)
                                      for k, a in enumerate(acts)))
            _, grads = mse_loss_and_grads(net, Xn[batch], y[batch])
            flat = [g for pair in grads for g in pair]
            t += 1
            for k, g in enumerate(flat):
                params[k], moments[k] = adam_update(params[k], g, moments[k], hyper, t)
        net = PolicyNetwork(tuple(DenseLayer(params[2 * k], params[2 * k + 1], a)
                                  for k, a in enumerate(acts)))
        history.append(mse_loss_and_grads(net, Xn, y)[0])

    layers = [DenseLayer(params[2 * k], params[2 * k + 1], a) for k, a in enumerate(acts)]
    trained = _fold_normalization(layers)
    final = mse_loss_and_grads(trained, X, y)[0]
    return TrainResult(trained, final, history)


def net_to_dict(net: PolicyNetwork) -> dict:
    return {
        "input_dim": net.input_dim,
        "layers": [{"weights": layer.weights.tolist(), "bias": layer.bias.tolist(),
                    "activation": layer.activation} for layer in net.layers],
    }


def net_from_dict(data: dict) -> PolicyNetwork:
    if not isinstance(data, dict):
        raise WeightFileError("weight file must hold a JSON object")
    input_dim = data.get("input_dim")
    if not isinstance(input_dim, int) or input_dim < 1:
        raise WeightFileError("input_dim: expected a positive integer")
    raw_layers = data.get("layers")
    if not isinstance(raw_layers, list):
        raise WeightFileError("layers: expected a list")
    if len(raw_layers) < 2:
        raise WeightFileError(f"layers: need at least 2 layers, got {len(raw_layers)}")
    layers = []
    expected = input_dim
    for k, entry in enumerate(raw_layers):
        try:
            w = np.array(entry["weights"], dtype=float)
            b = np.array(entry["bias"], dtype=float)
            act = entry.get("activation", "tanh")
        except (KeyError, TypeError, ValueError) as exc:
            raise WeightFileError(f"layer {k}: malformed entry ({exc})") from None
        if w.ndim != 2:
            raise WeightFileError(f"layer {k}: weights must be a 2-D matrix")
        if w.shape[1] != expected:
            raise WeightFileError(f"layer {k}: expected in_dim {expected}, got {w.shape[1]}")
        if b.shape != (w.shape[0],):
            raise WeightFileError(f"layer {k}: bias length {b.size} != out_dim {w.shape[0]}")
        if act not in ACTIVATIONS:
            raise WeightFileError(f"layer {k}: unknown activation {act!r}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise WeightFileError(f"layer {k}: non-finite parameters")
        layers.append(DenseLayer(w, b, act))
        expected = w.shape[0]
    if expected != 1:
        raise WeightFileError(f"layer {len(layers) - 1}: output width must be 1, got {expected}")
    return PolicyNetwork(tuple(layers), input_dim)


def save_weights(net: PolicyNetwork, path) -> None:
    Path(path).write_text(json.dumps(net_to_dict(net)) + "\n")


def load_weights(path) -> PolicyNetwork:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise WeightFileError(f"invalid JSON: {exc}") from None
    return net_from_dict(data)
