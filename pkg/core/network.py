"""
Back-propagation network (BPN) classifier.

A layered feed-forward network with sigmoid units at every layer, trained
on squared error against one-hot targets by plain gradient descent with
back-propagated gradients.
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from core.errors import DataError

logger = logging.getLogger(__name__)

TRAIN_MODES = ("stochastic", "batch")


def default_hidden_sizes(input_dim: int) -> List[int]:
    """One hidden layer of width max(2, 2 * input_dim + 1)."""
    return [max(2, 2 * input_dim + 1)]


@dataclass
class NetworkConfig:
    """Topology and training schedule of a BPN."""
    input_dim: int
    output_dim: int
    hidden_sizes: Optional[List[int]] = None
    learning_rate: float = 0.5
    epochs: int = 500
    seed: int = 0
    weight_init_scale: float = 1.0
    mode: str = "stochastic"

    def __post_init__(self):
        if self.hidden_sizes is None:
            self.hidden_sizes = default_hidden_sizes(self.input_dim)
        self.hidden_sizes = [int(h) for h in self.hidden_sizes]

    def validate(self) -> None:
        if self.input_dim < 1 or self.output_dim < 1:
            raise DataError(f"input_dim and output_dim must be >= 1 (got {self.input_dim}, {self.output_dim})")
        if any(h < 1 for h in self.hidden_sizes):
            raise DataError(f"hidden layer widths must be >= 1, got {self.hidden_sizes}")
        if self.learning_rate <= 0:
            raise DataError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 0:
            raise DataError(f"epochs must be >= 0, got {self.epochs}")
        if self.weight_init_scale < 0:
            raise DataError(f"weight_init_scale must be >= 0, got {self.weight_init_scale}")
        if self.mode not in TRAIN_MODES:
            raise DataError(f"mode must be one of {TRAIN_MODES}, got '{self.mode}'")

    @property
    def layer_sizes(self) -> List[int]:
        return [self.input_dim, *self.hidden_sizes, self.output_dim]

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class Network:
    """Weights (in x out) and biases of every layer."""
    weights: List[np.ndarray]
    biases: List[np.ndarray]

    def __post_init__(self):
        self.weights = [np.asarray(w, dtype=float) for w in self.weights]
        self.biases = [np.asarray(b, dtype=float) for b in self.biases]
        if len(self.weights) != len(self.biases) or not self.weights:
            raise DataError("network needs one bias vector per weight grid")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise DataError(f"layer {i}: weight {w.shape} and bias {b.shape} do not match")
            if i > 0 and self.weights[i - 1].shape[1] != w.shape[0]:
                raise DataError(f"layer {i} input width {w.shape[0]} != previous output width")

    @property
    def layer_sizes(self) -> List[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[1]

    def copy(self) -> "Network":
        return Network([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def parameters(self) -> List[np.ndarray]:
        """All weight and bias arrays, interleaved layer by layer."""
        params = []
        for w, b in zip(self.weights, self.biases):
            params.extend([w, b])
        return params

    def to_dict(self, config: Optional[NetworkConfig] = None) -> Dict[str, Any]:
        data = {
            "layer_sizes": self.layer_sizes,
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }
        if config is not None:
            data["config"] = config.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Network":
        return cls(weights=data["weights"], biases=data["biases"])


@dataclass
class TrainReport:
    """Per-epoch training loss and final accuracy on the training data."""
    losses: List[float] = field(default_factory=list)
    final_train_accuracy: float = 0.0

    @property
    def epochs_run(self) -> int:
        return len(self.losses)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "epochs_run": self.epochs_run,
            "final_train_accuracy": self.final_train_accuracy,
            "losses": self.losses,
        }

    def to_csv(self, path: str) -> None:
        """Write epoch,mse rows for plotting."""
        frame = pd.DataFrame({"epoch": range(1, self.epochs_run + 1), "mse": self.losses})
        frame.to_csv(path, index=False, float_format="%.10g")


def sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))


def init_network(config: NetworkConfig) -> Network:
    """
    Create a network with uniform weights in [-scale, scale] and zero biases.

    Args:
        config: Network configuration; its seed fixes the weights

    Returns:
        Network
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    sizes = config.layer_sizes
    scale = config.weight_init_scale
    weights = [rng.uniform(-scale, scale, size=(n_in, n_out)) for n_in, n_out in zip(sizes[:-1], sizes[1:])]
    biases = [np.zeros(n_out) for n_out in sizes[1:]]
    return Network(weights=weights, biases=biases)


def _check_inputs(net: Network, data) -> np.ndarray:
    grid = np.asarray(data, dtype=float)
    if grid.ndim == 1:
        grid = grid.reshape(1, -1)
    if grid.ndim != 2 or grid.shape[1] != net.input_dim:
        raise DataError(f"input has {grid.shape[-1]} features, network expects {net.input_dim}")
    return grid


def _activations(net: Network, grid: np.ndarray) -> List[np.ndarray]:
    """Layer outputs, starting with the input itself."""
    outputs = [grid]
    for w, b in zip(net.weights, net.biases):
        outputs.append(sigmoid(outputs[-1] @ w + b))
    return outputs


def forward(net: Network, x) -> np.ndarray:
    """
    Feed one sample (or a batch) through the network.

    Returns:
        Output vector in (0, 1)^output_dim, or an n x output_dim grid for a batch
    """
    single = np.asarray(x).ndim == 1
    out = _activations(net, _check_inputs(net, x))[-1]
    return out[0] if single else out


def _backprop(net: Network, grid: np.ndarray, targets: np.ndarray) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """
    Gradients of 0.5 * sum((output - target)^2), averaged over the rows of ``grid``.
    """
    outputs = _activations(net, grid)
    delta = (outputs[-1] - targets) * outputs[-1] * (1.0 - outputs[-1])
    n = grid.shape[0]
    grad_w: List[np.ndarray] = [None] * len(net.weights)
    grad_b: List[np.ndarray] = [None] * len(net.biases)

    for layer in range(len(net.weights) - 1, -1, -1):
        grad_w[layer] = outputs[layer].T @ delta / n
        grad_b[layer] = delta.sum(axis=0) / n
        if layer > 0:
            below = outputs[layer]
            delta = (delta @ net.weights[layer].T) * below * (1.0 - below)
    return grad_w, grad_b


def _sample_loss(net: Network, x: np.ndarray, target: np.ndarray) -> float:
    out = _activations(net, x.reshape(1, -1))[-1][0]
    return 0.5 * float(np.sum((out - target) ** 2))


def one_hot(labels: np.ndarray, n_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=int)
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise DataError(f"labels must lie in 0..{n_classes - 1}")
    encoded = np.zeros((labels.size, n_classes))
    encoded[np.arange(labels.size), labels] = 1.0
    return encoded


def train(net: Network, data, labels, config: NetworkConfig) -> TrainReport:
    """
    Train ``net`` in place by back-propagation.

    In "stochastic" mode the weights are updated after every sample, with
    the sample order reshuffled each epoch; "batch" mode takes one step per
    epoch along the mean gradient. The loss recorded for an epoch is the
    mean squared error over the training set after that epoch's updates.

    Args:
        net: Network to train
        data: n x input_dim grid
        labels: Class index per sample
        config: Learning rate, epochs, seed and mode

    Returns:
        TrainReport
    """
    config.validate()
    grid = _check_inputs(net, data)
    if grid.shape[0] == 0:
        raise DataError("cannot train on empty data")
    labels = np.asarray(labels, dtype=int)
    if labels.shape != (grid.shape[0],):
        raise DataError(f"{grid.shape[0]} samples but {labels.size} labels")
    targets = one_hot(labels, net.output_dim)

    rng = np.random.default_rng((config.seed, 1))
    lr = config.learning_rate
    losses: List[float] = []

    for epoch in range(config.epochs):
        if config.mode == "batch":
            grad_w, grad_b = _backprop(net, grid, targets)
            for layer in range(len(net.weights)):
                net.weights[layer] -= lr * grad_w[layer]
                net.biases[layer] -= lr * grad_b[layer]
        else:
            for i in rng.permutation(grid.shape[0]):
                grad_w, grad_b = _backprop(net, grid[i:i + 1], targets[i:i + 1])
                for layer in range(len(net.weights)):
                    net.weights[layer] -= lr * grad_w[layer]
                    net.biases[layer] -= lr * grad_b[layer]

        outputs = _activations(net, grid)[-1]
        losses.append(float(np.mean((outputs - targets) ** 2)))
        if (epoch + 1) % 100 == 0:
            logger.debug("Epoch %d/%d: mse=%.6f", epoch + 1, config.epochs, losses[-1])

    accuracy = float(np.mean(predict(net, grid) == labels))
    logger.info("BPN trained %d epochs, train accuracy %.4f", config.epochs, accuracy)
    return TrainReport(losses=losses, final_train_accuracy=accuracy)


def predict(net: Network, data) -> np.ndarray:
    """Arg-max class of every sample; ties go to the lower class index."""
    grid = _check_inputs(net, data)
    return np.argmax(_activations(net, grid)[-1], axis=1)


def gradient_check(net: Network, x, target, epsilon: float = 1e-5) -> float:
    """
    Compare back-propagated gradients with centered finite differences.

    Relative error per parameter is |a - n| / max(|a| + |n|, 1e-8).

    Args:
        net: Network (left unchanged)
        x: Input vector
        target: Target output vector
        epsilon: Finite-difference step (> 0)

    Returns:
        Largest relative error over all weights and biases
    """
    if epsilon <= 0:
        raise DataError(f"epsilon must be > 0, got {epsilon}")
    x = _check_inputs(net, x)[0]
    target = np.asarray(target, dtype=float)
    grad_w, grad_b = _backprop(net, x.reshape(1, -1), target.reshape(1, -1))
    analytic = []
    for gw, gb in zip(grad_w, grad_b):
        analytic.extend([gw, gb])

    perturbed = net.copy()
    worst = 0.0
    for param, grad in zip(perturbed.parameters(), analytic):
        for idx in np.ndindex(param.shape):
            original = param[idx]
            param[idx] = original + epsilon
            plus = _sample_loss(perturbed, x, target)
            param[idx] = original - epsilon
            minus = _sample_loss(perturbed, x, target)
            param[idx] = original
            numeric = (plus - minus) / (2.0 * epsilon)
            denom = max(abs(grad[idx]) + abs(numeric), 1e-8)
            worst = max(worst, abs(grad[idx] - numeric) / denom)
    return worst
