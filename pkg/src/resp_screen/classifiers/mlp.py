"""One-hidden-layer tanh network with a sigmoid output, trained by mini-batch Adam."""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, log_expit

from ..errors import NonFiniteLoss
from .balance import Standardizer, class_counts, oversample


@dataclass(frozen=True)
class MlpConfig:
    hidden: int = 25
    alpha: float = 0.001
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 200
    max_epochs: int = 200
    tol: float = 1e-4
    n_iter_no_change: int = 10
    oversample: bool = True
    standardize: bool = True


@dataclass
class MlpModel:
    hidden_weights: np.ndarray  # D x H
    hidden_bias: np.ndarray  # H
    output_weights: np.ndarray  # H
    output_bias: float
    scaler: Standardizer
    config: MlpConfig = field(default_factory=MlpConfig)
    seed: int = 0
    n_epochs: int = 0
    loss_curve: list = field(default_factory=list)

    kind = "mlp"

    @property
    def n_features(self):
        return self.hidden_weights.shape[0]

    def params(self):
        return [self.hidden_weights, self.hidden_bias, self.output_weights, np.array(self.output_bias)]

    def decision_function(self, X):
        h = np.tanh(self.scaler.transform(X) @ self.hidden_weights + self.hidden_bias)
        return h @ self.output_weights + self.output_bias

    def predict_proba(self, X):
        return expit(self.decision_function(X))


def loss_and_grad(params, X, y, alpha):
    """Mean log-loss plus (alpha/2)*(|W1|^2 + |w2|^2), and its gradient.

    ``params`` is [W1, b1, w2, b2]; ``X`` is already standardised.
    """
    W1, b1, w2, b2 = params
    n = X.shape[0]
    h = np.tanh(X @ W1 + b1)
    z = h @ w2 + b2
    sign = 2.0 * y - 1.0
    loss = -np.mean(log_expit(sign * z)) + 0.5 * alpha * (np.sum(W1 * W1) + np.dot(w2, w2))
    dz = (expit(z) - y) / n
    g_w2 = h.T @ dz + alpha * w2
    g_b2 = np.sum(dz)
    dh = np.outer(dz, w2) * (1.0 - h * h)
    g_W1 = X.T @ dh + alpha * W1
    g_b1 = dh.sum(axis=0)
    return loss, [g_W1, g_b1, g_w2, np.array(g_b2)]


def glorot_init(n_in, n_hidden, rng):
    bound_h = np.sqrt(6.0 / (n_in + n_hidden))
    bound_o = np.sqrt(6.0 / (n_hidden + 1))
    W1 = rng.uniform(-bound_h, bound_h, size=(n_in, n_hidden))
    b1 = rng.uniform(-bound_h, bound_h, size=n_hidden)
    w2 = rng.uniform(-bound_o, bound_o, size=n_hidden)
    b2 = rng.uniform(-bound_o, bound_o)
    return [W1, b1, w2, np.array(b2)]


def train_mlp(frames, seed=0, config=MlpConfig()):
    class_counts(frames.labels)
    if config.oversample:
        frames = oversample(frames, seed)
    scaler = Standardizer.fit(frames.features) if config.standardize else Standardizer.identity(frames.features.shape[1])
    X = scaler.transform(frames.features)
    y = frames.labels.astype(np.float64)
    n = X.shape[0]

    rng = np.random.default_rng(seed)
    params = glorot_init(X.shape[1], config.hidden, rng)
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    batch = min(config.batch_size, n)
    b1, b2, lr, eps = config.beta1, config.beta2, config.learning_rate, config.epsilon

    step = 0
    best = np.inf
    stale = 0
    curve = []
    for _ in range(config.max_epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch):
            rows = order[start:start + batch]
            loss, grads = loss_and_grad(params, X[rows], y[rows], config.alpha)
            if not np.isfinite(loss):
                raise NonFiniteLoss(f"loss became {loss} at step {step}")
            total += loss * rows.size
            step += 1
            corr = lr * np.sqrt(1.0 - b2 ** step) / (1.0 - b1 ** step)
            for p, g, mi, vi in zip(params, grads, m, v):
                mi *= b1
                mi += (1.0 - b1) * g
                vi *= b2
                vi += (1.0 - b2) * g * g
                p -= corr * mi / (np.sqrt(vi) + eps)
        epoch_loss = total / n
        curve.append(epoch_loss)
        if epoch_loss > best - config.tol:
            stale += 1
        else:
            stale = 0
        best = min(best, epoch_loss)
        if stale >= config.n_iter_no_change:
            break

    W1, bias1, w2, bias2 = params
    return MlpModel(W1, bias1, w2, float(bias2), scaler, config, seed, len(curve), curve)
