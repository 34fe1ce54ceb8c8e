"""L2-penalised, class-weighted logistic regression fitted by damped Newton steps."""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, log_expit

from ..errors import DidNotImprove
from .balance import Standardizer, balanced_weights, class_counts


@dataclass(frozen=True)
class LrConfig:
    C: float = 0.01
    max_iter: int = 25
    tol: float = 1e-10  # on the gradient norm
    class_weight: str = "balanced"  # or "none"
    standardize: bool = True


@dataclass
class LrModel:
    weights: np.ndarray
    bias: float
    scaler: Standardizer
    config: LrConfig = field(default_factory=LrConfig)
    n_iter: int = 0

    kind = "lr"

    @property
    def n_features(self):
        return self.weights.shape[0]

    def decision_function(self, X):
        return self.scaler.transform(X) @ self.weights + self.bias

    def predict_proba(self, X):
        return expit(self.decision_function(X))


def objective(params, X, y, sample_weight, C):
    """Return (J, gradient) for J = C * sum_i s_i * logloss_i + 0.5 * |w|^2; params = [w, b]."""
    w, b = params[:-1], params[-1]
    z = X @ w + b
    sign = 2.0 * y - 1.0
    J = -C * np.dot(sample_weight, log_expit(sign * z)) + 0.5 * np.dot(w, w)
    resid = C * sample_weight * (expit(z) - y)
    grad = np.empty_like(params)
    grad[:-1] = X.T @ resid + w
    grad[-1] = resid.sum()
    return J, grad


def _hessian(params, X, sample_weight, C):
    p = expit(X @ params[:-1] + params[-1])
    curv = C * sample_weight * p * (1.0 - p)
    Xa = np.hstack([X, np.ones((X.shape[0], 1))])
    H = (Xa * curv[:, None]).T @ Xa
    H[np.arange(X.shape[1]), np.arange(X.shape[1])] += 1.0
    return H


def fit_logistic(X, y, sample_weight, C, max_iter, tol):
    """Minimise the weighted objective from zero; returns (params, iterations)."""
    params = np.zeros(X.shape[1] + 1)
    J, g = objective(params, X, y, sample_weight, C)
    it = 0
    while it < max_iter and np.linalg.norm(g) > tol:
        H = _hessian(params, X, sample_weight, C)
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, g, rcond=None)[0]
        slope = -np.dot(g, step)
        t = 1.0
        while True:
            candidate = params - t * step
            J_new, g_new = objective(candidate, X, y, sample_weight, C)
            if J_new <= J + 1e-4 * t * slope:
                break
            t *= 0.5
            if t < 1e-12:
                break
        it += 1
        if t < 1e-12:
            # no descent left at machine precision
            break
        if J_new > J:
            raise DidNotImprove(f"objective rose from {J!r} to {J_new!r} at iteration {it}")
        params, J, g = candidate, J_new, g_new
    return params, it


def train_lr(frames, config=LrConfig()):
    class_counts(frames.labels)
    if len(frames) < 2:
        raise ValueError("need at least two rows")
    if config.class_weight == "balanced":
        cw = balanced_weights(frames.labels)
    elif config.class_weight == "none":
        cw = np.ones(2)
    else:
        raise ValueError(f"unknown class_weight {config.class_weight!r}")
    if config.standardize:
        scaler = Standardizer.fit(frames.features)
    else:
        scaler = Standardizer.identity(frames.features.shape[1])
    X = scaler.transform(frames.features)
    y = frames.labels.astype(np.float64)
    params, it = fit_logistic(X, y, cw[frames.labels], config.C, config.max_iter, config.tol)
    return LrModel(params[:-1].copy(), float(params[-1]), scaler, config, it)
