"""Link functions and analytic gradients of the approximate per-precinct log-likelihood.

Two models map a voter's covariates to a success probability:

* logistic: ``p = sigmoid(theta_0 + x @ theta_1:)``
* neural: ``h = sigmoid(W1 x + b1)``, ``p = sigmoid(w2 . h + b2)``

All gradients are gradients of the log-likelihood (ascent direction). The
trainer is responsible for turning them into descent steps.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar, Union

import numpy as np

from .errors import DegenerateDistributionError, ShapeError

PROB_FLOOR = 1e-12


def sigmoid(z):
    """Numerically stable logistic function; accepts scalars or arrays."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class LogisticParams:
    """Logistic coefficients, intercept first."""

    theta: np.ndarray
    kind: ClassVar[str] = "logistic"

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float).reshape(-1)
        if theta.size < 1:
            raise ShapeError("logistic theta needs at least an intercept")
        object.__setattr__(self, "theta", theta)

    @property
    def n_features(self) -> int:
        return self.theta.size - 1

    def to_vector(self) -> np.ndarray:
        return self.theta.copy()

    def from_vector(self, v) -> "LogisticParams":
        return LogisticParams(np.asarray(v, dtype=float).reshape(self.theta.shape))

    def penalty_mask(self) -> np.ndarray:
        mask = np.ones(self.theta.size)
        mask[0] = 0.0
        return mask

    def to_dict(self) -> dict:
        return {"kind": self.kind, "theta": self.theta.tolist()}


@dataclass(frozen=True)
class NeuralParams:
    """One hidden layer of sigmoid units feeding a single sigmoid output."""

    w1: np.ndarray  # (hidden, d)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden,)
    b2: float
    kind: ClassVar[str] = "neural"

    def __post_init__(self):
        w1 = np.array(self.w1, dtype=float)
        b1 = np.array(self.b1, dtype=float).reshape(-1)
        w2 = np.array(self.w2, dtype=float).reshape(-1)
        if w1.ndim != 2 or w1.shape[0] != b1.size or w2.size != b1.size:
            raise ShapeError(
                f"inconsistent neural shapes w1={w1.shape} b1={b1.shape} w2={w2.shape}")
        object.__setattr__(self, "w1", w1)
        object.__setattr__(self, "b1", b1)
        object.__setattr__(self, "w2", w2)
        object.__setattr__(self, "b2", float(self.b2))

    @property
    def hidden_size(self) -> int:
        return self.b1.size

    @property
    def n_features(self) -> int:
        return self.w1.shape[1]

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.w1.ravel(), self.b1, self.w2, [self.b2]])

    def from_vector(self, v) -> "NeuralParams":
        v = np.asarray(v, dtype=float)
        h, d = self.w1.shape
        i = h * d
        return NeuralParams(v[:i].reshape(h, d), v[i:i + h], v[i + h:i + 2 * h], v[-1])

    def penalty_mask(self) -> np.ndarray:
        h, d = self.w1.shape
        return np.concatenate([np.ones(h * d), np.zeros(h), np.ones(h), [0.0]])

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "w1": self.w1.tolist(),
            "b1": self.b1.tolist(),
            "w2": self.w2.tolist(),
            "b2": self.b2,
        }


ModelParams = Union[LogisticParams, NeuralParams]


def params_from_dict(obj: dict) -> ModelParams:
    kind = obj.get("kind")
    if kind == "logistic":
        return LogisticParams(obj["theta"])
    if kind == "neural":
        return NeuralParams(obj["w1"], obj["b1"], obj["w2"], obj["b2"])
    raise ShapeError(f"unknown model kind {kind!r}")


def _as_theta(theta) -> np.ndarray:
    if isinstance(theta, LogisticParams):
        return theta.theta
    return np.asarray(theta, dtype=float).reshape(-1)


def _covariates(x, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (d,):
        raise ShapeError(f"covariates have shape {x.shape}, model expects {d} features")
    return x


def predict_logistic(theta, x):
    """sigmoid(theta . [1, x]) for a single covariate vector or a matrix of rows."""
    theta = _as_theta(theta)
    x = _covariates(x, theta.size - 1)
    return sigmoid(theta[0] + x @ theta[1:])


def predict_neural(params: NeuralParams, x):
    """Return ``(p, h)``: output probability and hidden activations."""
    x = _covariates(x, params.n_features)
    h = sigmoid(x @ params.w1.T + params.b1)
    p = sigmoid(h @ params.w2 + params.b2)
    return p, h


def _design(precinct) -> np.ndarray:
    return np.asarray(getattr(precinct, "X", precinct), dtype=float)


def precinct_probs(model: ModelParams, precinct) -> np.ndarray:
    """Success probability of every voter in a precinct, in voter order.

    ``precinct`` is anything with an ``X`` covariate matrix, or the matrix itself.
    """
    X = np.atleast_2d(_design(precinct))
    if isinstance(model, NeuralParams):
        return predict_neural(model, X)[0]
    return predict_logistic(model, X)


def _clamped_moments(p: np.ndarray):
    pc = np.clip(p, PROB_FLOOR, 1.0 - PROB_FLOOR)
    mu = pc.sum()
    var = (pc * (1.0 - pc)).sum()
    if not var > 0.0:
        raise DegenerateDistributionError("precinct has zero variance")
    return pc, mu, var


def approx_loglik(model: ModelParams, precinct) -> float:
    """Normal-approximation log-likelihood of one precinct (2*pi constant dropped)."""
    p = precinct_probs(model, precinct)
    _, mu, var = _clamped_moments(p)
    r = precinct.D - mu
    return float(-0.5 * np.log(var) - r * r / (2.0 * var))


def dloss_dp(p_j, D: float, mu: float, var: float):
    """Partial derivative of the approximate log-likelihood in one voter's probability."""
    r = D - mu
    return ((-1.0 + 2.0 * p_j) / (2.0 * var)
            + (1.0 - 2.0 * p_j) / (2.0 * var * var) * r * r
            + r / var)


def grad_logistic(theta, precinct) -> LogisticParams:
    theta = _as_theta(theta)
    X = np.atleast_2d(_covariates(precinct.X, theta.size - 1))
    p, mu, var = _clamped_moments(sigmoid(theta[0] + X @ theta[1:]))
    r = precinct.D - mu
    v = p * (1.0 - p)
    w = (r / var) * v - 0.5 * (r * r / (var * var) - 1.0 / var) * (2.0 * p - 1.0) * v
    g = np.empty_like(theta)
    g[0] = w.sum()
    g[1:] = X.T @ w
    return LogisticParams(g)


def grad_neural(params: NeuralParams, precinct) -> NeuralParams:
    X = np.atleast_2d(_covariates(precinct.X, params.n_features))
    p_raw, h = predict_neural(params, X)
    p, mu, var = _clamped_moments(p_raw)
    delta_out = dloss_dp(p, precinct.D, mu, var) * p * (1.0 - p)
    delta_hidden = np.outer(delta_out, params.w2) * h * (1.0 - h)
    return NeuralParams(
        w1=delta_hidden.T @ X,
        b1=delta_hidden.sum(axis=0),
        w2=h.T @ delta_out,
        b2=delta_out.sum(),
    )


def grad(model: ModelParams, precinct) -> ModelParams:
    if isinstance(model, NeuralParams):
        return grad_neural(model, precinct)
    return grad_logistic(model, precinct)
