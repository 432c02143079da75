"""Sigma-point Gaussian filtering with a convolution-inflated measurement update.

The update step inflates the innovation covariance by (1/(2*gamma)) * I,
which is the closed-form effect of convolving the nominal Gaussian
likelihood with an exponential uncertainty-gap kernel (see likelihood.py).
gamma = inf turns the inflation off and recovers the plain unscented filter;
both run through the same code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .states import (
    MEAS_DIM,
    STATE_DIM,
    YAW_INDEX,
    InvalidStateError,
    NoiseSpec,
    wrap_angle,
)

# Adaptation clamp: the gamma recursion has no stationary point and drifts,
# so keep it inside a range where the inflation stays numerically sane.
GAMMA_MIN = 1e-4
GAMMA_MAX = 1e4


@dataclass(frozen=True)
class GaussianBelief:
    """Mean and symmetric positive-definite covariance of a Gaussian state."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise InvalidStateError(f"covariance shape {cov.shape} does not match mean size {mean.size}")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise InvalidStateError("belief contains non-finite values")
        if np.max(np.abs(cov - cov.T)) > 1e-8:
            raise InvalidStateError("covariance is not symmetric")
        cov = 0.5 * (cov + cov.T)
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise InvalidStateError("covariance is not positive definite") from exc
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class SigmaSet:
    """2n+1 sigma points with their scalar weights."""

    points: np.ndarray   # (2n+1, n)
    weights: np.ndarray  # (2n+1,)

    def __post_init__(self):
        object.__setattr__(self, "points", np.asarray(self.points, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise InvalidStateError("sigma weights must sum to 1")


@dataclass
class FilterParams:
    """Per-filter constants: sigma scaling, gap rate gamma, adaptation temperature."""

    noise: NoiseSpec
    gamma: float = math.inf
    a: float = 1.0
    tau: float = 0.05
    adaptive: bool = False

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError(f"a must be positive, got {self.a}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not 0.0 < self.tau < 1.0:
            raise ValueError(f"tau must lie in (0, 1), got {self.tau}")
        if self.adaptive and math.isinf(self.gamma):
            raise ValueError("adaptive mode needs a finite initial gamma")


@dataclass(frozen=True)
class UpdateReport:
    """Everything one measurement update produced."""

    posterior: GaussianBelief
    innovation: np.ndarray
    S: np.ndarray        # innovation covariance, inflation included
    K: np.ndarray        # gain
    gamma_next: float


class LinearMeasurement:
    """Measurement model y = H x with optional angular output components."""

    def __init__(self, H: np.ndarray, angular_indices: tuple = ()):
        self.H = np.asarray(H, dtype=float)
        self.angular_indices = tuple(angular_indices)
        self.dim = self.H.shape[0]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.H.T


# Tracking measurement: the first seven state components, yaw is angular.
_H_TRACKING = np.eye(MEAS_DIM, STATE_DIM)
TRACKING_MEASUREMENT = LinearMeasurement(_H_TRACKING, angular_indices=(YAW_INDEX,))


def julier_sigma_points(belief: GaussianBelief, a: float) -> SigmaSet:
    """Symmetric sigma set: the mean plus/minus the columns of a * sqrt(n * P).

    Weights are 1 - 1/a**2 for the centre point and 1/(2*n*a**2) for each
    offset point. The matrix square root is the lower Cholesky factor.
    """
    if a <= 0:
        raise ValueError(f"a must be positive, got {a}")
    n = belief.dim
    try:
        L = np.linalg.cholesky(belief.cov)
    except np.linalg.LinAlgError as exc:
        raise InvalidStateError("covariance is not positive definite") from exc
    offsets = (a * math.sqrt(n)) * L.T  # row i is the i-th column of a*sqrt(n P)
    points = np.vstack([belief.mean, belief.mean + offsets, belief.mean - offsets])
    weights = np.full(2 * n + 1, 1.0 / (2.0 * n * a * a))
    weights[0] = 1.0 - 1.0 / (a * a)
    return SigmaSet(points, weights)


def weighted_mean(points: np.ndarray, weights: np.ndarray, angular_indices=()) -> np.ndarray:
    """Weighted mean of transformed sigma points; angles via atan2 of sin/cos sums."""
    mean = weights @ points
    for idx in angular_indices:
        s = weights @ np.sin(points[:, idx])
        c = weights @ np.cos(points[:, idx])
        mean[idx] = math.atan2(s, c)
    return mean


def deviations(points: np.ndarray, mean: np.ndarray, angular_indices=()) -> np.ndarray:
    """Point-minus-mean residuals with angular components wrapped into (-pi, pi]."""
    dev = points - mean
    for idx in angular_indices:
        dev[:, idx] = wrap_angle(dev[:, idx])
    return dev


def unscented_predict(
    belief: GaussianBelief,
    model,
    dt: float,
    Q: np.ndarray,
    a: float = 1.0,
) -> GaussianBelief:
    """Propagate a belief through a motion model via the sigma-point transform."""
    sigma = julier_sigma_points(belief, a)
    propagated = np.asarray(model(sigma.points, dt), dtype=float)
    if not np.all(np.isfinite(propagated)):
        raise InvalidStateError("motion model produced non-finite sigma points")
    angular = getattr(model, "angular_indices", ())
    mean = weighted_mean(propagated, sigma.weights, angular)
    dev = deviations(propagated, mean, angular)
    cov = (dev.T * sigma.weights) @ dev + np.asarray(Q, dtype=float)
    cov = 0.5 * (cov + cov.T)
    return GaussianBelief(mean, cov)


def adapt_gamma(gamma: float, innovation: np.ndarray, tau: float, m: int) -> float:
    """One step of the logistic gamma recursion driven by the innovation.

    The innovation vector is scalarised as its squared Euclidean norm divided
    by the measurement dimension, making it a per-dimension mean-square error
    comparable with exp(-gamma). Larger errors can only shrink gamma (stronger
    down-weighting); the result is clamped to [GAMMA_MIN, GAMMA_MAX].
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    s = float(np.dot(innovation, innovation))
    bracket = math.exp(-gamma) - s / m
    z = np.clip(-2.0 * gamma * bracket, -700.0, 700.0)
    logistic = 1.0 / (1.0 + math.exp(z))
    new_gamma = (1.0 - tau) * gamma + tau * gamma * logistic
    return float(np.clip(new_gamma, GAMMA_MIN, GAMMA_MAX))


def convolutional_update(
    pred: GaussianBelief,
    y,
    params: FilterParams,
    measurement: LinearMeasurement = TRACKING_MEASUREMENT,
) -> UpdateReport:
    """Measurement update with the gap-inflated innovation covariance.

    Sigma points are regenerated from the predicted belief, pushed through
    the measurement model, and combined with R + (1/(2*gamma)) * I. The
    innovation and the posterior mean wrap their angular components.
    """
    y = y.as_vector() if hasattr(y, "as_vector") else np.asarray(y, dtype=float).reshape(-1)
    m = measurement.dim
    if y.size != m:
        raise InvalidStateError(f"measurement has size {y.size}, model expects {m}")

    sigma = julier_sigma_points(pred, params.a)
    Y = measurement(sigma.points)
    y_hat = weighted_mean(Y, sigma.weights, measurement.angular_indices)
    dev_y = deviations(Y, y_hat, measurement.angular_indices)
    dev_x = sigma.points - pred.mean

    inflation = 0.0 if math.isinf(params.gamma) else 1.0 / (2.0 * params.gamma)
    S = (dev_y.T * sigma.weights) @ dev_y + params.noise.R + inflation * np.eye(m)
    S = 0.5 * (S + S.T)
    P_xy = (dev_x.T * sigma.weights) @ dev_y
    K = np.linalg.solve(S.T, P_xy.T).T

    innovation = y - y_hat
    for idx in measurement.angular_indices:
        innovation[idx] = wrap_angle(innovation[idx])

    mean = pred.mean + K @ innovation
    cov = pred.cov - K @ P_xy.T
    cov = 0.5 * (cov + cov.T)
    posterior = GaussianBelief(mean, cov)

    if params.adaptive:
        gamma_next = adapt_gamma(params.gamma, innovation, params.tau, m)
    else:
        gamma_next = params.gamma
    return UpdateReport(posterior, innovation, S, K, gamma_next)
