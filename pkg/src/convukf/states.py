"""Motion and measurement models for the 11-state box tracker.

State layout (this index order is fixed everywhere in the package):

    0  p_x      position x, m
    1  p_y      position y, m
    2  p_z      position z, m
    3  phi      yaw, rad, kept in (-pi, pi]
    4  l        box length, m
    5  w        box width, m
    6  h        box height, m
    7  v_h      speed along heading, m/s
    8  v_v      vertical speed, m/s
    9  a_h      acceleration along heading, m/s^2
    10 phi_dot  yaw rate, rad/s

Measurements are the first seven components (position, yaw, extents).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

STATE_DIM = 11
MEAS_DIM = 7
YAW_INDEX = 3

# Below this yaw rate the turning closed form is replaced by its
# straight-line limit (the exact formula divides by phi_dot^2).
EPS_YAW = 1e-6


class InvalidStateError(ValueError):
    """Raised when a state or detection violates its invariants."""


def wrap_angle(theta):
    """Wrap an angle (scalar or array) into (-pi, pi]; in-range values pass through exactly."""
    theta = np.asarray(theta, dtype=float)
    wrapped = np.pi - np.mod(np.pi - theta, 2.0 * np.pi)
    return np.where((theta > -np.pi) & (theta <= np.pi), theta, wrapped)


def angle_residual(a: float, b: float) -> float:
    """Difference a - b wrapped into (-pi, pi], safe across the +-pi seam."""
    return float(wrap_angle(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))


def _require_finite(values, what: str) -> None:
    if not np.all(np.isfinite(values)):
        raise InvalidStateError(f"{what} contains non-finite values")


@dataclass(frozen=True)
class TrackState:
    """Full motion state of one tracked box."""

    p_x: float
    p_y: float
    p_z: float
    phi: float
    l: float
    w: float
    h: float
    v_h: float = 0.0
    v_v: float = 0.0
    a_h: float = 0.0
    phi_dot: float = 0.0

    def __post_init__(self):
        vec = self.as_vector()
        _require_finite(vec, "state")
        if self.l <= 0 or self.w <= 0 or self.h <= 0:
            raise InvalidStateError(f"box extents must be positive, got {(self.l, self.w, self.h)}")
        object.__setattr__(self, "phi", float(wrap_angle(self.phi)))

    def as_vector(self) -> np.ndarray:
        return np.array(
            [self.p_x, self.p_y, self.p_z, self.phi, self.l, self.w, self.h,
             self.v_h, self.v_v, self.a_h, self.phi_dot],
            dtype=float,
        )

    @classmethod
    def from_vector(cls, x) -> "TrackState":
        x = np.asarray(x, dtype=float)
        if x.shape != (STATE_DIM,):
            raise InvalidStateError(f"state vector must have shape ({STATE_DIM},), got {x.shape}")
        return cls(*x)

    @classmethod
    def from_detection(cls, det: "Detection") -> "TrackState":
        """Lift a detection to a state with all rates set to zero."""
        return cls(det.p_x, det.p_y, det.p_z, det.phi, det.l, det.w, det.h)


@dataclass(frozen=True)
class Detection:
    """A detected bounding box: geometric center, yaw, extents and a confidence score."""

    p_x: float
    p_y: float
    p_z: float
    phi: float
    l: float
    w: float
    h: float
    score: float = 1.0

    def __post_init__(self):
        vec = self.as_vector()
        _require_finite(vec, "detection")
        if self.l <= 0 or self.w <= 0 or self.h <= 0:
            raise InvalidStateError(f"box extents must be positive, got {(self.l, self.w, self.h)}")
        if not 0.0 <= self.score <= 1.0:
            raise InvalidStateError(f"score must lie in [0, 1], got {self.score}")
        object.__setattr__(self, "phi", float(wrap_angle(self.phi)))

    def as_vector(self) -> np.ndarray:
        return np.array(
            [self.p_x, self.p_y, self.p_z, self.phi, self.l, self.w, self.h], dtype=float
        )

    @classmethod
    def from_vector(cls, y, score: float = 1.0) -> "Detection":
        y = np.asarray(y, dtype=float)
        if y.shape != (MEAS_DIM,):
            raise InvalidStateError(f"measurement vector must have shape ({MEAS_DIM},), got {y.shape}")
        return cls(*y, score=score)


def _check_covariance(M: np.ndarray, name: str, positive_definite: bool) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidStateError(f"{name} must be square, got shape {M.shape}")
    _require_finite(M, name)
    if np.max(np.abs(M - M.T)) > 1e-8:
        raise InvalidStateError(f"{name} is not symmetric")
    M = 0.5 * (M + M.T)
    eigs = np.linalg.eigvalsh(M)
    if positive_definite:
        if eigs[0] <= 0:
            raise InvalidStateError(f"{name} must be positive definite (min eig {eigs[0]:.3e})")
    elif eigs[0] < -1e-10:
        raise InvalidStateError(f"{name} must be positive semi-definite (min eig {eigs[0]:.3e})")
    return M


@dataclass
class NoiseSpec:
    """Process and measurement noise covariances. Q may be singular, R must not be."""

    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        self.Q = _check_covariance(self.Q, "Q", positive_definite=False)
        self.R = _check_covariance(self.R, "R", positive_definite=True)


def ctra_transition(x: np.ndarray, dt: float) -> np.ndarray:
    """Constant-turn-rate-and-acceleration map on raw state vectors.

    Accepts a single state (shape (11,)) or a batch (shape (..., 11)); the
    batch form is what the sigma-point transform and the simulator use.
    Falls back to the analytic zero-turn-rate limit when |phi_dot| < EPS_YAW.
    """
    x = np.asarray(x, dtype=float)
    phi = x[..., 3]
    v = x[..., 7]
    a = x[..., 9]
    omega = x[..., 10]

    small = np.abs(omega) < EPS_YAW
    w_safe = np.where(small, 1.0, omega)
    phi_end = phi + omega * dt
    sin0, cos0 = np.sin(phi), np.cos(phi)
    sin1, cos1 = np.sin(phi_end), np.cos(phi_end)

    # The textbook arrangement divides cancelling O(1) cosine terms by
    # omega^2 and is unusable near the switch; rewriting the cosine
    # difference as -2 sin(phi_mid) sin(omega dt / 2) leaves a single
    # division by omega and stays accurate down to EPS_YAW.
    half = 0.5 * w_safe * dt
    phi_mid = phi + half
    sinc_half = np.sin(half) / half
    dx_turn = ((v + a * dt) * sin1 - v * sin0 - a * dt * np.sin(phi_mid) * sinc_half) / w_safe
    dy_turn = (-(v + a * dt) * cos1 + v * cos0 + a * dt * np.cos(phi_mid) * sinc_half) / w_safe
    dx_straight = (v * dt + 0.5 * a * dt**2) * cos0
    dy_straight = (v * dt + 0.5 * a * dt**2) * sin0

    out = x.copy()
    out[..., 0] += np.where(small, dx_straight, dx_turn)
    out[..., 1] += np.where(small, dy_straight, dy_turn)
    out[..., 2] += x[..., 8] * dt
    out[..., 3] = wrap_angle(phi_end)
    out[..., 7] += a * dt
    return out


def cv_transition(x: np.ndarray, dt: float) -> np.ndarray:
    """Constant-velocity map: straight-line motion along the current heading."""
    x = np.asarray(x, dtype=float)
    out = x.copy()
    out[..., 0] += x[..., 7] * np.cos(x[..., 3]) * dt
    out[..., 1] += x[..., 7] * np.sin(x[..., 3]) * dt
    out[..., 2] += x[..., 8] * dt
    return out


def ctra_predict(state: TrackState, dt: float) -> TrackState:
    """Advance a state by dt under the turn-rate-and-acceleration model."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return TrackState.from_vector(ctra_transition(state.as_vector(), dt))


def cv_predict(state: TrackState, dt: float) -> TrackState:
    """Advance a state by dt under the constant-velocity model."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return TrackState.from_vector(cv_transition(state.as_vector(), dt))


def measurement_project(state: TrackState) -> Detection:
    """Project a state onto measurement space: its first seven components."""
    return Detection.from_vector(state.as_vector()[:MEAS_DIM], score=1.0)


@dataclass(frozen=True)
class MotionModel:
    """A batch transition map plus the state indices that are angles.

    The angular indices tell the sigma-point transform which components
    need circular averaging and wrapped residuals.
    """

    name: str
    transition: callable = field(repr=False)
    angular_indices: tuple = (YAW_INDEX,)

    def __call__(self, x: np.ndarray, dt: float) -> np.ndarray:
        return self.transition(x, dt)


CTRA_MODEL = MotionModel("ctra", ctra_transition)
CV_MODEL = MotionModel("cv", cv_transition)
MOTION_MODELS = {"ctra": CTRA_MODEL, "cv": CV_MODEL}
