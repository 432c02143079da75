"""Per-frame tracking-by-detection: predict, associate, update, manage lifecycles."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .association import Box3D, gate_and_match, similarity_matrix
from .filtering import FilterParams, GaussianBelief, convolutional_update, unscented_predict
from .states import MOTION_MODELS, Detection, InvalidStateError, TrackState

# Birth prior: measured components are trusted to roughly unit variance,
# the unobserved rates get a wide prior.
DEFAULT_BIRTH_VARIANCES = np.array([1.0] * 7 + [100.0] * 4)

_NUMERICAL_ERRORS = (InvalidStateError, np.linalg.LinAlgError, FloatingPointError)


class TrackStatus(enum.Enum):
    TENTATIVE = "tentative"
    CONFIRMED = "confirmed"
    DEAD = "dead"


@dataclass
class Track:
    """One tracked object: identity, belief, adaptation state and lifecycle counters."""

    id: int
    belief: GaussianBelief
    gamma: float
    hits: int = 1
    age: int = 1
    misses: int = 0
    status: TrackStatus = TrackStatus.TENTATIVE
    score: float = 1.0


@dataclass
class TrackerConfig:
    filter: FilterParams
    motion: str = "ctra"
    dt: float = 0.1
    iou_min: float = 0.01
    min_hits: int = 3
    max_misses: int = 2
    birth_variances: np.ndarray = field(default_factory=lambda: DEFAULT_BIRTH_VARIANCES.copy())

    def __post_init__(self):
        if self.motion not in MOTION_MODELS:
            raise ValueError(f"unknown motion model {self.motion!r}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.min_hits < 1:
            raise ValueError("min_hits must be at least 1")
        if self.max_misses < 0:
            raise ValueError("max_misses must be non-negative")
        self.birth_variances = np.asarray(self.birth_variances, dtype=float)


@dataclass(frozen=True)
class TrackSnapshot:
    track_id: int
    state: TrackState
    status: TrackStatus
    score: float


@dataclass
class FrameOutput:
    frame: int
    tracks: list = field(default_factory=list)  # TrackSnapshot, live tracks only
    n_matches: int = 0
    n_unmatched_tracks: int = 0
    n_unmatched_detections: int = 0
    n_births: int = 0
    n_deaths: int = 0
    warnings: list = field(default_factory=list)


def birth_track(det: Detection, track_id: int, config: TrackerConfig) -> Track:
    """Spawn a tentative track from an unmatched detection, rates zeroed."""
    state = TrackState.from_detection(det)
    belief = GaussianBelief(state.as_vector(), np.diag(config.birth_variances))
    return Track(id=track_id, belief=belief, gamma=config.filter.gamma, score=det.score)


def tracker_step(tracks, detections, config: TrackerConfig, frame: int = 0, next_id: int | None = None):
    """Run one frame of the tracking cycle.

    Returns (surviving tracks, FrameOutput). Numerical failures in a
    track's predict or update kill that track and are reported in the
    frame warnings instead of aborting the run.
    """
    if next_id is None:
        next_id = max((t.id for t in tracks), default=-1) + 1
    model = MOTION_MODELS[config.motion]
    out = FrameOutput(frame=frame)

    predicted = []  # (track, predicted belief, box)
    for t in tracks:
        try:
            belief = unscented_predict(t.belief, model, config.dt, config.filter.noise.Q, config.filter.a)
            box = Box3D.from_state(TrackState.from_vector(belief.mean))
        except _NUMERICAL_ERRORS as err:
            out.n_deaths += 1
            out.warnings.append(f"track {t.id} dropped during predict: {err}")
            continue
        predicted.append((t, belief, box))

    det_boxes = [Box3D.from_detection(d) for d in detections]
    sim = similarity_matrix([box for _, _, box in predicted], det_boxes)
    assignment = gate_and_match(sim, config.iou_min) if sim.size else gate_and_match(
        np.zeros((len(predicted), len(detections)))
    )

    survivors = []
    for ti, di, _ in assignment.matches:
        t, belief, _ = predicted[ti]
        det = detections[di]
        try:
            params = replace(config.filter, gamma=t.gamma)
            report = convolutional_update(belief, det, params)
            # reporting happens through TrackState, which enforces validity
            TrackState.from_vector(report.posterior.mean)
        except _NUMERICAL_ERRORS as err:
            out.n_deaths += 1
            out.warnings.append(f"track {t.id} dropped during update: {err}")
            continue
        t.belief = report.posterior
        t.gamma = report.gamma_next
        t.hits += 1
        t.misses = 0
        t.score = det.score
        survivors.append(t)

    for ti in assignment.unmatched_tracks:
        t, belief, _ = predicted[ti]
        t.belief = belief  # coast on the prediction
        t.hits = 0
        t.misses += 1
        if t.misses > config.max_misses:
            out.n_deaths += 1
            continue
        survivors.append(t)

    for di in assignment.unmatched_detections:
        survivors.append(birth_track(detections[di], next_id, config))
        next_id += 1
        out.n_births += 1

    for t in survivors:
        t.age += 1
        if t.status is TrackStatus.TENTATIVE and t.hits >= config.min_hits:
            t.status = TrackStatus.CONFIRMED

    survivors.sort(key=lambda t: t.id)
    out.tracks = [
        TrackSnapshot(t.id, TrackState.from_vector(t.belief.mean), t.status, t.score)
        for t in survivors
    ]
    out.n_matches = len(assignment.matches)
    out.n_unmatched_tracks = len(assignment.unmatched_tracks)
    out.n_unmatched_detections = len(assignment.unmatched_detections)
    return survivors, out


def run_sequence(frames, config: TrackerConfig):
    """Fold tracker_step over an ordered list of per-frame detection lists."""
    tracks: list = []
    next_id = 0
    outputs = []
    for idx, detections in enumerate(frames):
        tracks, out = tracker_step(tracks, detections, config, frame=idx, next_id=next_id)
        next_id = max((t.id for t in tracks), default=next_id - 1) + 1
        outputs.append(out)
    return outputs


def is_reportable(snapshot: TrackSnapshot, config: TrackerConfig) -> bool:
    """Confirmed tracks always report; young tentatives get a grace window."""
    return snapshot.status is TrackStatus.CONFIRMED or snapshot.age_unknown_grace(config) \
        if False else (snapshot.status is TrackStatus.CONFIRMED)
