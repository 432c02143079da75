"""Outlier-robust 3D multi-object tracking with a gap-inflated unscented filter."""

from .association import AssignmentResult, Box3D, gate_and_match, hungarian_assign, iou_3d, similarity_matrix
from .filtering import (
    FilterParams,
    GaussianBelief,
    SigmaSet,
    UpdateReport,
    adapt_gamma,
    convolutional_update,
    julier_sigma_points,
    unscented_predict,
)
from .likelihood import GridSpec, conv_likelihood_closed, conv_likelihood_numeric
from .states import (
    CTRA_MODEL,
    CV_MODEL,
    Detection,
    InvalidStateError,
    NoiseSpec,
    TrackState,
    angle_residual,
    ctra_predict,
    cv_predict,
    measurement_project,
)

__all__ = [
    "AssignmentResult",
    "Box3D",
    "CTRA_MODEL",
    "CV_MODEL",
    "Detection",
    "FilterParams",
    "GaussianBelief",
    "GridSpec",
    "InvalidStateError",
    "NoiseSpec",
    "SigmaSet",
    "TrackState",
    "UpdateReport",
    "adapt_gamma",
    "angle_residual",
    "conv_likelihood_closed",
    "conv_likelihood_numeric",
    "convolutional_update",
    "ctra_predict",
    "cv_predict",
    "gate_and_match",
    "hungarian_assign",
    "iou_3d",
    "julier_sigma_points",
    "measurement_project",
    "similarity_matrix",
    "unscented_predict",
]
