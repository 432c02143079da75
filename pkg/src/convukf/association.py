"""Box overlap similarity and optimal detection-to-track assignment."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .states import Detection, InvalidStateError, TrackState, wrap_angle

# Padding cost used to square up rectangular assignment problems; must
# dominate any real entry (gating costs are at most 1).
_PAD_COST = 1e6

DEFAULT_IOU_GATE = 0.01


@dataclass(frozen=True)
class Box3D:
    """An upright box: center, yaw about the vertical axis, and extents."""

    center: tuple  # (p_x, p_y, p_z)
    yaw: float
    extents: tuple  # (l, w, h)

    def __post_init__(self):
        cx, cy, cz = (float(v) for v in self.center)
        l, w, h = (float(v) for v in self.extents)
        if not all(map(math.isfinite, (cx, cy, cz, self.yaw, l, w, h))):
            raise InvalidStateError("box contains non-finite values")
        if l <= 0 or w <= 0 or h <= 0:
            raise InvalidStateError(f"box extents must be positive, got {(l, w, h)}")
        object.__setattr__(self, "center", (cx, cy, cz))
        object.__setattr__(self, "extents", (l, w, h))
        object.__setattr__(self, "yaw", float(wrap_angle(self.yaw)))

    @classmethod
    def from_detection(cls, det: Detection) -> "Box3D":
        return cls((det.p_x, det.p_y, det.p_z), det.phi, (det.l, det.w, det.h))

    @classmethod
    def from_state(cls, state: TrackState) -> "Box3D":
        return cls((state.p_x, state.p_y, state.p_z), state.phi, (state.l, state.w, state.h))

    def volume(self) -> float:
        l, w, h = self.extents
        return l * w * h

    def footprint(self) -> list:
        """The four ground-plane corners, counter-clockwise."""
        cx, cy, _ = self.center
        l, w, _ = self.extents
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        hl, hw = 0.5 * l, 0.5 * w
        return [
            (cx + c * hl - s * hw, cy + s * hl + c * hw),
            (cx - c * hl - s * hw, cy - s * hl + c * hw),
            (cx - c * hl + s * hw, cy - s * hl - c * hw),
            (cx + c * hl + s * hw, cy + s * hl - c * hw),
        ]


@dataclass
class AssignmentResult:
    matches: list = field(default_factory=list)  # (track index, detection index, similarity)
    unmatched_tracks: list = field(default_factory=list)
    unmatched_detections: list = field(default_factory=list)


def _clip_polygon(subject, clip):
    """Sutherland-Hodgman intersection of a convex subject with a convex CCW clip polygon."""
    output = subject
    n = len(clip)
    for i in range(n):
        ax, ay = clip[i]
        bx, by = clip[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        input_pts = output
        output = []
        if not input_pts:
            break
        px, py = input_pts[-1]
        prev_inside = ex * (py - ay) - ey * (px - ax) >= 0
        for qx, qy in input_pts:
            inside = ex * (qy - ay) - ey * (qx - ax) >= 0
            if inside != prev_inside:
                # edge crossing: intersect segment (p, q) with the clip line
                dx, dy = qx - px, qy - py
                denom = ex * dy - ey * dx
                t = (ey * (px - ax) - ex * (py - ay)) / denom
                output.append((px + t * dx, py + t * dy))
            if inside:
                output.append((qx, qy))
            px, py, prev_inside = qx, qy, inside
    return output


def _polygon_area(pts) -> float:
    if len(pts) < 3:
        return 0.0
    area = 0.0
    n = len(pts)
    for i in range(n):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % n]
        area += x0 * y1 - x1 * y0
    return 0.5 * abs(area)


def iou_3d(a: Box3D, b: Box3D) -> float:
    """Volume intersection-over-union of two yaw-rotated upright boxes."""
    za0, za1 = a.center[2] - a.extents[2] / 2, a.center[2] + a.extents[2] / 2
    zb0, zb1 = b.center[2] - b.extents[2] / 2, b.center[2] + b.extents[2] / 2
    z_overlap = min(za1, zb1) - max(za0, zb0)
    if z_overlap <= 0:
        return 0.0
    # cheap reject: footprints cannot overlap beyond the sum of circumradii
    dx = a.center[0] - b.center[0]
    dy = a.center[1] - b.center[1]
    reach = 0.5 * (math.hypot(a.extents[0], a.extents[1]) + math.hypot(b.extents[0], b.extents[1]))
    if dx * dx + dy * dy > reach * reach:
        return 0.0
    area = _polygon_area(_clip_polygon(a.footprint(), b.footprint()))
    if area <= 0.0:
        return 0.0
    inter = area * z_overlap
    union = a.volume() + b.volume() - inter
    return inter / union


def similarity_matrix(tracks, detections) -> np.ndarray:
    """Pairwise overlap similarity, shape (len(tracks), len(detections))."""
    sim = np.zeros((len(tracks), len(detections)))
    for i, t in enumerate(tracks):
        for j, d in enumerate(detections):
            sim[i, j] = iou_3d(t, d)
    return sim


def hungarian_assign(cost) -> list:
    """Minimum-total-cost one-to-one assignment on a rectangular cost matrix.

    The matrix is padded to square with a sentinel cost; pairs involving
    padding are dropped, so the result has min(rows, cols) pairs, sorted
    by row index. Empty matrices yield an empty assignment.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.size == 0:
        return []
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost matrix must be finite")
    rows, cols = cost.shape
    n = max(rows, cols)
    padded = np.full((n, n), _PAD_COST)
    padded[:rows, :cols] = cost
    row_ind, col_ind = linear_sum_assignment(padded)
    pairs = [(int(r), int(c)) for r, c in zip(row_ind, col_ind) if r < rows and c < cols]
    return sorted(pairs)


def gate_and_match(sim, iou_min: float = DEFAULT_IOU_GATE) -> AssignmentResult:
    """Assign tracks to detections by maximum total similarity, then gate.

    Pairs whose similarity falls below iou_min are demoted to unmatched on
    both sides.
    """
    sim = np.asarray(sim, dtype=float)
    n_tracks, n_dets = sim.shape
    result = AssignmentResult()
    matched_tracks, matched_dets = set(), set()
    for r, c in hungarian_assign(1.0 - sim) if sim.size else []:
        if sim[r, c] >= iou_min:
            result.matches.append((r, c, float(sim[r, c])))
            matched_tracks.add(r)
            matched_dets.add(c)
    result.unmatched_tracks = [i for i in range(n_tracks) if i not in matched_tracks]
    result.unmatched_detections = [j for j in range(n_dets) if j not in matched_dets]
    return result
