"""Persistent radar landmark tracking for the heading constraint.

Detections are matched to tracked landmarks with a weighted polar
distance (bearing difference scaled by a range-equivalent weight, plus
range difference) solved as a one-to-one assignment. Landmarks promote
into the constraint set only after enough consistent matches and retire
when stale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..config import LandmarkParams
from ..geometry import bearing, wrap_angle


def polar_distance(p_a: np.ndarray, p_b: np.ndarray, range_weight: float) -> float:
    """sqrt(L^2 * dbearing^2 + drange^2) between two IMU-frame points."""
    dphi = wrap_angle(bearing(p_a) - bearing(p_b))
    drange = np.linalg.norm(p_a) - np.linalg.norm(p_b)
    return float(np.hypot(range_weight * dphi, drange))


def polar_distance_matrix(
    detections: np.ndarray, landmarks: np.ndarray, range_weight: float
) -> np.ndarray:
    """Pairwise polar distances, (n_det, n_lm); degenerate bearings get inf."""
    if len(detections) == 0 or len(landmarks) == 0:
        return np.zeros((len(detections), len(landmarks)))
    phi_d = np.arctan2(detections[:, 1], detections[:, 0])
    phi_l = np.arctan2(landmarks[:, 1], landmarks[:, 0])
    r_d = np.linalg.norm(detections, axis=1)
    r_l = np.linalg.norm(landmarks, axis=1)
    dphi = wrap_angle(phi_d[:, None] - phi_l[None, :])
    cost = np.hypot(range_weight * dphi, r_d[:, None] - r_l[None, :])
    bad_d = np.hypot(detections[:, 0], detections[:, 1]) < 1e-9
    bad_l = np.hypot(landmarks[:, 0], landmarks[:, 1]) < 1e-9
    cost[bad_d, :] = np.inf
    cost[:, bad_l] = np.inf
    return cost


def associate(
    detections: np.ndarray,
    landmarks: np.ndarray,
    range_weight: float,
    gate: float,
):
    """Optimal one-to-one assignment gated by the polar distance.

    Returns ``(matches, unmatched)`` where matches are
    ``(detection_index, landmark_index, distance)`` triples and unmatched
    lists detection indices with no valid landmark.
    """
    n_det = len(detections)
    if n_det == 0 or len(landmarks) == 0:
        return [], list(range(n_det))
    cost = polar_distance_matrix(detections, landmarks, range_weight)
    # a large finite stand-in keeps the assignment solvable; gating below
    # removes these pairs again
    big = 1e9
    finite = np.where(np.isfinite(cost), cost, big)
    rows, cols = linear_sum_assignment(finite)
    matches = []
    matched_det = set()
    for r, c in zip(rows, cols):
        d = cost[r, c]
        if np.isfinite(d) and d < gate:
            matches.append((int(r), int(c), float(d)))
            matched_det.add(int(r))
    unmatched = [i for i in range(n_det) if i not in matched_det]
    return matches, unmatched


@dataclass
class Landmark:
    """A tracked static radar target.

    ``position`` is fixed at the dead-reckoned global position of the
    first observation; ``n_obs`` counts successful re-matches.
    """

    position: np.ndarray
    created: float
    n_obs: int = 0
    max_err: float = 0.0
    t_last: float = 0.0


@dataclass
class ActiveMatch:
    detection_index: int
    landmark: Landmark


@dataclass
class LandmarkTracker:
    params: LandmarkParams
    landmarks: list[Landmark] = field(default_factory=list)

    def project(self, R_io: np.ndarray, t_oi: np.ndarray) -> np.ndarray:
        """Landmark positions in the current IMU frame, (n, 3)."""
        if not self.landmarks:
            return np.zeros((0, 3))
        positions = np.array([lm.position for lm in self.landmarks])
        return (positions - t_oi) @ R_io.T

    def update(
        self,
        detections_imu: np.ndarray,
        now: float,
        R_oi: np.ndarray,
        t_oi: np.ndarray,
    ) -> list[ActiveMatch]:
        """One tracking step: match, promote, retire, initialize.

        ``detections_imu`` are IMU-frame positions of the static (inlier)
        detections. Returns the matches eligible to constrain heading this
        step: landmarks re-observed more than ``n_obs_min`` times whose
        worst association distance stays below ``max_err_max``.
        """
        p = self.params
        projected = self.project(R_oi.T, t_oi)
        matches, unmatched = associate(detections_imu, projected, p.range_weight, p.gate)

        active: list[ActiveMatch] = []
        for det_idx, lm_idx, dist in matches:
            lm = self.landmarks[lm_idx]
            lm.n_obs += 1
            lm.max_err = max(lm.max_err, dist)
            lm.t_last = now
            if lm.n_obs > p.n_obs_min and lm.max_err < p.max_err_max:
                active.append(ActiveMatch(det_idx, lm))

        self.landmarks = [lm for lm in self.landmarks if now - lm.t_last <= p.staleness]

        for det_idx in unmatched:
            position = R_oi @ detections_imu[det_idx] + t_oi
            self.landmarks.append(Landmark(position=position, created=now, t_last=now))
        return active
