"""Radar-inertial odometry estimator.

Per radar timestep: interpolate/preintegrate the IMU buffer, predict the
new state, reject dynamic detections by pooled consensus, attach range
rate and heading factors, optimize the sliding window, dead-reckon the
translation from optimized velocities, and marginalize once the window
exceeds its size. When consensus fails the step degrades to IMU-only
prediction and is flagged in the output.
"""

from __future__ import annotations

import bisect
import logging
from dataclasses import dataclass, field

import numpy as np

from ..config import RunConfig
from ..geometry import quat_canonical, quat_to_matrix
from ..sim.imu import ImuData
from ..sim.io import SensorLog
from ..sim.rig import rig_from_dict
from .factors import PriorFactor
from .landmarks import LandmarkTracker
from .preintegration import imu_segment, predict_state, preintegrate
from .ransac import estimate_velocity, pool_scans
from .state import State
from .window import (
    DopplerBlock,
    LandmarkBlock,
    SlidingWindow,
    WindowEntry,
    marginalize_oldest,
    optimize_window,
)

log = logging.getLogger(__name__)


class EstimatorDivergence(RuntimeError):
    """The window optimization produced a non-finite or unbounded state."""


@dataclass
class OdometryOutput:
    t: float
    q: np.ndarray
    v: np.ndarray
    p: np.ndarray
    degraded: bool

    def to_record(self) -> dict:
        return {
            "t": float(self.t),
            "q": [float(x) for x in self.q],
            "v": [float(x) for x in self.v],
            "p": [float(x) for x in self.p],
            "degraded": bool(self.degraded),
        }


@dataclass
class StepDiagnostics:
    detections: int = 0
    inliers: int = 0
    landmark_factors: int = 0
    ransac_reason: str = ""
    optimize_iterations: int = 0
    marginalization_regularized: bool = False
    factor_count: int = 0


class RioEstimator:
    """Single-owner state machine; feed measurements in time order."""

    def __init__(self, cfg: RunConfig, extrinsics):
        self.cfg = cfg
        self.extrinsics = list(extrinsics)
        self.tracker = LandmarkTracker(cfg.landmark)
        self.window: SlidingWindow | None = None
        self.t_oi = np.zeros(3)
        self.step_count = 0
        self.last_diagnostics = StepDiagnostics()
        self._imu_t: list[float] = []
        self._imu_a: list[np.ndarray] = []
        self._imu_w: list[np.ndarray] = []
        self._last_t: float | None = None

    # ------------------------------------------------------------------
    def add_imu(self, t: float, accel: np.ndarray, gyro: np.ndarray) -> None:
        if self._imu_t and t <= self._imu_t[-1]:
            raise ValueError("IMU timestamps must be strictly increasing")
        self._imu_t.append(float(t))
        self._imu_a.append(np.asarray(accel, dtype=float))
        self._imu_w.append(np.asarray(gyro, dtype=float))

    def _imu_data(self) -> ImuData:
        return ImuData(
            np.asarray(self._imu_t), np.asarray(self._imu_a), np.asarray(self._imu_w)
        )

    def _trim_imu(self, keep_from: float) -> None:
        cut = bisect.bisect_left(self._imu_t, keep_from) - 1
        if cut > 0:
            del self._imu_t[:cut]
            del self._imu_a[:cut]
            del self._imu_w[:cut]

    def _gyro_at(self, t: float) -> np.ndarray:
        if not self._imu_t:
            return np.zeros(3)
        i = bisect.bisect_right(self._imu_t, t) - 1
        if i < 0:
            return self._imu_w[0].copy()
        if i + 1 < len(self._imu_t) and self._imu_t[i] < t:
            a = (t - self._imu_t[i]) / (self._imu_t[i + 1] - self._imu_t[i])
            return (1.0 - a) * self._imu_w[i] + a * self._imu_w[i + 1]
        return self._imu_w[i].copy()

    # ------------------------------------------------------------------
    def _filter_scans(self, scans):
        if self.cfg.ablation.single_sensor:
            return [s for s in scans if s.sensor_id == 0]
        return list(scans)

    def _detections_imu(self, scans, mask, pooled):
        """IMU-frame positions of inlier detections, pooled order."""
        positions = []
        by_sensor = {s.sensor_id: s for s in scans}
        for keep, sid, idx in zip(mask, pooled.sensor_ids, pooled.indices):
            if not keep:
                continue
            extr = self.extrinsics[sid]
            positions.append(extr.rotation @ by_sensor[sid].points[idx] + extr.t)
        return np.asarray(positions).reshape(-1, 3)

    def _landmark_block(self, detections_imu, t, x_pred, t_oi_prov):
        if self.cfg.ablation.disable_heading_constraint:
            return None
        R_oi = quat_to_matrix(x_pred.q)
        active = self.tracker.update(detections_imu, t, R_oi, t_oi_prov)
        if not active:
            return None
        planar = np.hypot(detections_imu[:, 0], detections_imu[:, 1])
        bearings = []
        offsets = []
        for match in active:
            det = detections_imu[match.detection_index]
            if planar[match.detection_index] < 1e-9:
                continue  # degenerate bearing: skip this pair
            bearings.append(np.arctan2(det[1], det[0]))
            offsets.append(match.landmark.position - t_oi_prov)
        if not bearings:
            return None
        return LandmarkBlock(np.asarray(bearings), np.asarray(offsets).reshape(-1, 3))

    def _relinearize_edges(self) -> None:
        thr = self.cfg.imu.bias_relin_threshold
        for entry in self.window.entries[:-1]:
            pre = entry.preint_to_next
            if pre is not None and pre.bias_shift(entry.state.ba, entry.state.bg) > thr:
                entry.preint_to_next = pre.reintegrated(entry.state.ba, entry.state.bg)
                entry.imu_sqrt_info = None

    def _check_health(self) -> None:
        newest = self.window.entries[-1].state
        if not newest.is_finite():
            raise EstimatorDivergence("non-finite state estimate")
        if np.linalg.norm(newest.ba) > self.cfg.window.accel_bias_max:
            raise EstimatorDivergence("accelerometer bias out of bounds")
        if np.linalg.norm(newest.bg) > self.cfg.window.gyro_bias_max:
            raise EstimatorDivergence("gyro bias out of bounds")

    # ------------------------------------------------------------------
    def process_scans(self, t: float, scans) -> OdometryOutput:
        scans = self._filter_scans(scans)
        diag = StepDiagnostics()
        self.last_diagnostics = diag
        if self.window is None:
            out = self._bootstrap(t, scans, diag)
        else:
            out = self._step(t, scans, diag)
        diag.factor_count = self.window.factor_count()
        self.step_count += 1
        self._last_t = t
        self._trim_imu(t - 0.2)
        return out

    def _bootstrap(self, t: float, scans, diag: StepDiagnostics) -> OdometryOutput:
        omega = self._gyro_at(t)
        state = State.initial(t=t)
        pooled = pool_scans(scans, self.extrinsics, omega, state.bg)
        diag.detections = len(pooled)
        result = estimate_velocity(pooled, self.cfg.ransac, seed=[self.cfg.seed, self.step_count])
        diag.ransac_reason = result.reason
        degraded = result.degraded
        if result.ok:
            state.v = result.velocity.copy()  # identity initial orientation
            diag.inliers = int(result.inlier_mask.sum())

        p = self.cfg.prior
        prior = PriorFactor.from_sigmas(
            state, p.sigma_rotation, p.sigma_velocity, p.sigma_accel_bias, p.sigma_gyro_bias
        )
        entry = WindowEntry(state=state, t_oi=np.zeros(3), degraded=degraded)
        self.window = SlidingWindow(prior=prior, entries=[entry])

        if result.ok:
            entry.doppler = self._doppler_blocks(scans, result.inlier_mask, pooled, omega)
            detections_imu = self._detections_imu(scans, result.inlier_mask, pooled)
            entry.landmarks = self._landmark_block(detections_imu, t, state, np.zeros(3))
            report = optimize_window(self.window, self.extrinsics, self.cfg)
            diag.optimize_iterations = report.iterations
            if report.diverged:
                raise EstimatorDivergence("optimization diverged at bootstrap")
            self._check_health()
        return self._emit(degraded)

    def _doppler_blocks(self, scans, mask, pooled, omega):
        blocks = []
        by_sensor = {s.sensor_id: s for s in scans}
        for sid, scan in sorted(by_sensor.items()):
            sel = mask & (pooled.sensor_ids == sid)
            if not np.any(sel):
                continue
            idx = pooled.indices[sel]
            points = scan.points[idx]
            rays = points / np.linalg.norm(points, axis=1, keepdims=True)
            blocks.append(
                DopplerBlock(
                    sensor_id=sid, rays=rays, doppler=scan.doppler[idx], omega=omega.copy()
                )
            )
        return blocks

    def _step(self, t: float, scans, diag: StepDiagnostics) -> OdometryOutput:
        if t <= self._last_t:
            raise ValueError("radar timesteps must be strictly increasing")
        dt = t - self._last_t
        segment = imu_segment(self._imu_data(), self._last_t, t)
        last_entry = self.window.entries[-1]
        pre = preintegrate(segment, last_entry.state.ba, last_entry.state.bg, self.cfg.imu)
        x_pred = predict_state(last_entry.state, pre, t1=t)
        omega = segment[-1].gyro

        pooled = pool_scans(scans, self.extrinsics, omega, x_pred.bg)
        diag.detections = len(pooled)
        result = estimate_velocity(pooled, self.cfg.ransac, seed=[self.cfg.seed, self.step_count])
        diag.ransac_reason = result.reason

        entry = WindowEntry(state=x_pred, t_oi=np.zeros(3), degraded=result.degraded)
        if result.ok:
            diag.inliers = int(result.inlier_mask.sum())
            entry.doppler = self._doppler_blocks(scans, result.inlier_mask, pooled, omega)
            v_prov = 0.5 * (last_entry.state.v + x_pred.v)
            t_oi_prov = self.t_oi + v_prov * dt
            detections_imu = self._detections_imu(scans, result.inlier_mask, pooled)
            entry.landmarks = self._landmark_block(detections_imu, t, x_pred, t_oi_prov)
            if entry.landmarks is not None:
                diag.landmark_factors = len(entry.landmarks.bearings)

        last_entry.preint_to_next = pre
        last_entry.imu_sqrt_info = None
        self.window.entries.append(entry)
        self._relinearize_edges()

        report = optimize_window(self.window, self.extrinsics, self.cfg)
        diag.optimize_iterations = report.iterations
        if report.diverged:
            raise EstimatorDivergence("window optimization diverged")
        self._check_health()

        v_prev = self.window.entries[-2].state.v
        v_new = self.window.entries[-1].state.v
        self.t_oi = self.t_oi + 0.5 * (v_prev + v_new) * dt
        entry.t_oi = self.t_oi.copy()

        if len(self.window) > self.cfg.window.size:
            info = marginalize_oldest(self.window, self.extrinsics, self.cfg)
            diag.marginalization_regularized = info.regularized
        return self._emit(result.degraded)

    def _emit(self, degraded: bool) -> OdometryOutput:
        state = self.window.entries[-1].state
        return OdometryOutput(
            t=state.t,
            q=quat_canonical(state.q).copy(),
            v=state.v.copy(),
            p=self.t_oi.copy(),
            degraded=degraded,
        )


def run_odometry(
    sensor_log: SensorLog,
    cfg: RunConfig,
    extrinsics=None,
    collect_step_seconds: list[float] | None = None,
) -> list[OdometryOutput]:
    """Replay a sensor log through the estimator.

    Scan groups without full IMU coverage (before the first or after the
    last IMU sample) are skipped with a warning.
    """
    import time as _time

    if extrinsics is None:
        extrinsics = rig_from_dict(cfg.rig).extrinsics
    if sensor_log.imu is None or len(sensor_log.imu) < 2:
        raise ValueError("sensor log carries no usable IMU stream")
    est = RioEstimator(cfg, extrinsics)
    imu = sensor_log.imu
    fed = 0
    outputs: list[OdometryOutput] = []
    skipped = 0
    for t, scans in sensor_log.scans_by_time():
        while fed < len(imu) and imu.t[fed] <= t + 1e-12:
            est.add_imu(imu.t[fed], imu.accel[fed], imu.gyro[fed])
            fed += 1
        covered = (imu.t[0] <= t + 1e-9) and (fed > 0 and est._imu_t[-1] >= t - 1e-9)
        if not covered or (est._last_t is not None and est._last_t >= t):
            skipped += 1
            continue
        start = _time.perf_counter()
        outputs.append(est.process_scans(t, scans))
        if collect_step_seconds is not None:
            collect_step_seconds.append(_time.perf_counter() - start)
    if skipped:
        log.warning("skipped %d scan groups without IMU coverage", skipped)
    return outputs
