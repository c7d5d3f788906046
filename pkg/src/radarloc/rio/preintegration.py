"""IMU interpolation and on-manifold preintegration.

Between two radar timesteps the IMU buffer is compounded into a single
relative constraint on orientation and velocity (position is deliberately
not tracked). Deltas exclude gravity; it is injected at prediction time.
First-order bias corrections are valid near the linearization biases; the
raw sample buffer is kept so the compound can be rebuilt when the bias
estimates move too far.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import (
    exp_so3,
    quat_exp,
    quat_from_matrix,
    quat_mul,
    quat_normalize,
    quat_to_matrix,
    right_jacobian_so3,
    skew,
)
from ..config import ImuParams
from ..sim.imu import ImuData, ImuMeasurement
from .state import State


def interpolate_imu(z0: ImuMeasurement, z1: ImuMeasurement, t: float) -> ImuMeasurement:
    """Componentwise linear interpolation between two measurements."""
    if not (z0.t <= t <= z1.t) or not (z0.t < z1.t):
        raise ValueError(f"t={t} outside interpolation interval [{z0.t}, {z1.t}]")
    alpha = (t - z0.t) / (z1.t - z0.t)
    return ImuMeasurement(
        t,
        (1.0 - alpha) * z0.accel + alpha * z1.accel,
        (1.0 - alpha) * z0.gyro + alpha * z1.gyro,
    )


def imu_segment(imu: ImuData, t0: float, t1: float) -> list[ImuMeasurement]:
    """Measurements covering [t0, t1], endpoints interpolated to match."""
    if t1 <= t0:
        raise ValueError("segment requires t1 > t0")
    if imu.t[0] > t0 + 1e-9 or imu.t[-1] < t1 - 1e-9:
        raise ValueError(f"IMU buffer [{imu.t[0]}, {imu.t[-1]}] does not cover [{t0}, {t1}]")
    i0 = int(np.searchsorted(imu.t, t0, side="right")) - 1
    i1 = int(np.searchsorted(imu.t, t1, side="left"))
    i0 = max(i0, 0)
    i1 = min(i1, len(imu) - 1)
    out: list[ImuMeasurement] = []
    first = imu.measurement(i0)
    if abs(first.t - t0) < 1e-12:
        out.append(first)
    else:
        out.append(interpolate_imu(first, imu.measurement(i0 + 1), t0))
    for i in range(i0 + 1, i1):
        if t0 < imu.t[i] < t1:
            out.append(imu.measurement(i))
    last = imu.measurement(i1)
    if abs(last.t - t1) < 1e-12:
        out.append(last)
    else:
        out.append(interpolate_imu(imu.measurement(i1 - 1), last, t1))
    return out


@dataclass
class PreintegratedImu:
    """Compounded IMU increment over one radar interval.

    ``delta_q``/``delta_v`` are evaluated at the linearization biases
    ``(ba0, bg0)``; ``j_*`` give their first-order sensitivity to bias
    changes. ``cov_rot_vel`` is the 6x6 white-noise covariance of the
    [rotation, velocity] residual; bias rows use random-walk covariance
    over ``dt``.
    """

    dt: float
    delta_q: np.ndarray
    delta_v: np.ndarray
    ba0: np.ndarray
    bg0: np.ndarray
    j_rot_bg: np.ndarray
    j_vel_ba: np.ndarray
    j_vel_bg: np.ndarray
    cov_rot_vel: np.ndarray
    samples: list[ImuMeasurement]
    params: ImuParams

    def corrected(self, ba: np.ndarray, bg: np.ndarray):
        """Bias-corrected (delta_q, delta_v) plus the gyro-bias offset used."""
        dbg = bg - self.bg0
        dba = ba - self.ba0
        dq = quat_normalize(quat_mul(self.delta_q, quat_exp(self.j_rot_bg @ dbg)))
        dv = self.delta_v + self.j_vel_ba @ dba + self.j_vel_bg @ dbg
        return dq, dv, dbg

    def bias_shift(self, ba: np.ndarray, bg: np.ndarray) -> float:
        return float(max(np.linalg.norm(ba - self.ba0), np.linalg.norm(bg - self.bg0)))

    def reintegrated(self, ba: np.ndarray, bg: np.ndarray) -> "PreintegratedImu":
        return preintegrate(self.samples, ba, bg, self.params)


def preintegrate(
    samples: list[ImuMeasurement],
    ba0: np.ndarray,
    bg0: np.ndarray,
    params: ImuParams,
) -> PreintegratedImu:
    """Midpoint-rule compounding of an IMU segment at fixed biases."""
    if len(samples) < 2:
        raise ValueError("need at least two measurements (one interval)")
    times = np.array([m.t for m in samples])
    if np.any(np.diff(times) <= 0.0):
        raise ValueError("IMU timestamps must be strictly increasing")
    ba0 = np.asarray(ba0, dtype=float).copy()
    bg0 = np.asarray(bg0, dtype=float).copy()

    dR = np.eye(3)
    dv = np.zeros(3)
    j_rot_bg = np.zeros((3, 3))
    j_vel_ba = np.zeros((3, 3))
    j_vel_bg = np.zeros((3, 3))
    cov = np.zeros((6, 6))
    var_g = params.gyro_noise_density**2
    var_a = params.accel_noise_density**2

    for z0, z1 in zip(samples[:-1], samples[1:]):
        dt = z1.t - z0.t
        w_mid = 0.5 * (z0.gyro + z1.gyro) - bg0
        a_mid = 0.5 * (z0.accel + z1.accel) - ba0
        step = w_mid * dt
        R_step = exp_so3(step)
        Jr = right_jacobian_so3(step)
        dR_mid = dR @ exp_so3(0.5 * step)

        # noise/bias sensitivities use the pre-update rotation state
        j_vel_ba -= dR_mid * dt
        j_vel_bg -= dR_mid @ skew(a_mid) @ j_rot_bg * dt
        j_rot_bg = R_step.T @ j_rot_bg - Jr * dt

        F = np.eye(6)
        F[0:3, 0:3] = R_step.T
        F[3:6, 0:3] = -dR_mid @ skew(a_mid) * dt
        Q = np.zeros((6, 6))
        Q[0:3, 0:3] = (Jr @ Jr.T) * var_g * dt
        Q[3:6, 3:6] = (dR_mid @ dR_mid.T) * var_a * dt
        cov = F @ cov @ F.T + Q

        dv = dv + dR_mid @ a_mid * dt
        dR = dR @ R_step

    return PreintegratedImu(
        dt=float(times[-1] - times[0]),
        delta_q=quat_from_matrix(dR),
        delta_v=dv,
        ba0=ba0,
        bg0=bg0,
        j_rot_bg=j_rot_bg,
        j_vel_ba=j_vel_ba,
        j_vel_bg=j_vel_bg,
        cov_rot_vel=cov,
        samples=list(samples),
        params=params,
    )


def predict_state(x: State, pre: PreintegratedImu, t1: float | None = None) -> State:
    """Propagate a state through a preintegrated increment (gravity added)."""
    dq, dv, _ = pre.corrected(x.ba, x.bg)
    R = quat_to_matrix(x.q)
    gravity = np.array([0.0, 0.0, -pre.params.gravity])
    return State(
        t=x.t + pre.dt if t1 is None else t1,
        q=quat_normalize(quat_mul(x.q, dq)),
        v=x.v + R @ dv + gravity * pre.dt,
        ba=x.ba.copy(),
        bg=x.bg.copy(),
    )
