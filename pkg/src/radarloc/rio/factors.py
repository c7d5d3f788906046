"""Measurement residuals and their analytic Jacobians.

All Jacobians are with respect to the 12-dim error state
[dtheta, dv, dba, dbg] of :mod:`.state`, using the right-multiplied
orientation increment. Rotation-error Jacobians are computed exactly via
quaternion product matrices, so they match finite differences of the
implemented residuals at any linearization point, not only near zero
error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import (
    quat_conj,
    quat_identity,
    quat_left_mat,
    quat_mul,
    quat_normalize,
    quat_right_mat,
    quat_to_matrix,
    right_jacobian_so3,
    skew,
    wrap_angle,
)
from .preintegration import PreintegratedImu
from .state import BA, BG, STATE_DIM, THETA, VEL, State

IMU_RESIDUAL_DIM = 12  # rows: [rotation, velocity, gyro bias, accel bias]


def _vec_jacobian(q_left: np.ndarray, q_right: np.ndarray) -> np.ndarray:
    """d(2*vec(q_left * dq * q_right))/d dtheta for dq = Exp(dtheta)."""
    M = quat_left_mat(q_left) @ quat_right_mat(q_right)
    return M[1:4, 1:4]


def doppler_residuals(
    state: State,
    rays: np.ndarray,
    doppler: np.ndarray,
    R_imu_radar: np.ndarray,
    t_imu_radar: np.ndarray,
    omega: np.ndarray,
    with_jacobian: bool = True,
):
    """Range-rate residuals for one sensor's inlier detections.

    ``rays`` are unit sensor-frame directions; the prediction projects the
    global velocity rotated into the radar frame plus the lever-arm
    velocity induced by the bias-corrected body rate onto each ray.
    """
    A = R_imu_radar.T  # radar <- imu
    t_ri = -(A @ t_imu_radar)
    R_io = quat_to_matrix(state.q).T
    lever_rows = np.cross(rays, t_ri) @ A  # rows: d(prediction)/d(omega - bg)
    vel_rows = rays @ (A @ R_io)
    residual = doppler - vel_rows @ state.v - lever_rows @ (omega - state.bg)
    if not with_jacobian:
        return residual, None
    J = np.zeros((len(rays), STATE_DIM))
    m = R_io @ state.v
    J[:, THETA] = -np.cross(rays @ A, np.broadcast_to(m, rays.shape))
    J[:, VEL] = -vel_rows
    J[:, BG] = lever_rows
    return residual, J


def imu_residual(
    x_k: State,
    x_k1: State,
    pre: PreintegratedImu,
    with_jacobian: bool = True,
):
    """12-dim consistency residual between two states and the IMU compound.

    Zero exactly when ``x_k1`` equals the propagation of ``x_k``. Rows are
    [orientation error, velocity error, gyro-bias change, accel-bias
    change], each expressed as estimate minus prediction.
    """
    dq, dv, dbg = pre.corrected(x_k.ba, x_k.bg)
    R_k = quat_to_matrix(x_k.q)
    gravity = np.array([0.0, 0.0, -pre.params.gravity])
    q_pred = quat_normalize(quat_mul(x_k.q, dq))
    v_pred = x_k.v + R_k @ dv + gravity * pre.dt

    e_q = quat_mul(x_k1.q, quat_conj(q_pred))
    sign = -1.0 if e_q[0] < 0.0 else 1.0
    e_q = sign * e_q

    res = np.empty(IMU_RESIDUAL_DIM)
    res[0:3] = 2.0 * e_q[1:4]
    res[3:6] = x_k1.v - v_pred
    res[6:9] = x_k1.bg - x_k.bg
    res[9:12] = x_k1.ba - x_k.ba
    if not with_jacobian:
        return res, None, None

    J_k = np.zeros((IMU_RESIDUAL_DIM, STATE_DIM))
    J_k1 = np.zeros((IMU_RESIDUAL_DIM, STATE_DIM))

    # rotation rows
    J_k1[0:3, THETA] = sign * _vec_jacobian(x_k1.q, quat_conj(q_pred))
    J_k[0:3, THETA] = -sign * _vec_jacobian(
        quat_mul(x_k1.q, quat_conj(dq)), quat_conj(x_k.q)
    )
    # gyro-bias sensitivity of the compound rotation, including the
    # right-Jacobian of the already-applied first-order correction
    j_eff = right_jacobian_so3(pre.j_rot_bg @ dbg) @ pre.j_rot_bg
    J_k[0:3, BG] = -sign * _vec_jacobian(x_k1.q, quat_conj(q_pred)) @ j_eff

    # velocity rows
    J_k1[3:6, VEL] = np.eye(3)
    J_k[3:6, THETA] = R_k @ skew(dv)
    J_k[3:6, VEL] = -np.eye(3)
    J_k[3:6, BA] = -R_k @ pre.j_vel_ba
    J_k[3:6, BG] = -R_k @ pre.j_vel_bg

    # bias rows
    J_k1[6:9, BG] = np.eye(3)
    J_k[6:9, BG] = -np.eye(3)
    J_k1[9:12, BA] = np.eye(3)
    J_k[9:12, BA] = -np.eye(3)
    return res, J_k, J_k1


def imu_sqrt_information(pre: PreintegratedImu, floor: float = 1e-12) -> np.ndarray:
    """Whitening matrix for the IMU residual (block diagonal 12x12)."""
    cov = np.zeros((IMU_RESIDUAL_DIM, IMU_RESIDUAL_DIM))
    cov[0:6, 0:6] = pre.cov_rot_vel
    cov[6:9, 6:9] = np.eye(3) * max(pre.params.gyro_bias_walk**2 * pre.dt, floor)
    cov[9:12, 9:12] = np.eye(3) * max(pre.params.accel_bias_walk**2 * pre.dt, floor)
    cov[0:6, 0:6] += np.eye(6) * floor
    # whiten with inv(L) where cov = L L^T
    L = np.linalg.cholesky(cov)
    return np.linalg.inv(L)


def landmark_residuals(
    state: State,
    bearings_meas: np.ndarray,
    offsets_global: np.ndarray,
    with_jacobian: bool = True,
):
    """Bearing residuals for tracked landmarks.

    ``offsets_global[i]`` is the (constant) landmark position minus the
    dead-reckoned robot position; the residual compares the measured
    detection bearing against the landmark bearing after rotation into the
    IMU frame, wrapped to (-pi, pi]. These terms constrain orientation
    only: the Jacobian w.r.t. velocity and biases is identically zero.
    """
    R_io = quat_to_matrix(state.q).T
    m = offsets_global @ R_io.T
    planar_sq = m[:, 0] ** 2 + m[:, 1] ** 2
    valid = planar_sq > 1e-12
    residual = np.where(
        valid, wrap_angle(bearings_meas - np.arctan2(m[:, 1], m[:, 0])), 0.0
    )
    if not with_jacobian:
        return residual, None, valid
    dphi = np.zeros_like(m)
    safe = np.where(valid, planar_sq, 1.0)
    dphi[:, 0] = -m[:, 1] / safe
    dphi[:, 1] = m[:, 0] / safe
    J = np.zeros((len(m), STATE_DIM))
    J[:, THETA] = -np.cross(dphi, m)
    J[~valid] = 0.0
    return residual, J, valid


@dataclass
class PriorFactor:
    """Gaussian prior on one state, anchored at a linearization point.

    Residual is ``sqrt_info @ local_error(x, mean) + rhs``; ``rhs`` carries
    the information-vector offset produced by marginalization.
    """

    mean: State
    sqrt_info: np.ndarray
    rhs: np.ndarray
    regularized: bool = False

    @staticmethod
    def from_sigmas(mean: State, sigma_rot, sigma_vel, sigma_ba, sigma_bg) -> "PriorFactor":
        inv = np.concatenate(
            [
                np.full(3, 1.0 / sigma_rot),
                np.full(3, 1.0 / sigma_vel),
                np.full(3, 1.0 / sigma_ba),
                np.full(3, 1.0 / sigma_bg),
            ]
        )
        return PriorFactor(mean.copy(), np.diag(inv), np.zeros(STATE_DIM))

    @staticmethod
    def from_information(
        mean: State, H: np.ndarray, b: np.ndarray, epsilon: float
    ) -> "PriorFactor":
        """Build from an information matrix/vector, regularizing if needed."""
        H = 0.5 * (H + H.T)
        regularized = False
        try:
            L = np.linalg.cholesky(H)
        except np.linalg.LinAlgError:
            regularized = True
            L = np.linalg.cholesky(H + epsilon * np.eye(STATE_DIM))
        sqrt_info = L.T
        rhs = np.linalg.solve(L, b)
        return PriorFactor(mean.copy(), sqrt_info, rhs, regularized)

    def residual(self, x: State, with_jacobian: bool = True):
        delta = x.local_error(self.mean)
        res = self.sqrt_info @ delta + self.rhs
        if not with_jacobian:
            return res, None
        e_q = quat_mul(quat_conj(self.mean.q), x.q)
        sign = -1.0 if e_q[0] < 0.0 else 1.0
        J_delta = np.eye(STATE_DIM)
        J_delta[0:3, 0:3] = sign * _vec_jacobian(e_q, quat_identity())
        return res, self.sqrt_info @ J_delta
