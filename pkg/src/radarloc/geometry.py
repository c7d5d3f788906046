"""Rotation algebra, frame tags, and rigid transforms shared by every module.

Conventions, fixed here once for the whole project:

* Quaternions are Hamilton, stored as length-4 arrays ``[w, x, y, z]``.
* ``quat_to_matrix(q_AB) @ v_B`` expresses a B-frame vector in frame A;
  composition follows ``q_AC = q_AB * q_BC``.
* The orientation state of the robot is ``q_OI`` (IMU frame to global
  frame), so ``R(q_OI) @ v_imu`` is a global-frame vector.
* Quaternions are canonicalized to ``w >= 0`` before error extraction so
  that ``q`` and ``-q`` produce identical small-angle errors.
* Local orientation increments are right-multiplied (body frame):
  ``retract(q, dtheta) = q * quat_exp(dtheta)``.
* Angles are always wrapped to ``(-pi, pi]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_SMALL_ANGLE = 1e-10


class DegenerateBearingError(ValueError):
    """Raised when a bearing is requested for a point on the z axis."""


def skew(v: np.ndarray) -> np.ndarray:
    """Return the 3x3 matrix S with S @ w == cross(v, w)."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def wrap_angle(a):
    """Wrap angle(s) to (-pi, pi]."""
    wrapped = np.mod(np.asarray(a) + np.pi, 2.0 * np.pi) - np.pi
    wrapped = np.where(wrapped == -np.pi, np.pi, wrapped)
    return float(wrapped) if np.ndim(a) == 0 else wrapped


def bearing(p: np.ndarray) -> float:
    """Planar bearing atan2(y, x) of a point, in (-pi, pi]."""
    x, y = float(p[0]), float(p[1])
    if x == 0.0 and y == 0.0:
        raise DegenerateBearingError("bearing undefined for a point on the z axis")
    return float(np.arctan2(y, x))


def bearings_xy(points: np.ndarray) -> np.ndarray:
    """Vectorized ``bearing`` over an (n, 3) array; caller filters degenerates."""
    return np.arctan2(points[:, 1], points[:, 0])


# ---------------------------------------------------------------------------
# quaternions
# ---------------------------------------------------------------------------


def quat_identity() -> np.ndarray:
    return np.array([1.0, 0.0, 0.0, 0.0])


def quat_normalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n < _SMALL_ANGLE:
        return quat_identity()
    return q / n


def quat_canonical(q: np.ndarray) -> np.ndarray:
    """Flip sign so w >= 0; q and -q are the same rotation."""
    return -q if q[0] < 0.0 else q


def quat_conj(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product a * b (not normalized)."""
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_left_mat(q: np.ndarray) -> np.ndarray:
    """4x4 matrix L with L(q) @ p == quat_mul(q, p)."""
    w, x, y, z = q
    return np.array(
        [
            [w, -x, -y, -z],
            [x, w, -z, y],
            [y, z, w, -x],
            [z, -y, x, w],
        ]
    )


def quat_right_mat(q: np.ndarray) -> np.ndarray:
    """4x4 matrix R with R(q) @ p == quat_mul(p, q)."""
    w, x, y, z = q
    return np.array(
        [
            [w, -x, -y, -z],
            [x, w, z, -y],
            [y, -z, w, x],
            [z, y, -x, w],
        ]
    )


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    return quat_to_matrix(q) @ v


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    xx, yy, zz = x * x, y * y, z * z
    wx, wy, wz = w * x, w * y, w * z
    xy, xz, yz = x * y, x * z, y * z
    return np.array(
        [
            [1.0 - 2.0 * (yy + zz), 2.0 * (xy - wz), 2.0 * (xz + wy)],
            [2.0 * (xy + wz), 1.0 - 2.0 * (xx + zz), 2.0 * (yz - wx)],
            [2.0 * (xz - wy), 2.0 * (yz + wx), 1.0 - 2.0 * (xx + yy)],
        ]
    )


def quat_from_matrix(R: np.ndarray) -> np.ndarray:
    """Rotation matrix to canonical unit quaternion (Shepperd's method)."""
    tr = R[0, 0] + R[1, 1] + R[2, 2]
    if tr > 0.0:
        s = np.sqrt(tr + 1.0) * 2.0
        q = np.array(
            [0.25 * s, (R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s]
        )
    elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        s = np.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2.0
        q = np.array(
            [(R[2, 1] - R[1, 2]) / s, 0.25 * s, (R[0, 1] + R[1, 0]) / s, (R[0, 2] + R[2, 0]) / s]
        )
    elif R[1, 1] > R[2, 2]:
        s = np.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2.0
        q = np.array(
            [(R[0, 2] - R[2, 0]) / s, (R[0, 1] + R[1, 0]) / s, 0.25 * s, (R[1, 2] + R[2, 1]) / s]
        )
    else:
        s = np.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2.0
        q = np.array(
            [(R[1, 0] - R[0, 1]) / s, (R[0, 2] + R[2, 0]) / s, (R[1, 2] + R[2, 1]) / s, 0.25 * s]
        )
    return quat_canonical(quat_normalize(q))


def quat_from_axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    half = 0.5 * angle
    return np.concatenate([[np.cos(half)], np.sin(half) * axis])


def quat_exp(rotvec: np.ndarray) -> np.ndarray:
    """Map a rotation vector to a unit quaternion."""
    angle = np.linalg.norm(rotvec)
    if angle < _SMALL_ANGLE:
        q = np.concatenate([[1.0], 0.5 * rotvec])
        return quat_normalize(q)
    return np.concatenate([[np.cos(0.5 * angle)], np.sin(0.5 * angle) * rotvec / angle])


def quat_yaw(q: np.ndarray) -> float:
    """Yaw of R(q) about +z, in (-pi, pi]."""
    R = quat_to_matrix(q)
    return float(np.arctan2(R[1, 0], R[0, 0]))


def quat_slerp(q0: np.ndarray, q1: np.ndarray, alpha: float) -> np.ndarray:
    """Spherical interpolation along the shorter arc, alpha in [0, 1]."""
    q0 = quat_normalize(q0)
    q1 = quat_normalize(q1)
    dot = float(np.dot(q0, q1))
    if dot < 0.0:
        q1, dot = -q1, -dot
    if dot > 1.0 - 1e-12:
        return quat_normalize(q0 + alpha * (q1 - q0))
    theta = np.arccos(np.clip(dot, -1.0, 1.0))
    s = np.sin(theta)
    return quat_normalize((np.sin((1.0 - alpha) * theta) / s) * q0 + (np.sin(alpha * theta) / s) * q1)


def quat_error_vec(q_est: np.ndarray, q_ref: np.ndarray) -> np.ndarray:
    """Small-angle rotation error 2 * vec(q_est * q_ref^-1), sign-canonicalized.

    Zero when both quaternions encode the same rotation (including
    antipodal representations).
    """
    e = quat_mul(q_est, quat_conj(q_ref))
    e = quat_canonical(e)
    return 2.0 * e[1:4]


def quat_local_error(q: np.ndarray, q_ref: np.ndarray) -> np.ndarray:
    """Right (body-frame) error 2 * vec(q_ref^-1 * q); inverts ``retract``."""
    e = quat_mul(quat_conj(q_ref), q)
    e = quat_canonical(e)
    return 2.0 * e[1:4]


def retract(q: np.ndarray, dtheta: np.ndarray) -> np.ndarray:
    """Apply a body-frame rotation increment: q * Exp(dtheta)."""
    return quat_normalize(quat_mul(q, quat_exp(dtheta)))


# ---------------------------------------------------------------------------
# SO(3) maps
# ---------------------------------------------------------------------------


def exp_so3(rotvec: np.ndarray) -> np.ndarray:
    """Rodrigues' formula; stable for small angles."""
    angle = np.linalg.norm(rotvec)
    if angle < _SMALL_ANGLE:
        return np.eye(3) + skew(rotvec)
    axis = rotvec / angle
    K = skew(axis)
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def log_so3(R: np.ndarray) -> np.ndarray:
    """Rotation vector of R; inverse of ``exp_so3`` on (-pi, pi]."""
    cos_angle = np.clip(0.5 * (np.trace(R) - 1.0), -1.0, 1.0)
    angle = np.arccos(cos_angle)
    if angle < _SMALL_ANGLE:
        return 0.5 * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    if angle > np.pi - 1e-7:
        # near pi the off-diagonal formula degenerates; recover axis from R + I
        A = 0.5 * (R + np.eye(3))
        axis = np.sqrt(np.clip(np.diag(A), 0.0, None))
        # fix signs from the largest component
        k = int(np.argmax(axis))
        if axis[k] > 0.0:
            axis = axis * np.sign(A[k] / axis[k])
            axis[k] = abs(axis[k])
        axis = axis / np.linalg.norm(axis)
        return angle * axis
    return (angle / (2.0 * np.sin(angle))) * np.array(
        [R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]]
    )


def right_jacobian_so3(rotvec: np.ndarray) -> np.ndarray:
    """Right Jacobian Jr with Exp(phi + Jr(phi) @ d) ~ Exp(phi) Exp(d)."""
    angle = np.linalg.norm(rotvec)
    if angle < 1e-7:
        return np.eye(3) - 0.5 * skew(rotvec)
    K = skew(rotvec / angle)
    s, c = np.sin(angle), np.cos(angle)
    return np.eye(3) - ((1.0 - c) / angle) * K + ((angle - s) / angle) * (K @ K)


# ---------------------------------------------------------------------------
# frames and rigid transforms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FrameId:
    """Tag naming the frame a quantity is expressed in."""

    name: str
    index: int | None = None

    def __str__(self) -> str:
        return self.name if self.index is None else f"{self.name}{self.index}"


GLOBAL_FRAME = FrameId("global")
IMU_FRAME = FrameId("imu")


def radar_frame(sensor_id: int) -> FrameId:
    return FrameId("radar", sensor_id)


class FrameMismatchError(ValueError):
    """Raised when tagged transforms are chained across incompatible frames."""


@dataclass(frozen=True)
class RigidTransform:
    """Rigid transform taking src-frame points into dst-frame points.

    ``apply(p_src) = R(q) @ p_src + t``. Frame tags are optional; when both
    operands carry tags, composition and application check them.
    """

    q: np.ndarray
    t: np.ndarray
    dst: FrameId | None = None
    src: FrameId | None = None

    @staticmethod
    def identity(dst: FrameId | None = None, src: FrameId | None = None) -> "RigidTransform":
        return RigidTransform(quat_identity(), np.zeros(3), dst, src)

    @staticmethod
    def from_parts(
        q: np.ndarray, t: np.ndarray, dst: FrameId | None = None, src: FrameId | None = None
    ) -> "RigidTransform":
        return RigidTransform(quat_canonical(quat_normalize(q)), np.asarray(t, dtype=float), dst, src)

    @property
    def rotation(self) -> np.ndarray:
        return quat_to_matrix(self.q)

    def apply(self, p: np.ndarray) -> np.ndarray:
        """Transform one point (3,) or a stack of points (n, 3)."""
        p = np.asarray(p, dtype=float)
        if p.ndim == 1:
            return self.rotation @ p + self.t
        return p @ self.rotation.T + self.t

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """self (B<-C) composed after other (C<-D) gives B<-D."""
        if self.src is not None and other.dst is not None and self.src != other.dst:
            raise FrameMismatchError(f"cannot chain {self.src} <- with -> {other.dst}")
        return RigidTransform(
            quat_normalize(quat_mul(self.q, other.q)),
            self.rotation @ other.t + self.t,
            self.dst,
            other.src,
        )

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return self.compose(other)

    def inverse(self) -> "RigidTransform":
        q_inv = quat_conj(self.q)
        return RigidTransform(q_inv, -(quat_to_matrix(q_inv) @ self.t), self.src, self.dst)

    def as_matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.t
        return m
