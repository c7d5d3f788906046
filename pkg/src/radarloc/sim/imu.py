"""IMU measurement synthesis from ground truth.

Specific force follows a z-up global frame with gravity (0, 0, -g): a
stationary, level IMU reads +g on its z axis. Noise densities are
continuous-time (per sqrt(Hz)); bias random walks and white noise are
discretized at the sample interval. Identical seeds give bit-identical
streams.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..geometry import quat_to_matrix
from .trajectory import GroundTruth

GRAVITY = 9.81


class ImuMeasurement(NamedTuple):
    t: float
    accel: np.ndarray
    gyro: np.ndarray


@dataclass
class ImuData:
    """Time-ordered IMU stream as packed arrays."""

    t: np.ndarray
    accel: np.ndarray
    gyro: np.ndarray

    def __post_init__(self) -> None:
        if np.any(np.diff(self.t) <= 0.0):
            raise ValueError("IMU timestamps must be strictly increasing")

    def __len__(self) -> int:
        return len(self.t)

    def measurement(self, i: int) -> ImuMeasurement:
        return ImuMeasurement(float(self.t[i]), self.accel[i], self.gyro[i])


@dataclass
class ImuNoiseModel:
    """White-noise densities, bias random walks, and initial biases."""

    accel_noise_density: float = 0.02  # m/s^2 per sqrt(Hz)
    gyro_noise_density: float = 0.002  # rad/s per sqrt(Hz)
    accel_bias_walk: float = 2e-4  # m/s^2 per sqrt(s)
    gyro_bias_walk: float = 2e-5  # rad/s per sqrt(s)
    accel_bias_init: np.ndarray = field(default_factory=lambda: np.zeros(3))
    gyro_bias_init: np.ndarray = field(default_factory=lambda: np.zeros(3))

    @staticmethod
    def from_dict(cfg: dict) -> "ImuNoiseModel":
        model = ImuNoiseModel()
        for key, value in cfg.items():
            if not hasattr(model, key):
                raise ValueError(f"unknown IMU noise parameter: {key}")
            if key.endswith("_init"):
                setattr(model, key, np.asarray(value, dtype=float))
            else:
                setattr(model, key, float(value))
        return model


def simulate_imu(
    gt: GroundTruth,
    noise: ImuNoiseModel | None = None,
    seed: int = 0,
    gravity: float = GRAVITY,
) -> ImuData:
    """Generate the IMU stream for a trajectory.

    ``noise=None`` yields exact measurements; otherwise biases follow a
    random walk from their initial values and white noise is added, all
    drawn from a stream derived deterministically from ``seed``.
    """
    n = len(gt)
    g_global = np.array([0.0, 0.0, -gravity])
    accel = np.empty((n, 3))
    for i in range(n):
        R_oi = quat_to_matrix(gt.quat[i])
        accel[i] = R_oi.T @ (gt.accel[i] - g_global)
    gyro = gt.body_rate.copy()

    if noise is not None:
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x1101]))
        dt = float(np.mean(np.diff(gt.t)))
        sqrt_dt = np.sqrt(dt)
        ba = np.asarray(noise.accel_bias_init, dtype=float) + np.concatenate(
            [
                np.zeros((1, 3)),
                np.cumsum(noise.accel_bias_walk * sqrt_dt * rng.standard_normal((n - 1, 3)), axis=0),
            ]
        )
        bg = np.asarray(noise.gyro_bias_init, dtype=float) + np.concatenate(
            [
                np.zeros((1, 3)),
                np.cumsum(noise.gyro_bias_walk * sqrt_dt * rng.standard_normal((n - 1, 3)), axis=0),
            ]
        )
        accel = accel + ba + (noise.accel_noise_density / sqrt_dt) * rng.standard_normal((n, 3))
        gyro = gyro + bg + (noise.gyro_noise_density / sqrt_dt) * rng.standard_normal((n, 3))

    return ImuData(gt.t.copy(), accel, gyro)
