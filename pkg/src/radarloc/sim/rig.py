"""Sensor rig description: radar extrinsics, rates, noise, field of view."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..geometry import IMU_FRAME, RigidTransform, quat_from_axis_angle, radar_frame


@dataclass
class SensorRig:
    """Multi-radar plus IMU rig.

    ``extrinsics[s]`` maps radar-frame points of sensor ``s`` into the IMU
    frame. Defaults reflect an automotive 77 GHz radar: 80 m range,
    +/-75 deg azimuth and +/-15 deg elevation FOV, 20 Hz updates, 0.03 m /
    0.2 deg / 0.25 deg / 0.04 m/s accuracies, +/-30 m/s Doppler window.
    """

    extrinsics: list[RigidTransform] = field(default_factory=list)
    imu_rate: float = 200.0
    radar_rate: float = 20.0
    max_range: float = 80.0
    azimuth_fov: float = np.deg2rad(75.0)
    elevation_fov: float = np.deg2rad(15.0)
    range_sigma: float = 0.03
    azimuth_sigma: float = np.deg2rad(0.2)
    elevation_sigma: float = np.deg2rad(0.25)
    doppler_sigma: float = 0.04
    doppler_max: float = 30.0
    min_range: float = 0.5

    def __post_init__(self) -> None:
        if self.imu_rate <= 0.0 or self.radar_rate <= 0.0:
            raise ValueError("rates must be positive")
        ratio = self.imu_rate / self.radar_rate
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError("radar_rate must divide imu_rate")
        for name in (
            "range_sigma",
            "azimuth_sigma",
            "elevation_sigma",
            "doppler_sigma",
        ):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")
        if not (0.0 < self.min_range < self.max_range):
            raise ValueError("need 0 < min_range < max_range")

    @property
    def num_sensors(self) -> int:
        return len(self.extrinsics)

    @property
    def imu_per_radar(self) -> int:
        return int(round(self.imu_rate / self.radar_rate))

    def noise_free(self) -> "SensorRig":
        """Copy of the rig with all measurement noise zeroed."""
        return SensorRig(
            extrinsics=list(self.extrinsics),
            imu_rate=self.imu_rate,
            radar_rate=self.radar_rate,
            max_range=self.max_range,
            azimuth_fov=self.azimuth_fov,
            elevation_fov=self.elevation_fov,
            range_sigma=0.0,
            azimuth_sigma=0.0,
            elevation_sigma=0.0,
            doppler_sigma=0.0,
            doppler_max=self.doppler_max,
            min_range=self.min_range,
        )


def sensor_extrinsic(position, yaw_rad: float, sensor_id: int = 0) -> RigidTransform:
    """Extrinsic for a radar mounted at ``position`` looking along ``yaw_rad``."""
    return RigidTransform.from_parts(
        quat_from_axis_angle([0.0, 0.0, 1.0], yaw_rad),
        np.asarray(position, dtype=float),
        dst=IMU_FRAME,
        src=radar_frame(sensor_id),
    )


def default_rig(**overrides) -> SensorRig:
    """Three-radar surround rig: front-left, front-right, rear."""
    extrinsics = [
        sensor_extrinsic([0.35, 0.20, 0.0], np.deg2rad(50.0), 0),
        sensor_extrinsic([0.35, -0.20, 0.0], np.deg2rad(-50.0), 1),
        sensor_extrinsic([-0.35, 0.0, 0.0], np.pi, 2),
    ]
    return SensorRig(extrinsics=extrinsics, **overrides)


def rig_from_dict(cfg: dict) -> SensorRig:
    """Build a rig from a scenario JSON fragment; missing keys use defaults."""
    cfg = dict(cfg)
    sensors = cfg.pop("sensors", None)
    angle_keys = {"azimuth_fov", "elevation_fov", "azimuth_sigma", "elevation_sigma"}
    kwargs = {}
    for key, value in cfg.items():
        if key.endswith("_deg"):
            base = key[: -len("_deg")]
            if base not in angle_keys:
                raise ValueError(f"unknown rig parameter: {key}")
            kwargs[base] = np.deg2rad(float(value))
        else:
            kwargs[key] = value
    if sensors is None:
        return default_rig(**kwargs)
    extrinsics = []
    for sid, s in enumerate(sensors):
        yaw = np.deg2rad(float(s["yaw_deg"])) if "yaw_deg" in s else float(s.get("yaw", 0.0))
        extrinsics.append(sensor_extrinsic(s.get("position", [0.0, 0.0, 0.0]), yaw, sid))
    return SensorRig(extrinsics=extrinsics, **kwargs)
