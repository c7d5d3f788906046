"""Run configuration: every tunable parameter, with defaults and validation.

The JSON config file mirrors this structure section by section; unknown
keys are rejected and each value is range-checked at load. Documented
ranges live in ``PARAMETER_RANGES``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, is_dataclass

import numpy as np


class ConfigError(ValueError):
    """Invalid configuration file or parameter value."""


@dataclass
class RansacParams:
    iterations: int = 100
    inlier_threshold: float = 0.12  # m/s, three times the Doppler accuracy
    min_inliers: int = 8


@dataclass
class ImuParams:
    accel_noise_density: float = 0.02  # m/s^2 per sqrt(Hz)
    gyro_noise_density: float = 0.002  # rad/s per sqrt(Hz)
    accel_bias_walk: float = 2e-4  # m/s^2 per sqrt(s)
    gyro_bias_walk: float = 2e-5  # rad/s per sqrt(s)
    bias_relin_threshold: float = 1e-3  # re-integrate when biases move further
    gravity: float = 9.81


@dataclass
class DopplerFactorParams:
    sigma: float = 0.04  # m/s
    huber_delta: float = 3.0  # in whitened units


@dataclass
class LandmarkParams:
    range_weight: float = 5.0  # m/rad weighting of bearing vs range distance
    gate: float = 0.5  # association acceptance on the polar distance
    n_obs_min: int = 5  # matches required before a landmark constrains heading
    max_err_max: float = 0.3  # worst historical association distance allowed
    staleness: float = 1.0  # s without a match before a landmark is dropped
    bearing_sigma: float = 0.01  # rad, heading-factor weight


@dataclass
class WindowParams:
    size: int = 10
    max_iterations: int = 8
    damping_init: float = 1e-4
    step_tol: float = 1e-6
    accel_bias_max: float = 1.0  # m/s^2, divergence guard
    gyro_bias_max: float = 0.2  # rad/s, divergence guard
    marginal_epsilon: float = 1e-8


@dataclass
class PriorParams:
    sigma_rotation: float = 0.02  # rad
    sigma_velocity: float = 0.5  # m/s
    sigma_accel_bias: float = 0.1  # m/s^2
    sigma_gyro_bias: float = 0.01  # rad/s


@dataclass
class OgmParams:
    resolution: float = 0.2  # m
    p_hit: float = 0.7
    p_miss: float = 0.4
    occupied_threshold: float = 0.7
    clamp_min: float = 0.12
    clamp_max: float = 0.97

    @property
    def logodds_hit(self) -> float:
        return float(np.log(self.p_hit / (1.0 - self.p_hit)))

    @property
    def logodds_miss(self) -> float:
        return float(np.log(self.p_miss / (1.0 - self.p_miss)))

    @property
    def logodds_clamp(self) -> tuple[float, float]:
        return (
            float(np.log(self.clamp_min / (1.0 - self.clamp_min))),
            float(np.log(self.clamp_max / (1.0 - self.clamp_max))),
        )

    @property
    def logodds_occupied(self) -> float:
        return float(np.log(self.occupied_threshold / (1.0 - self.occupied_threshold)))


@dataclass
class QueryMapParams:
    box_size: float = 40.0  # m, side of the axis-aligned crop around the robot
    z_extent: float = 3.0  # m above/below the robot kept in the query map


@dataclass
class GlobalMapParams:
    chunk_cells: int = 80  # chunk side in cells; 80 * 0.2 m = 16 m tiles
    insert_stride: int = 1  # use every n-th logged scan when building


@dataclass
class SearchSpec:
    yaw_range: float = np.pi / 2.0  # searched yaw window, +/- about the prior
    trans_range: float = 5.0  # m, +/- about the prior, x and y
    yaw_step: float = np.deg2rad(1.0)
    pyramid_levels: int = 4
    k_candidates: int = 8


@dataclass
class IcpParams:
    max_iterations: int = 20
    correspondence_radius: float = 0.6  # m
    tol: float = 1e-3  # stop when the mean residual changes less than this


@dataclass
class MatchParams:
    inlier_dist: float = 0.3  # m, d in the inlier-count score
    score_threshold_ratio: float = 0.35  # success needs score >= ratio * |query|
    min_query_points: int = 30
    chunk_radius_margin: float = 5.0  # m added to the chunk-fetch radius
    full: SearchSpec = field(default_factory=SearchSpec)
    tracking: SearchSpec = field(
        default_factory=lambda: SearchSpec(
            yaw_range=np.pi / 4.0, trans_range=1.0, pyramid_levels=2
        )
    )
    icp: IcpParams = field(default_factory=IcpParams)


@dataclass
class AblationParams:
    single_sensor: bool = False
    disable_heading_constraint: bool = False


@dataclass
class RunConfig:
    seed: int = 0
    match_period: float = 1.0  # s between localization attempts
    ransac: RansacParams = field(default_factory=RansacParams)
    imu: ImuParams = field(default_factory=ImuParams)
    doppler: DopplerFactorParams = field(default_factory=DopplerFactorParams)
    landmark: LandmarkParams = field(default_factory=LandmarkParams)
    window: WindowParams = field(default_factory=WindowParams)
    prior: PriorParams = field(default_factory=PriorParams)
    ogm: OgmParams = field(default_factory=OgmParams)
    query_map: QueryMapParams = field(default_factory=QueryMapParams)
    global_map: GlobalMapParams = field(default_factory=GlobalMapParams)
    match: MatchParams = field(default_factory=MatchParams)
    ablation: AblationParams = field(default_factory=AblationParams)
    rig: dict = field(default_factory=dict)  # forwarded to sim.rig_from_dict


# (lo, hi, inclusive_lo, inclusive_hi) per dotted parameter path
PARAMETER_RANGES: dict[str, tuple[float, float, bool, bool]] = {
    "seed": (0, 2**63 - 1, True, True),
    "match_period": (0.0, 3600.0, False, True),
    "ransac.iterations": (1, 100000, True, True),
    "ransac.inlier_threshold": (0.0, 10.0, False, True),
    "ransac.min_inliers": (3, 100000, True, True),
    "imu.accel_noise_density": (0.0, 10.0, True, True),
    "imu.gyro_noise_density": (0.0, 10.0, True, True),
    "imu.accel_bias_walk": (0.0, 1.0, True, True),
    "imu.gyro_bias_walk": (0.0, 1.0, True, True),
    "imu.bias_relin_threshold": (0.0, 1.0, False, True),
    "imu.gravity": (0.0, 30.0, False, True),
    "doppler.sigma": (0.0, 10.0, False, True),
    "doppler.huber_delta": (0.0, 100.0, False, True),
    "landmark.range_weight": (0.0, 1000.0, False, True),
    "landmark.gate": (0.0, 100.0, False, True),
    "landmark.n_obs_min": (0, 10000, True, True),
    "landmark.max_err_max": (0.0, 100.0, False, True),
    "landmark.staleness": (0.0, 3600.0, False, True),
    "landmark.bearing_sigma": (0.0, 3.2, False, True),
    "window.size": (2, 1000, True, True),
    "window.max_iterations": (1, 1000, True, True),
    "window.damping_init": (0.0, 1e6, False, True),
    "window.step_tol": (0.0, 1.0, False, True),
    "window.accel_bias_max": (0.0, 100.0, False, True),
    "window.gyro_bias_max": (0.0, 100.0, False, True),
    "window.marginal_epsilon": (0.0, 1.0, False, True),
    "prior.sigma_rotation": (0.0, 10.0, False, True),
    "prior.sigma_velocity": (0.0, 100.0, False, True),
    "prior.sigma_accel_bias": (0.0, 100.0, False, True),
    "prior.sigma_gyro_bias": (0.0, 100.0, False, True),
    "ogm.resolution": (0.0, 10.0, False, True),
    "ogm.p_hit": (0.5, 1.0, False, False),
    "ogm.p_miss": (0.0, 0.5, False, False),
    "ogm.occupied_threshold": (0.5, 1.0, False, False),
    "ogm.clamp_min": (0.0, 0.5, False, False),
    "ogm.clamp_max": (0.5, 1.0, False, False),
    "query_map.box_size": (1.0, 1000.0, True, True),
    "query_map.z_extent": (0.0, 100.0, False, True),
    "global_map.chunk_cells": (1, 100000, True, True),
    "global_map.insert_stride": (1, 1000, True, True),
    "match.inlier_dist": (0.0, 100.0, False, True),
    "match.score_threshold_ratio": (0.0, 1.0, False, True),
    "match.min_query_points": (1, 1000000, True, True),
    "match.chunk_radius_margin": (0.0, 1000.0, True, True),
    "match.full.yaw_range": (0.0, np.pi, False, True),
    "match.full.trans_range": (0.0, 1000.0, False, True),
    "match.full.yaw_step": (0.0, np.pi, False, True),
    "match.full.pyramid_levels": (1, 16, True, True),
    "match.full.k_candidates": (1, 10000, True, True),
    "match.tracking.yaw_range": (0.0, np.pi, False, True),
    "match.tracking.trans_range": (0.0, 1000.0, False, True),
    "match.tracking.yaw_step": (0.0, np.pi, False, True),
    "match.tracking.pyramid_levels": (1, 16, True, True),
    "match.tracking.k_candidates": (1, 10000, True, True),
    "match.icp.max_iterations": (1, 10000, True, True),
    "match.icp.correspondence_radius": (0.0, 1000.0, False, True),
    "match.icp.tol": (0.0, 10.0, False, True),
}


def _apply_overrides(obj, overrides: dict, path: str = "") -> None:
    known = {f.name: f for f in fields(obj)}
    for key, value in overrides.items():
        if key not in known:
            raise ConfigError(f"unknown config key: {path}{key}")
        current = getattr(obj, key)
        if is_dataclass(current) and not isinstance(value, dict) and value is not None:
            raise ConfigError(f"config section {path}{key} must be an object")
        if is_dataclass(current):
            _apply_overrides(current, value, path=f"{path}{key}.")
        else:
            setattr(obj, key, value)


def _check_ranges(cfg: RunConfig) -> None:
    def resolve(path: str):
        obj = cfg
        for part in path.split("."):
            obj = getattr(obj, part)
        return obj

    for path, (lo, hi, inc_lo, inc_hi) in PARAMETER_RANGES.items():
        value = resolve(path)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path} must be numeric, got {value!r}")
        ok_lo = value >= lo if inc_lo else value > lo
        ok_hi = value <= hi if inc_hi else value < hi
        if not (ok_lo and ok_hi):
            lo_b = "[" if inc_lo else "("
            hi_b = "]" if inc_hi else ")"
            raise ConfigError(f"{path}={value} outside valid range {lo_b}{lo}, {hi}{hi_b}")


def validate_config(cfg: RunConfig) -> RunConfig:
    _check_ranges(cfg)
    if not (cfg.ogm.clamp_min < 0.5 < cfg.ogm.clamp_max):
        raise ConfigError("log-odds clamp bounds must straddle 0.5")
    if not (cfg.ogm.occupied_threshold < cfg.ogm.clamp_max):
        raise ConfigError("ogm.occupied_threshold must be below ogm.clamp_max")
    if not isinstance(cfg.ablation.single_sensor, bool):
        raise ConfigError("ablation.single_sensor must be a bool")
    if not isinstance(cfg.ablation.disable_heading_constraint, bool):
        raise ConfigError("ablation.disable_heading_constraint must be a bool")
    if not isinstance(cfg.rig, dict):
        raise ConfigError("rig must be an object")
    return cfg


def config_from_dict(overrides: dict | None = None) -> RunConfig:
    cfg = RunConfig()
    if overrides:
        if not isinstance(overrides, dict):
            raise ConfigError("config root must be a JSON object")
        _apply_overrides(cfg, overrides)
    return validate_config(cfg)


def load_config(path) -> RunConfig:
    with open(path) as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return config_from_dict(data)
