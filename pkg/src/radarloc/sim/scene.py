"""Scene description: static reflectors, moving objects, clutter rate."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class DynamicObject:
    """Point reflector moving at constant velocity."""

    position0: np.ndarray
    velocity: np.ndarray
    weight: float = 1.0

    def position_at(self, t: float) -> np.ndarray:
        return self.position0 + self.velocity * t


@dataclass
class Scene:
    """Static world model for the radar simulator.

    ``static_weights`` are per-target detection probabilities in (0, 1];
    ``clutter_density`` is the Poisson mean of spurious detections per scan.
    """

    static_points: np.ndarray
    static_weights: np.ndarray
    dynamic_objects: list[DynamicObject] = field(default_factory=list)
    clutter_density: float = 0.0

    def __post_init__(self) -> None:
        self.static_points = np.atleast_2d(np.asarray(self.static_points, dtype=float))
        if self.static_points.size == 0:
            self.static_points = np.zeros((0, 3))
        self.static_weights = np.asarray(self.static_weights, dtype=float).reshape(-1)
        if len(self.static_weights) != len(self.static_points):
            raise ValueError("one weight per static target required")
        if np.any((self.static_weights <= 0.0) | (self.static_weights > 1.0)):
            raise ValueError("weights must lie in (0, 1]")
        if self.clutter_density < 0.0:
            raise ValueError("clutter_density must be >= 0")


def wall_points(start, end, spacing: float = 0.5, z_levels=(0.5, 1.5)) -> np.ndarray:
    """Point reflectors along a vertical wall segment between two xy points."""
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    length = np.linalg.norm(end - start)
    count = max(int(np.floor(length / spacing)) + 1, 2)
    alphas = np.linspace(0.0, 1.0, count)
    base = start[None, :] + alphas[:, None] * (end - start)[None, :]
    points = []
    for z in z_levels:
        level = np.zeros((count, 3))
        level[:, :2] = base[:, :2]
        level[:, 2] = z
        points.append(level)
    return np.vstack(points)


def scene_from_dict(cfg: dict) -> Scene:
    """Expand a scenario JSON scene block into explicit point targets."""
    points = []
    weights = []
    for target in cfg.get("static_targets", []):
        target = list(target)
        w = float(target[3]) if len(target) > 3 else 1.0
        points.append(np.asarray(target[:3], dtype=float))
        weights.append(w)
    points = [np.atleast_2d(p) for p in points]
    for wall in cfg.get("walls", []):
        pts = wall_points(
            wall["start"],
            wall["end"],
            spacing=float(wall.get("spacing", 0.5)),
            z_levels=tuple(wall.get("z_levels", (0.5, 1.5))),
        )
        points.append(pts)
        weights.extend([float(wall.get("weight", 1.0))] * len(pts))
    for post in cfg.get("posts", []):
        z_levels = tuple(post.get("z_levels", (0.5, 1.5, 2.5)))
        xy = np.asarray(post["position"], dtype=float)[:2]
        pts = np.array([[xy[0], xy[1], z] for z in z_levels])
        points.append(pts)
        weights.extend([float(post.get("weight", 1.0))] * len(pts))
    static = np.vstack(points) if points else np.zeros((0, 3))
    dynamics = [
        DynamicObject(
            np.asarray(obj["position"], dtype=float),
            np.asarray(obj["velocity"], dtype=float),
            float(obj.get("weight", 1.0)),
        )
        for obj in cfg.get("dynamic_objects", [])
    ]
    return Scene(
        static_points=static,
        static_weights=np.asarray(weights, dtype=float),
        dynamic_objects=dynamics,
        clutter_density=float(cfg.get("clutter_density", 0.0)),
    )
