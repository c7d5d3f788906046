import numpy as np
import pytest

from radarloc.config import RansacParams
from radarloc.geometry import quat_to_matrix
from radarloc.rio.ransac import (
    PooledDetections,
    compensate_lever_arm,
    estimate_velocity,
    pool_scans,
)
from radarloc.sim import RadarScan, default_rig, sensor_extrinsic


def _pooled(directions, rates):
    n = len(rates)
    return PooledDetections(
        np.asarray(directions, dtype=float),
        np.asarray(rates, dtype=float),
        np.zeros(n, dtype=int),
        np.arange(n),
    )


def _random_dirs(rng, n):
    d = rng.normal(size=(n, 3))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


class TestLeverArmCompensation:
    def test_no_rotation_no_change(self):
        extr = sensor_extrinsic([0.5, 0.0, 0.0], 0.3)
        points = np.array([[10.0, 2.0, 0.5]])
        doppler = np.array([1.25])
        _, _, rr = compensate_lever_arm(points, doppler, extr, np.zeros(3), np.zeros(3))
        assert rr[0] == pytest.approx(1.25, abs=1e-12)

    def test_omega_equals_bias_no_change(self):
        extr = sensor_extrinsic([0.5, -0.2, 0.1], -0.4)
        points = np.array([[5.0, 1.0, 0.0], [8.0, -2.0, 1.0]])
        doppler = np.array([0.4, -0.7])
        omega = np.array([0.1, -0.2, 0.5])
        _, _, rr = compensate_lever_arm(points, doppler, extr, omega, omega.copy())
        np.testing.assert_allclose(rr, doppler, atol=1e-12)

    def test_colocated_sensor_no_change(self):
        extr = sensor_extrinsic([0.0, 0.0, 0.0], 0.9)
        points = np.array([[4.0, 4.0, 0.0]])
        doppler = np.array([2.0])
        _, _, rr = compensate_lever_arm(
            points, doppler, extr, np.array([0.0, 0.0, 2.0]), np.zeros(3)
        )
        assert rr[0] == pytest.approx(2.0, abs=1e-12)

    def test_rigid_body_oracle(self):
        # sensor 0.5 m ahead on x, yawing at 1 rad/s, target on the sensor's
        # +y axis: the lever-arm point velocity is omega x arm, magnitude 0.5
        extr = sensor_extrinsic([0.5, 0.0, 0.0], 0.0)
        omega = np.array([0.0, 0.0, 1.0])
        points = np.array([[0.0, 10.0, 0.0]])
        lever_velocity = np.cross(omega, extr.t)
        assert np.linalg.norm(lever_velocity) == pytest.approx(0.5)
        ray_imu = points[0] / np.linalg.norm(points[0])  # identity extrinsic rotation
        expected_correction = -(ray_imu @ lever_velocity)
        _, _, rr = compensate_lever_arm(points, np.array([0.0]), extr, omega, np.zeros(3))
        assert rr[0] == pytest.approx(expected_correction, abs=1e-12)
        assert abs(rr[0]) == pytest.approx(0.5, abs=1e-12)

    def test_compensation_recovers_static_model(self):
        # full kinematics: simulated doppler of a static point seen from a
        # rotating, translating platform reduces to v_imu . ray after
        # compensation
        rng = np.random.default_rng(0)
        extr = sensor_extrinsic([0.4, 0.25, -0.1], 0.8)
        v_imu = np.array([1.2, -0.3, 0.1])
        omega = np.array([0.05, -0.1, 0.6])
        targets = rng.uniform(-30, 30, size=(25, 3))
        local = (targets - extr.t) @ extr.rotation  # sensor-frame positions
        rays = local / np.linalg.norm(local, axis=1, keepdims=True)
        v_sensor_imu = v_imu + np.cross(omega, extr.t)
        doppler = rays @ (extr.rotation.T @ v_sensor_imu)
        _, rays_imu, rr = compensate_lever_arm(local, doppler, extr, omega, np.zeros(3))
        np.testing.assert_allclose(rr, rays_imu @ v_imu, atol=1e-12)


class TestRansac:
    def test_noise_free_exact(self):
        rng = np.random.default_rng(1)
        dirs = _random_dirs(rng, 50)
        v_true = np.array([1.0, 0.0, 0.0])
        result = estimate_velocity(_pooled(dirs, dirs @ v_true), RansacParams(), seed=0)
        assert result.ok
        np.testing.assert_allclose(result.velocity, v_true, atol=1e-9)
        assert result.inlier_mask.all()

    def test_outliers_flagged_and_velocity_recovered(self):
        # oracle: least squares on the ground-truth static subset
        rng = np.random.default_rng(2)
        params = RansacParams()
        for trial in range(20):
            n = 100
            dirs = _random_dirs(rng, n)
            v_true = rng.uniform(-3, 3, size=3)
            rates = dirs @ v_true + 0.04 * rng.standard_normal(n)
            dynamic = rng.permutation(n)[: int(0.3 * n)]
            offsets = rng.uniform(1.0, 3.0, size=len(dynamic)) * rng.choice([-1, 1], len(dynamic))
            rates[dynamic] += offsets
            static = np.setdiff1d(np.arange(n), dynamic)
            v_oracle, *_ = np.linalg.lstsq(dirs[static], rates[static], rcond=None)
            result = estimate_velocity(_pooled(dirs, rates), params, seed=trial)
            assert result.ok
            assert np.linalg.norm(result.velocity - v_oracle) < 0.05
            flagged = ~result.inlier_mask
            recall = flagged[dynamic].mean()
            assert recall >= 0.95

    def test_single_ray_direction_degenerate(self):
        dirs = np.tile([1.0, 0.0, 0.0], (40, 1))
        result = estimate_velocity(_pooled(dirs, np.full(40, 0.7)), RansacParams(), seed=0)
        assert result.degraded
        assert result.reason in ("insufficient_consensus", "degenerate_geometry")

    def test_too_few_detections(self):
        result = estimate_velocity(_pooled(np.eye(3)[:2], [0.1, 0.2]), RansacParams(), seed=0)
        assert result.degraded and result.reason == "too_few_detections"

    def test_consensus_below_min_inliers_degrades(self):
        rng = np.random.default_rng(3)
        dirs = _random_dirs(rng, 12)
        rates = rng.uniform(-5.0, 5.0, size=12)  # mutually inconsistent
        result = estimate_velocity(_pooled(dirs, rates), RansacParams(min_inliers=10), seed=0)
        assert result.degraded

    def test_inliers_invariant_to_sensor_relabeling(self):
        rng = np.random.default_rng(4)
        dirs = _random_dirs(rng, 60)
        v_true = np.array([2.0, -1.0, 0.2])
        rates = dirs @ v_true + 0.02 * rng.standard_normal(60)
        rates[:10] += 2.0
        pooled_a = PooledDetections(dirs, rates, np.zeros(60, int), np.arange(60))
        pooled_b = PooledDetections(dirs, rates, rng.integers(0, 3, 60), np.arange(60))
        res_a = estimate_velocity(pooled_a, RansacParams(), seed=9)
        res_b = estimate_velocity(pooled_b, RansacParams(), seed=9)
        assert np.array_equal(res_a.inlier_mask, res_b.inlier_mask)
        np.testing.assert_allclose(res_a.velocity, res_b.velocity, atol=1e-12)

    def test_deterministic_per_seed(self):
        rng = np.random.default_rng(5)
        dirs = _random_dirs(rng, 80)
        rates = dirs @ np.array([1.0, 1.0, 0.0]) + 0.04 * rng.standard_normal(80)
        rates[:30] += 1.5
        pooled = _pooled(dirs, rates)
        a = estimate_velocity(pooled, RansacParams(), seed=3)
        b = estimate_velocity(pooled, RansacParams(), seed=3)
        assert np.array_equal(a.inlier_mask, b.inlier_mask)
        np.testing.assert_array_equal(a.velocity, b.velocity)


class TestPooling:
    def test_pool_scans_merges_sensors(self):
        rig = default_rig()
        scan0 = RadarScan(0.0, 0, np.array([[10.0, 0.0, 0.0]]), np.array([1.0]))
        scan2 = RadarScan(0.0, 2, np.array([[5.0, 1.0, 0.0], [7.0, -1.0, 0.2]]), np.array([0.5, 0.2]))
        pooled = pool_scans([scan0, scan2], rig.extrinsics, np.zeros(3), np.zeros(3))
        assert len(pooled) == 3
        assert set(pooled.sensor_ids) == {0, 2}
        np.testing.assert_allclose(np.linalg.norm(pooled.directions, axis=1), 1.0, atol=1e-12)

    def test_pooled_static_consistency_from_sim(self):
        # end to end: simulated noise-free static scans from three sensors
        # pool into an exactly consistent system for the IMU-frame velocity
        from radarloc import sim
        from radarloc.geometry import quat_to_matrix as q2m

        gt = sim.gen_trajectory({"kind": "circle", "radius": 15.0, "speed": 2.0}, 2.0, 200.0)
        rng = np.random.default_rng(6)
        pts = rng.uniform(-50, 50, size=(80, 3))
        pts[:, 2] = rng.uniform(0.0, 2.5, 80)
        scene = sim.Scene(pts, np.ones(80))
        rig = sim.default_rig().noise_free()
        index = 120
        scans = [sim.simulate_scan(gt, index, scene, rig, s) for s in range(3)]
        omega = gt.body_rate[index]
        pooled = pool_scans(scans, rig.extrinsics, omega, np.zeros(3))
        assert len(pooled) >= 10
        v_imu_true = q2m(gt.quat[index]).T @ gt.velocity[index]
        np.testing.assert_allclose(pooled.rates, pooled.directions @ v_imu_true, atol=1e-9)
        result = estimate_velocity(pooled, RansacParams(), seed=0)
        assert result.ok
        np.testing.assert_allclose(result.velocity, v_imu_true, atol=1e-8)
