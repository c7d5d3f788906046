import numpy as np
import pytest

from conftest import random_imu_segment
from radarloc.config import ImuParams
from radarloc.geometry import exp_so3, log_so3, quat_to_matrix
from radarloc.rio.preintegration import (
    imu_segment,
    interpolate_imu,
    predict_state,
    preintegrate,
)
from radarloc.rio.state import State
from radarloc.sim.imu import ImuData, ImuMeasurement


def _measurements(t, accel, gyro):
    return [ImuMeasurement(float(ti), np.asarray(a, float), np.asarray(w, float)) for ti, a, w in zip(t, accel, gyro)]


class TestInterpolation:
    def test_endpoint_exact(self):
        z0 = ImuMeasurement(0.0, np.array([0.0, 0.0, 9.81]), np.zeros(3))
        z1 = ImuMeasurement(0.1, np.array([0.1, 0.0, 9.81]), np.array([0.0, 0.0, 0.2]))
        out = interpolate_imu(z0, z1, 0.0)
        np.testing.assert_array_equal(out.accel, z0.accel)
        np.testing.assert_array_equal(out.gyro, z0.gyro)

    def test_midpoint(self):
        z0 = ImuMeasurement(0.0, np.array([0.0, 0.0, 9.81]), np.zeros(3))
        z1 = ImuMeasurement(0.1, np.array([0.1, 0.0, 9.81]), np.zeros(3))
        out = interpolate_imu(z0, z1, 0.05)
        np.testing.assert_allclose(out.accel, [0.05, 0.0, 9.81], atol=1e-15)

    def test_gyro_three_quarters(self):
        z0 = ImuMeasurement(0.0, np.zeros(3), np.zeros(3))
        z1 = ImuMeasurement(1.0, np.zeros(3), np.array([0.0, 0.0, 0.2]))
        out = interpolate_imu(z0, z1, 0.75)
        np.testing.assert_allclose(out.gyro, [0.0, 0.0, 0.15], atol=1e-15)

    def test_out_of_interval_rejected(self):
        z0 = ImuMeasurement(0.0, np.zeros(3), np.zeros(3))
        z1 = ImuMeasurement(0.1, np.zeros(3), np.zeros(3))
        with pytest.raises(ValueError):
            interpolate_imu(z0, z1, 0.2)
        with pytest.raises(ValueError):
            interpolate_imu(z1, z0, 0.05)


class TestSegment:
    def test_endpoints_interpolated(self):
        t = np.arange(11) / 100.0
        imu = ImuData(t, np.tile([0.0, 0.0, 9.81], (11, 1)), np.outer(t, [0.0, 0.0, 1.0]))
        seg = imu_segment(imu, 0.013, 0.087)
        assert seg[0].t == pytest.approx(0.013)
        assert seg[-1].t == pytest.approx(0.087)
        np.testing.assert_allclose(seg[0].gyro, [0.0, 0.0, 0.013], atol=1e-12)
        assert all(seg[i].t < seg[i + 1].t for i in range(len(seg) - 1))

    def test_coverage_required(self):
        t = np.arange(5) / 100.0
        imu = ImuData(t, np.zeros((5, 3)), np.zeros((5, 3)))
        with pytest.raises(ValueError):
            imu_segment(imu, 0.0, 0.2)


class TestPreintegration:
    def test_stationary_prediction(self, imu_params):
        t = np.arange(0.0, 1.005, 0.005)
        samples = _measurements(t, np.tile([0.0, 0.0, 9.81], (len(t), 1)), np.zeros((len(t), 3)))
        pre = preintegrate(samples, np.zeros(3), np.zeros(3), imu_params)
        np.testing.assert_allclose(quat_to_matrix(pre.delta_q), np.eye(3), atol=1e-12)
        x0 = State.initial()
        x1 = predict_state(x0, pre)
        np.testing.assert_allclose(x1.v, np.zeros(3), atol=1e-9)
        np.testing.assert_allclose(x1.q, x0.q, atol=1e-12)

    def test_constant_yaw_rate_closed_form(self, imu_params):
        rate = 200.0
        t = np.arange(0.0, 1.0 + 0.5 / rate, 1.0 / rate)
        gyro = np.tile([0.0, 0.0, np.pi / 2.0], (len(t), 1))
        samples = _measurements(t, np.zeros((len(t), 3)), gyro)
        pre = preintegrate(samples, np.zeros(3), np.zeros(3), imu_params)
        expected = exp_so3(np.array([0.0, 0.0, np.pi / 2.0]))
        np.testing.assert_allclose(quat_to_matrix(pre.delta_q), expected, atol=1e-6)

    def test_matches_fine_direct_integration(self, imu_params):
        # oracle: direct midpoint integration of the same band-limited signal
        # sampled 10x faster
        rng = np.random.default_rng(12)
        for _ in range(5):
            freqs = rng.uniform(0.2, 2.0, size=(3, 3))
            phases = rng.uniform(0.0, 2.0 * np.pi, size=(3, 3))
            amp_w = rng.uniform(0.1, 0.8, size=3)
            amp_a = rng.uniform(0.2, 1.5, size=3)

            def gyro_at(tt):
                return amp_w * np.sin(2.0 * np.pi * freqs[0] * tt + phases[0])

            def accel_at(tt):
                return np.array([0.0, 0.0, 9.81]) + amp_a * np.sin(
                    2.0 * np.pi * freqs[1] * tt + phases[1]
                )

            t_coarse = np.arange(0.0, 1.0 + 1e-9, 1.0 / 200.0)
            samples = [
                ImuMeasurement(float(tt), accel_at(tt), gyro_at(tt)) for tt in t_coarse
            ]
            pre = preintegrate(samples, np.zeros(3), np.zeros(3), imu_params)

            dt = 1.0 / 2000.0
            t_fine = np.arange(0.0, 1.0 + 1e-9, dt)
            R = np.eye(3)
            dv = np.zeros(3)
            for t0, t1 in zip(t_fine[:-1], t_fine[1:]):
                w_mid = 0.5 * (gyro_at(t0) + gyro_at(t1))
                a_mid = 0.5 * (accel_at(t0) + accel_at(t1))
                R_mid = R @ exp_so3(0.5 * w_mid * dt)
                dv = dv + R_mid @ a_mid * dt
                R = R @ exp_so3(w_mid * dt)

            rot_err = np.linalg.norm(log_so3(quat_to_matrix(pre.delta_q).T @ R))
            assert rot_err < 1e-4
            assert np.linalg.norm(pre.delta_v - dv) < 1e-3

    def test_first_order_bias_correction_matches_reintegration(self, imu_params):
        rng = np.random.default_rng(3)
        samples = random_imu_segment(rng, duration=0.05)
        ba0 = rng.normal(scale=0.02, size=3)
        bg0 = rng.normal(scale=0.005, size=3)
        pre = preintegrate(samples, ba0, bg0, imu_params)
        dba = rng.normal(scale=2e-4, size=3)
        dbg = rng.normal(scale=2e-4, size=3)
        dq_c, dv_c, _ = pre.corrected(ba0 + dba, bg0 + dbg)
        exact = pre.reintegrated(ba0 + dba, bg0 + dbg)
        rot_err = np.linalg.norm(
            log_so3(quat_to_matrix(dq_c).T @ quat_to_matrix(exact.delta_q))
        )
        # first-order correction: truncation error is quadratic in the shift
        assert rot_err < 5e-6
        assert np.linalg.norm(dv_c - exact.delta_v) < 5e-6
        uncorrected = np.linalg.norm(pre.delta_v - exact.delta_v)
        assert np.linalg.norm(dv_c - exact.delta_v) < 0.1 * max(uncorrected, 1e-9)

    def test_rejects_non_monotone_times(self, imu_params):
        samples = _measurements([0.0, 0.01, 0.01], np.zeros((3, 3)), np.zeros((3, 3)))
        with pytest.raises(ValueError):
            preintegrate(samples, np.zeros(3), np.zeros(3), imu_params)

    def test_covariance_psd_and_grows(self, imu_params):
        rng = np.random.default_rng(4)
        samples = random_imu_segment(rng, duration=0.05)
        pre = preintegrate(samples, np.zeros(3), np.zeros(3), imu_params)
        eigvals = np.linalg.eigvalsh(pre.cov_rot_vel)
        assert np.all(eigvals >= -1e-15)
        assert np.trace(pre.cov_rot_vel) > 0.0
