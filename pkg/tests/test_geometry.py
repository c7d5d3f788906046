import numpy as np
import pytest

from radarloc import geometry as geo


def test_skew_definition():
    S = geo.skew(np.array([1.0, 2.0, 3.0]))
    expected = np.array([[0.0, -3.0, 2.0], [3.0, 0.0, -1.0], [-2.0, 1.0, 0.0]])
    np.testing.assert_array_equal(S, expected)


def test_skew_zero_vector():
    np.testing.assert_array_equal(geo.skew(np.zeros(3)), np.zeros((3, 3)))


def test_skew_matches_cross_product():
    rng = np.random.default_rng(0)
    for _ in range(20):
        v, w = rng.normal(size=3), rng.normal(size=3)
        np.testing.assert_allclose(geo.skew(v) @ w, np.cross(v, w), atol=1e-12)
        assert np.allclose(geo.skew(v), -geo.skew(v).T)


def test_skew_self_cross_is_zero():
    v = np.array([0.3, -1.2, 2.0])
    np.testing.assert_allclose(geo.skew(v) @ v, np.zeros(3), atol=1e-15)


def test_quat_error_identical():
    q = geo.quat_from_axis_angle([0.0, 0.0, 1.0], 0.7)
    np.testing.assert_allclose(geo.quat_error_vec(q, q), np.zeros(3), atol=1e-12)


def test_quat_error_small_yaw():
    # oracle: error magnitude is 2*sin(theta/2) about the rotation axis
    theta = np.deg2rad(2.0)
    q_est = geo.quat_from_axis_angle([0.0, 0.0, 1.0], theta)
    err = geo.quat_error_vec(q_est, geo.quat_identity())
    np.testing.assert_allclose(err, [0.0, 0.0, 2.0 * np.sin(theta / 2.0)], atol=1e-12)
    np.testing.assert_allclose(err, [0.0, 0.0, 0.0349], atol=1e-4)


def test_quat_error_antipodal():
    q = geo.quat_from_axis_angle([0.2, -0.5, 0.8], 1.1)
    np.testing.assert_allclose(geo.quat_error_vec(-q, q), np.zeros(3), atol=1e-12)


def test_bearing_axes():
    assert geo.bearing(np.array([1.0, 0.0, 3.7])) == 0.0
    assert geo.bearing(np.array([0.0, 1.0, 0.0])) == pytest.approx(np.pi / 2)
    assert geo.bearing(np.array([-1.0, -1.0, 0.0])) == pytest.approx(-3.0 * np.pi / 4)


def test_bearing_degenerate_raises():
    with pytest.raises(geo.DegenerateBearingError):
        geo.bearing(np.array([0.0, 0.0, 1.0]))


def test_wrap_angle_range():
    angles = np.array([-4.0 * np.pi, -np.pi, 0.0, np.pi, 3.5 * np.pi, 6.0])
    wrapped = geo.wrap_angle(angles)
    assert np.all(wrapped > -np.pi) and np.all(wrapped <= np.pi)
    assert geo.wrap_angle(np.pi) == pytest.approx(np.pi)
    assert geo.wrap_angle(-np.pi) == pytest.approx(np.pi)
    assert geo.wrap_angle(2.0 * np.pi + 0.1) == pytest.approx(0.1)


def test_quat_matrix_round_trip():
    rng = np.random.default_rng(1)
    for _ in range(200):
        q = geo.quat_canonical(geo.quat_normalize(rng.normal(size=4)))
        q_back = geo.quat_from_matrix(geo.quat_to_matrix(q))
        assert min(np.linalg.norm(q - q_back), np.linalg.norm(q + q_back)) < 1e-9


def test_quat_mul_matches_matrix_product():
    rng = np.random.default_rng(2)
    for _ in range(50):
        qa = geo.quat_normalize(rng.normal(size=4))
        qb = geo.quat_normalize(rng.normal(size=4))
        Rab = geo.quat_to_matrix(geo.quat_normalize(geo.quat_mul(qa, qb)))
        np.testing.assert_allclose(Rab, geo.quat_to_matrix(qa) @ geo.quat_to_matrix(qb), atol=1e-12)


def test_product_matrices():
    rng = np.random.default_rng(3)
    for _ in range(20):
        qa = geo.quat_normalize(rng.normal(size=4))
        qb = geo.quat_normalize(rng.normal(size=4))
        np.testing.assert_allclose(geo.quat_left_mat(qa) @ qb, geo.quat_mul(qa, qb), atol=1e-12)
        np.testing.assert_allclose(geo.quat_right_mat(qb) @ qa, geo.quat_mul(qa, qb), atol=1e-12)


def test_exp_log_so3_round_trip():
    rng = np.random.default_rng(4)
    for _ in range(100):
        rotvec = rng.normal(size=3)
        rotvec *= rng.uniform(0.0, 3.0) / max(np.linalg.norm(rotvec), 1e-12)
        np.testing.assert_allclose(geo.log_so3(geo.exp_so3(rotvec)), rotvec, atol=1e-8)


def test_quat_exp_matches_exp_so3():
    rng = np.random.default_rng(5)
    for _ in range(50):
        rotvec = 0.5 * rng.normal(size=3)
        np.testing.assert_allclose(
            geo.quat_to_matrix(geo.quat_exp(rotvec)), geo.exp_so3(rotvec), atol=1e-12
        )


def test_retract_local_error_inverse():
    rng = np.random.default_rng(6)
    for _ in range(50):
        q = geo.quat_canonical(geo.quat_normalize(rng.normal(size=4)))
        dtheta = 0.2 * rng.normal(size=3)
        err = geo.quat_local_error(geo.retract(q, dtheta), q)
        # local error returns 2*sin(|d|/2)*axis; compare against that form
        angle = np.linalg.norm(dtheta)
        expected = dtheta * (2.0 * np.sin(angle / 2.0) / angle)
        np.testing.assert_allclose(err, expected, atol=1e-9)


def test_transform_composition_matches_matrix_oracle():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        qa = geo.quat_normalize(rng.normal(size=4))
        qb = geo.quat_normalize(rng.normal(size=4))
        a = geo.RigidTransform.from_parts(qa, rng.normal(size=3))
        b = geo.RigidTransform.from_parts(qb, rng.normal(size=3))
        np.testing.assert_allclose((a @ b).as_matrix(), a.as_matrix() @ b.as_matrix(), atol=1e-9)


def test_transform_inverse_identity():
    rng = np.random.default_rng(8)
    for _ in range(100):
        a = geo.RigidTransform.from_parts(geo.quat_normalize(rng.normal(size=4)), rng.normal(size=3))
        ident = a @ a.inverse()
        np.testing.assert_allclose(ident.as_matrix(), np.eye(4), atol=1e-9)


def test_transform_apply_batch():
    a = geo.RigidTransform.from_parts(geo.quat_from_axis_angle([0, 0, 1], 0.3), np.array([1.0, 2.0, 3.0]))
    pts = np.random.default_rng(9).normal(size=(17, 3))
    batch = a.apply(pts)
    for i in range(len(pts)):
        np.testing.assert_allclose(batch[i], a.apply(pts[i]), atol=1e-12)


def test_frame_tags_checked():
    imu_from_radar = geo.RigidTransform.identity(dst=geo.IMU_FRAME, src=geo.radar_frame(0))
    global_from_imu = geo.RigidTransform.identity(dst=geo.GLOBAL_FRAME, src=geo.IMU_FRAME)
    chained = global_from_imu @ imu_from_radar
    assert chained.dst == geo.GLOBAL_FRAME and chained.src == geo.radar_frame(0)
    with pytest.raises(geo.FrameMismatchError):
        _ = imu_from_radar @ global_from_imu


def test_slerp_endpoints_and_midpoint():
    q0 = geo.quat_identity()
    q1 = geo.quat_from_axis_angle([0, 0, 1], 1.0)
    np.testing.assert_allclose(geo.quat_slerp(q0, q1, 0.0), q0, atol=1e-12)
    np.testing.assert_allclose(geo.quat_slerp(q0, q1, 1.0), q1, atol=1e-12)
    mid = geo.quat_slerp(q0, q1, 0.5)
    np.testing.assert_allclose(geo.quat_yaw(mid), 0.5, atol=1e-12)
