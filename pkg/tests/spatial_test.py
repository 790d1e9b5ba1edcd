import numpy as np
import pytest

import scenerag as sr


def _hamilton(a, b):
    """product of two (x, y, z, w) quaternions"""
    ax, ay, az, aw = a
    bx, by, bz, bw = b
    return np.array([aw*bx + ax*bw + ay*bz - az*by,
                        aw*by - ax*bz + ay*bw + az*bx,
                        aw*bz + ax*by - ay*bx + az*bw,
                        aw*bw - ax*bx - ay*by - az*bz])


def _conjugation_oracle(p_o, position, q):
    """rotates p_o - p_u into the user frame as q* (0, d) q"""
    q = np.asarray(q, dtype=np.float64)
    q = q / np.linalg.norm(q)
    conj = q * np.array([-1.0, -1.0, -1.0, 1.0])
    d = np.append(np.asarray(p_o) - np.asarray(position), 0.0)
    return _hamilton(_hamilton(conj, d), q)[:3]


################################################################################
def test_relative_position_matches_conjugation_oracle():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        p_o = rng.uniform(-20, 20, size=3)
        pose = sr.UserPose(position=rng.uniform(-20, 20, size=3), orientation=rng.normal(size=4))
        rel = sr.relative_position(p_o, pose)
        expected = _conjugation_oracle(p_o, pose.position, pose.orientation)
        assert np.allclose(rel.quantitative, expected, rtol=0, atol=1e-9)
        assert abs(rel.distance - np.linalg.norm(p_o - np.asarray(pose.position))) < 1e-9
        assert abs(np.linalg.norm(rel.quantitative) - rel.distance) < 1e-9


def test_rotation_matrix_is_a_rotation():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        q = rng.normal(size=4)
        q /= np.linalg.norm(q)
        R = sr.quat_to_rotation_matrix(q)
        assert np.allclose(R.T @ R, np.eye(3), rtol=0, atol=1e-9)
        assert abs(np.linalg.det(R) - 1.0) < 1e-9


def test_rotation_matrix_ignores_scale_and_sign():
    q = np.array([0.1, -0.4, 0.3, 0.8])
    R = sr.quat_to_rotation_matrix(q)
    assert np.allclose(sr.quat_to_rotation_matrix(5 * q), R, atol=1e-12)
    assert np.allclose(sr.quat_to_rotation_matrix(-q), R, atol=1e-12)


def test_identity_rotation():
    assert np.array_equal(sr.quat_to_rotation_matrix((0, 0, 0, 1)), np.eye(3))


def test_degenerate_quaternion():
    with pytest.raises(sr.DegenerateQuaternionError):
        sr.quat_to_rotation_matrix((0, 0, 0, 0))
    with pytest.raises(sr.DegenerateQuaternionError):
        sr.UserPose(orientation=(0, 0, 0, 0))


def test_non_finite_input():
    with pytest.raises(sr.NonFiniteInputError):
        sr.euclidean_distance((np.nan, 0, 0), (0, 0, 0))
    with pytest.raises(sr.NonFiniteInputError):
        sr.euclidean_distance((0, 0), (0, 0, 0))


def test_euclidean_distance():
    assert sr.euclidean_distance((3, 4, 0), (0, 0, 0)) == 5.0
    assert sr.euclidean_distance((1, 2, 3), (1, 2, 3)) == 0.0
    a, b = (1.5, -2.0, 0.25), (-3.0, 4.0, 1.0)
    assert sr.euclidean_distance(a, b) == sr.euclidean_distance(b, a)


################################################################################
#                            qualitative directions
################################################################################
@pytest.mark.parametrize("local,expected", [
    ((1.0, 1.0, 0.0), "front right"),
    ((-1.0, 1.0, 0.0), "front left"),
    ((1.0, -1.0, 0.0), "back right"),
    ((0.0, 2.0, 5.0), "front"),
    ((0.0, -2.0, 0.0), "back"),
    ((-3.0, 0.0, 0.0), "left"),
    ((-2.0, -3.0, 0.0), "back left"),
    ((0.0, 0.0, 4.0), "at the player's position"),
    ((1e-12, -1e-12, 0.0), "at the player's position"),
])
def test_qualitative_direction(local, expected):
    assert sr.qualitative_direction(local) == expected


@pytest.mark.parametrize("local", [(1.0, 1.0, 0.0), (-2.0, -3.0, 0.0), (0.0, 2.0, 5.0), (-3.0, 0.5, 1.0)])
@pytest.mark.parametrize("scale", [1e-3, 0.5, 7.0, 1e4])
def test_direction_ignores_distance(local, scale):
    assert sr.qualitative_direction(np.multiply(local, scale)) == sr.qualitative_direction(local)


def test_direction_follows_user_yaw():
    # a quarter turn about z maps the user's local +y onto global -x
    yaw = np.pi / 2
    pose = sr.UserPose(position=(0, 0, 0), orientation=(0, 0, np.sin(yaw / 2), np.cos(yaw / 2)))
    rel = sr.relative_position((-2.0, 0.0, 0.0), pose)
    assert np.allclose(rel.quantitative, (0.0, 2.0, 0.0), atol=1e-12)
    assert rel.qualitative == "front"
    assert rel.describe("clock_1") == "clock_1 is at the front of the player"


def test_coincident_object():
    rel = sr.relative_position((1.0, 2.0, 3.0), sr.UserPose(position=(1.0, 2.0, 0.0)))
    assert rel.coincident
    assert rel.describe("lamp_1") == "lamp_1 is at the player's position"
