import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from eigenloop.errors import InvalidInput, NotARotation
from eigenloop.linalg import (
    axis_angle,
    eig_sym,
    gauge_columns,
    geodesic_interpolate,
    quat_to_so3,
    quats_to_so3,
    rotation_distance,
    rotation_from_axis_angle,
    so3_to_quat,
    sym_matrix,
)
from loopgen import random_rotation, t_tau2_frame

SQ2 = np.sqrt(2.0)


finite = st.floats(-10, 10, allow_nan=False)


@st.composite
def symmetric(draw):
    n = draw(st.integers(2, 8))
    a = draw(arrays(float, (n, n), elements=finite))
    return np.triu(a) + np.triu(a, 1).T


def test_diagonal_input():
    w, f = eig_sym(np.diag([1.0, 2.0]))
    assert np.allclose(w, [1, 2])
    assert np.array_equal(f, np.eye(2))


def test_t_tau2_at_x_axis():
    m = np.array([[0, 0, 0], [0, 0, -1.0], [0, -1.0, 0]])
    w, _ = eig_sym(m)
    assert np.allclose(w, [-1, 0, 1], atol=1e-14)


def test_e_epsilon_lowest_vector_at_theta_zero():
    w, f = eig_sym(np.diag([1.0, -1.0]))
    assert np.allclose(w, [-1, 1])
    assert np.allclose(f[:, 0], [0, 1])


def test_non_finite_rejected():
    with pytest.raises(InvalidInput):
        eig_sym(np.array([[np.nan, 0], [0, 1]]))


def test_sym_matrix_checks():
    with pytest.raises(InvalidInput):
        sym_matrix([[1, 2], [2.0000001, 1]])
    with pytest.raises(InvalidInput):
        sym_matrix(np.eye(9))
    m = sym_matrix([[1, 2], [2, 1]])
    assert not m.flags.writeable


@given(symmetric())
def test_eig_sym_properties(m):
    w, f = eig_sym(m)
    scale = max(np.linalg.norm(m), 1.0)
    assert np.all(np.diff(w) >= 0)
    assert np.allclose(f @ np.diag(w) @ f.T, m, atol=1e-9 * scale)
    assert np.allclose(f.T @ f, np.eye(len(m)), atol=1e-12)
    assert abs(np.linalg.det(f) - 1) < 1e-12
    assert np.allclose(w, np.linalg.eigvalsh(m), atol=1e-10 * scale)


def test_gauge_tie_goes_to_lowest_index():
    col = np.array([[-0.5], [0.5], [0.1]])
    assert np.allclose(gauge_columns(col)[:, 0], [0.5, -0.5, -0.1])


def test_determinant_fix_flips_last_column():
    m = np.diag([3.0, 1.0, 2.0])
    w, f = eig_sym(m)
    assert np.allclose(w, [1, 2, 3])
    assert abs(np.linalg.det(f) - 1) < 1e-12
    # all columns gauge positive except possibly the last
    assert f[1, 0] > 0 and f[2, 1] > 0


def test_axis_angle_identity():
    aa = axis_angle(np.eye(3))
    assert aa.phi == 0.0
    assert np.array_equal(aa.axis, [1, 0, 0])


def test_axis_angle_t_tau2_half_turn():
    assert abs(axis_angle(t_tau2_frame(np.pi / 2)).phi - np.pi) < 1e-12


def test_axis_angle_t_tau2_theta_zero():
    expected = np.arccos(-1 + 0.5 * (1 - 1 / SQ2))
    assert abs(axis_angle(t_tau2_frame(0.0)).phi - expected) < 1e-12
    assert abs(expected - 2.5936) < 1e-4


def test_axis_angle_half_turn_gauge():
    r = rotation_from_axis_angle(np.pi, [0, -1.0, 0])
    aa = axis_angle(r)
    assert abs(aa.phi - np.pi) < 1e-12
    assert np.allclose(aa.axis, [0, 1, 0])


def test_axis_angle_rejects_non_rotation():
    with pytest.raises(NotARotation):
        axis_angle(np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(NotARotation):
        axis_angle(np.eye(2))


@given(
    st.floats(0, np.pi),
    arrays(float, 3, elements=st.floats(-1, 1)).filter(lambda v: np.linalg.norm(v) > 0.1),
)
def test_axis_angle_round_trip(phi, axis):
    axis = axis / np.linalg.norm(axis)
    r = rotation_from_axis_angle(phi, axis)
    aa = axis_angle(r)
    assert abs(aa.phi - phi) < 1e-9
    assert abs(np.linalg.norm(aa.axis) - 1) < 1e-12
    assert np.allclose(rotation_from_axis_angle(aa.phi, aa.axis), r, atol=1e-9)
    if 1e-6 < phi < np.pi - 1e-6:
        assert np.allclose(aa.axis, axis, atol=1e-6)


def test_axis_angle_small_angle_accuracy():
    axis = np.array([1.0, 2.0, 2.0]) / 3
    r = rotation_from_axis_angle(1e-9, axis)
    aa = axis_angle(r)
    assert abs(aa.phi - 1e-9) < 1e-15
    assert np.allclose(aa.axis, axis, atol=1e-6)


def test_so3_to_quat_examples():
    assert np.allclose(so3_to_quat(np.eye(3)), [1, 0, 0, 0])
    q = so3_to_quat(np.diag([-1.0, -1.0, 1.0]))
    assert np.allclose(np.abs(q), [0, 0, 0, 1])
    q = so3_to_quat(t_tau2_frame(np.pi / 2))
    assert abs(q[0]) < 1e-12


def test_quat_to_so3_examples():
    assert np.allclose(quat_to_so3([1, 0, 0, 0]), np.eye(3))
    q = np.array([np.cos(np.pi / 4), 0, 0, np.sin(np.pi / 4)])
    assert np.allclose(quat_to_so3(q), [[0, -1, 0], [1, 0, 0], [0, 0, 1]])
    assert np.array_equal(quat_to_so3(q), quat_to_so3(-q))
    with pytest.raises(InvalidInput):
        quat_to_so3([1, 1, 0, 0])


@given(arrays(float, 4, elements=st.floats(-1, 1)).filter(lambda v: np.linalg.norm(v) > 0.1))
def test_quaternion_round_trip(q):
    q = q / np.linalg.norm(q)
    r = quat_to_so3(q)
    assert np.allclose(r.T @ r, np.eye(3), atol=1e-12)
    assert abs(np.linalg.det(r) - 1) < 1e-12
    p = so3_to_quat(r)
    assert min(np.linalg.norm(p - q), np.linalg.norm(p + q)) < 1e-9
    assert np.allclose(quats_to_so3(q), r)


def test_geodesic_interpolation(rng):
    a, b = random_rotation(rng), random_rotation(rng)
    mid = geodesic_interpolate(a, b, 0.5)
    d = rotation_distance(a, b)
    assert abs(rotation_distance(a, mid) - d / 2) < 1e-9
    assert abs(rotation_distance(mid, b) - d / 2) < 1e-9
    assert np.allclose(geodesic_interpolate(a, b, 1.0), b, atol=1e-9)
