import numpy as np
import pytest

from eigenloop.errors import BlockLeakage, InvalidInput, StepTooLarge
from eigenloop.linalg import planar_rotation, rotation_from_axis_angle
from eigenloop.loops import circle_loop, curve_loop
from eigenloop.models import builtin_e_epsilon, builtin_g_g, builtin_t_tau2, constant_model
from eigenloop.transport import TransportConfig, transport
from eigenloop.topology import (
    NONTRIVIAL,
    TRIVIAL,
    classify,
    classify_frames,
    first_column_transform,
    lift_so3,
    piercing_parity,
    reduce_so4,
    winding_so2,
)
from loopgen import random_quaternion_path
from loopgen import t_tau2_frame

def GG(t):
    return (np.cos(t), np.sin(t), np.sin(t), np.cos(t))


def rotations(thetas):
    return np.array([planar_rotation(t) for t in thetas])


def test_winding_counterclockwise():
    th = np.linspace(0, 2 * np.pi, 33)
    assert winding_so2(rotations(th)) == 1
    assert winding_so2(rotations(-2 * th)) == -2
    assert winding_so2(np.repeat(np.eye(2)[None], 5, axis=0)) == 0


def test_winding_step_too_large():
    with pytest.raises(StepTooLarge) as info:
        winding_so2(rotations(np.linspace(0, 2 * np.pi, 4)))
    assert info.value.index == 0


def test_lift_examples():
    const = np.repeat(rotation_from_axis_angle(1.0, [0, 0, 1])[None], 6, axis=0)
    assert lift_so3(const)[1] == TRIVIAL
    th = np.linspace(0, 2 * np.pi, 257)
    frames = np.array([t_tau2_frame(t) for t in th])
    quats, cls = lift_so3(frames)
    assert cls == NONTRIVIAL
    assert np.allclose(quats[-1], -quats[0])
    assert lift_so3(np.concatenate([frames, frames[1:]]))[1] == TRIVIAL


def test_lift_step_too_large():
    frames = np.array([rotation_from_axis_angle(a, [0, 0, 1]) for a in (0, 1.7, 3.4, 0)])
    with pytest.raises(StepTooLarge):
        lift_so3(frames)


def test_piercing_single_crossing():
    th = 2 * np.pi * np.arange(1025) / 1024
    frames = np.array([t_tau2_frame(t) for t in th])
    frames[-1] = frames[0]
    p = piercing_parity(frames)
    assert p.count == 1 and p.z2 == NONTRIVIAL
    (step, _), = p.events
    assert step in (255, 256)


def test_piercing_double_crossing():
    # circle of radius 1 around (0, 2): the direction angle crosses pi/2 twice
    s = 2 * np.pi * np.arange(513) / 512
    alpha = np.arctan2(2 + np.sin(s), np.cos(s))
    frames = np.array([t_tau2_frame(a) for a in alpha])
    frames[-1] = frames[0]
    p = piercing_parity(frames)
    assert p.count == 2 and p.z2 == TRIVIAL
    assert lift_so3(frames)[1] == TRIVIAL


def test_piercing_constant_loop():
    frames = np.repeat(rotation_from_axis_angle(2.0, [1, 1, 0])[None], 8, axis=0)
    assert piercing_parity(frames).count == 0


@pytest.mark.parametrize("seed", range(20))
def test_piercing_agrees_with_lift(seed):
    rng = np.random.default_rng(seed)
    nontrivial = bool(seed % 2)
    frames = random_quaternion_path(rng, nontrivial)
    cls = lift_so3(frames)[1]
    assert cls == (NONTRIVIAL if nontrivial else TRIVIAL)
    assert piercing_parity(frames).z2 == cls


def test_first_column_transform(rng):
    for _ in range(10):
        f = rng.normal(size=4)
        f /= np.linalg.norm(f)
        t = first_column_transform(f)
        assert np.allclose(t @ t.T, np.eye(4), atol=1e-12)
        assert abs(np.linalg.det(t) - 1) < 1e-12
        assert np.allclose(t @ f, [1, 0, 0, 0], atol=1e-12)


def test_reduce_so4_identity_and_embedding():
    ident = np.repeat(np.eye(4)[None], 5, axis=0)
    assert np.allclose(reduce_so4(ident), np.eye(3))
    th = np.linspace(0, 2 * np.pi, 129)
    a = np.array([t_tau2_frame(t) for t in th])
    emb = np.zeros((len(a), 4, 4))
    emb[:, 0, 0] = 1
    emb[:, 1:, 1:] = a
    assert np.allclose(reduce_so4(emb), a)
    assert classify_frames(emb).z2 == NONTRIVIAL
    assert classify_frames(np.concatenate([emb, emb[1:]])).z2 == TRIVIAL


def test_reduce_so4_detects_leakage():
    bad = np.repeat(np.eye(4)[None], 3, axis=0)
    bad[1] = np.diag([1.0, 1.0, 1.0, 1.0]) * 1.001
    with pytest.raises(BlockLeakage) as info:
        reduce_so4(bad)
    assert info.value.index == 1


def test_classify_e_epsilon_large_loop():
    v = classify(builtin_e_epsilon(1, 1), circle_loop(100.0, 1024))
    assert v.degeneracy_implied and v.evidence == "NontrivialClass"
    assert v.homotopy.winding == -1


def test_classify_e_epsilon_small_loop():
    v = classify(builtin_e_epsilon(1, 1), circle_loop(0.1, 256))
    assert v.evidence == "SignChange" and v.homotopy.kind == "SignChangeOnly"


def test_classify_g_g():
    v = classify(builtin_g_g(1.0), curve_loop(GG, 512))
    assert v.evidence == "NontrivialClass"
    assert np.array_equal(v.result.sign_matrix, np.eye(4))


def test_classify_constant_and_limits():
    v = classify(constant_model(np.diag([0.0, 1.0, 2.0])), circle_loop(1.0, 8))
    assert not v.degeneracy_implied and v.evidence is None
    v = classify(constant_model(np.diag(np.arange(5.0))), circle_loop(1.0, 8))
    assert v.homotopy.kind == "Unsupported" and v.caveat and not v.degeneracy_implied
    with pytest.raises(InvalidInput):
        classify(constant_model(np.eye(1)), circle_loop(1.0, 8))


def test_orientation_and_refinement():
    m = builtin_e_epsilon(1, 1)
    loop = circle_loop(100.0, 512)
    assert classify(m, loop.reversed()).homotopy.winding == 1
    assert classify(m, loop.refined()).homotopy.winding == -1
    t = builtin_t_tau2()
    loop3 = circle_loop(1.0, 256, d=3)
    assert classify(t, loop3.reversed()).homotopy.z2 == NONTRIVIAL
    assert classify(t, loop3.refined()).homotopy.z2 == NONTRIVIAL


def test_classify_refines_coarse_loops():
    # a permissive overlap floor lets transport accept steps the lift rejects
    loop = curve_loop(GG, 5)
    cfg = TransportConfig(overlap_floor=0.3)
    res = transport(builtin_g_g(1.0), loop, cfg)
    assert np.allclose(np.linalg.det(res.frames), 1)
    with pytest.raises(StepTooLarge):
        classify_frames(res.frames)
    v = classify(builtin_g_g(1.0), loop, cfg)
    assert v.homotopy.z2 == NONTRIVIAL
    assert v.samples_used > res.n_samples


def test_cancelling_degeneracies_are_inconclusive():
    from gapscan import in_disc, min_gap, scan

    center, radius = (0.5, 0.866), 1.2
    v = classify(builtin_e_epsilon(1, 1), circle_loop(radius, 512, center=center))
    assert not v.degeneracy_implied and v.homotopy.winding == 0
    assert np.array_equal(v.result.sign_matrix, np.eye(2))
    # the disc still holds two conical points; scan each half separately
    inside = in_disc(center, radius)
    left = scan(builtin_e_epsilon(1, 1), lambda xy: xy, lambda xy: inside(xy) & (xy[:, 0] < 0.5), ((-0.7, 0.5), (-0.4, 2.1)))
    right = scan(builtin_e_epsilon(1, 1), lambda xy: xy, lambda xy: inside(xy) & (xy[:, 0] >= 0.5), ((0.5, 1.7), (-0.4, 2.1)))
    assert left[0] < 1e-6 and right[0] < 1e-6
    assert np.linalg.norm(left[1] - right[1]) > 1.0
    assert min_gap(builtin_e_epsilon(1, 1), [(1.0, np.sqrt(3))])[0] < 1e-12
