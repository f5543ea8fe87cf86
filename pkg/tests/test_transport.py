import numpy as np
import pytest

from eigenloop.errors import GapCollapse, InvalidLoop, RefinementExhausted
from eigenloop.loops import circle_loop, polygon_loop
from eigenloop.models import builtin_e_epsilon, builtin_g_g, builtin_t_tau2, constant_model
from eigenloop.transport import TransportConfig, sign_pattern, transport


def gg_loop(samples=512, offset=0.0):
    from eigenloop.loops import curve_loop

    return curve_loop(lambda t: (offset + np.cos(t), np.sin(t), np.sin(t), np.cos(t)), samples)


def check_invariants(res):
    assert np.allclose(np.linalg.det(res.frames), 1.0, atol=1e-12)
    eye = np.eye(res.n)
    assert np.allclose(np.einsum("kji,kjl->kil", res.frames, res.frames), eye, atol=1e-12)
    assert np.all(np.diff(res.eigenvalues, axis=1) > 0)
    assert np.all(res.step_overlaps >= 0.9)
    d = np.diag(res.sign_matrix)
    assert set(d) <= {-1.0, 1.0} and np.prod(d) == 1


def test_constant_model():
    res = transport(constant_model(np.diag([1.0, 2, 3])), circle_loop(1.0, 16))
    check_invariants(res)
    assert np.array_equal(sign_pattern(res), np.eye(3))
    assert np.all(res.frames == res.frames[0])


def test_e_epsilon_small_loop_flips_both():
    res = transport(builtin_e_epsilon(1, 1), circle_loop(0.1, 256))
    check_invariants(res)
    assert np.array_equal(sign_pattern(res), -np.eye(2))
    assert res.sign_change


def test_e_epsilon_large_loop_keeps_signs():
    res = transport(builtin_e_epsilon(1, 1), circle_loop(100.0, 1024))
    check_invariants(res)
    assert np.array_equal(sign_pattern(res), np.eye(2))


def test_t_tau2_off_origin_keeps_signs():
    res = transport(builtin_t_tau2(), circle_loop(1.0, 256, d=3, center=(0.5, 2.0, 0.0)))
    check_invariants(res)
    assert np.array_equal(sign_pattern(res), np.eye(3))


@pytest.mark.parametrize(
    "model, loop",
    [
        (builtin_e_epsilon(1, 1), circle_loop(0.1, 64)),
        (builtin_e_epsilon(1, 1), circle_loop(100.0, 512)),
        (builtin_t_tau2(), circle_loop(1.0, 128, d=3)),
        (builtin_g_g(1.0), gg_loop(256)),
    ],
)
def test_refinement_reversal_and_shift_invariance(model, loop):
    d = np.diag(transport(model, loop).sign_matrix)
    assert np.array_equal(np.diag(transport(model, loop.refined()).sign_matrix), d)
    assert np.array_equal(np.diag(transport(model, loop.reversed()).sign_matrix), d)
    for offset in (1, loop.n_samples // 3):
        shifted = np.diag(transport(model, loop.shifted(offset)).sign_matrix)
        assert np.array_equal(shifted == 1, d == 1)


def test_coarse_loop_is_bisected():
    res = transport(builtin_e_epsilon(1, 1), circle_loop(0.5, 6))
    check_invariants(res)
    assert res.refinements > 0 and res.max_depth_used >= 1
    assert res.n_samples == 7 + res.refinements


def test_refinement_exhausted():
    with pytest.raises(RefinementExhausted):
        transport(builtin_e_epsilon(1, 1), circle_loop(0.5, 4), TransportConfig(max_refinement_depth=0))


def test_gap_collapse_reports_t():
    loop = polygon_loop([(-1, 0), (1, 0), (1, 1)], per_edge=4)
    with pytest.raises(GapCollapse) as info:
        transport(builtin_e_epsilon(1, 1), loop)
    assert info.value.t == pytest.approx(1.0)


def test_dimension_mismatch():
    with pytest.raises(InvalidLoop):
        transport(builtin_t_tau2(), circle_loop(1.0, 16))


def test_config_validation():
    for kwargs in ({"overlap_floor": 1.0}, {"max_refinement_depth": -1}, {"gap_floor": 0.0}):
        with pytest.raises(ValueError):
            TransportConfig(**kwargs)


def test_concentric_t_tau2_frames_agree():
    a = transport(builtin_t_tau2(), circle_loop(1.0, 64, d=3))
    b = transport(builtin_t_tau2(), circle_loop(3.0, 64, d=3))
    assert np.allclose(a.frames, b.frames, atol=1e-12)
    assert np.allclose(3 * a.eigenvalues, b.eigenvalues, atol=1e-12)
