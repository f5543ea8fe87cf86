import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eigenloop.errors import InvalidLoop, LoopParseError
from eigenloop.loops import LoopSpec, circle_loop, format_loop, parse_loop, polygon_loop


def test_circle_closes_exactly():
    loop = circle_loop(2.0, 16, d=3, center=(0, 0, 1.0))
    assert loop.n_samples == 17 and loop.d == 3
    assert np.array_equal(loop.q[-1], loop.q[0])
    assert np.allclose(loop.q[:, 2], 1.0)


def test_validation():
    with pytest.raises(InvalidLoop):
        LoopSpec([0, 1, 2], [[0], [1], [0]])
    with pytest.raises(InvalidLoop):
        LoopSpec([0, 1, 1, 2], [[0], [1], [2], [0]])
    with pytest.raises(InvalidLoop):
        LoopSpec([0, 1, 2, 3], [[0], [1], [2], [1e-9]])
    LoopSpec([0, 1, 2, 3], [[0], [1], [2], [1e-13]])


def test_reversed_doubled_shifted():
    loop = circle_loop(1.0, 8)
    r = loop.reversed()
    assert np.array_equal(r.q, loop.q[::-1])
    assert np.all(np.diff(r.t) > 0)
    dbl = loop.doubled()
    assert dbl.n_samples == 17 and np.array_equal(dbl.q[8], loop.q[0])
    s = loop.shifted(3)
    assert np.array_equal(s.q[0], loop.q[3]) and np.array_equal(s.q[-1], s.q[0])
    assert np.all(np.diff(s.t) > 0)


def test_refined_inserts_chord_midpoints():
    loop = circle_loop(1.0, 4)
    fine = loop.refined()
    assert fine.n_samples == 9
    assert np.allclose(fine.q[1], 0.5 * (loop.q[0] + loop.q[1]))


def test_polygon_arc_length():
    loop = polygon_loop([(0, 0), (1, 0), (1, 1)], per_edge=4)
    assert loop.n_samples == 13
    assert loop.t[-1] == pytest.approx(2 + np.sqrt(2))


@given(st.integers(4, 40), st.floats(0.1, 10), st.integers(2, 4))
def test_format_parse_round_trip(samples, radius, d):
    loop = circle_loop(radius, samples, d=d)
    back = parse_loop(format_loop(loop))
    assert np.array_equal(back.t, loop.t) and np.array_equal(back.q, loop.q)


@pytest.mark.parametrize(
    "text",
    [
        "",
        "param 2\n0 1 0\n",
        "params 2\n0 1 0\n1 0\n",
        "params 1\n0 1\n1 x\n",
    ],
)
def test_parse_errors(text):
    with pytest.raises(LoopParseError):
        parse_loop(text)


def test_parse_checks_closure():
    with pytest.raises(InvalidLoop):
        parse_loop("params 1\n0 0\n1 1\n2 2\n3 3\n")
    loop = parse_loop("params 1  # header\n0 0\n1 1\n\n2 2 # mid\n3 0\n")
    assert loop.n_samples == 4
