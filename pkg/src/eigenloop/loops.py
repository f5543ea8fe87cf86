"""Closed polygonal loops in parameter space and the loop-file format.

Loop file::

    params 2
    0.0   1.0 0.0
    0.5   0.87758 0.47943
    ...
    6.2832 1.0 0.0      # last point repeats the first

Columns are ``t q1 ... qd``; ``t`` must increase strictly.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidLoop, LoopParseError

CLOSURE_TOL = 1e-12


@dataclass(frozen=True)
class LoopSpec:
    """Samples ``(t_k, Q_k)``, ``k = 0..N``, with ``Q_N`` identified with ``Q_0``."""

    t: np.ndarray
    q: np.ndarray
    closed: bool = True

    def __post_init__(self):
        t = np.array(self.t, dtype=float)
        q = np.array(self.q, dtype=float)
        if q.ndim == 1:
            q = q[:, None]
        if t.ndim != 1 or q.ndim != 2 or len(t) != len(q):
            raise InvalidLoop("t must be 1-D and q must have one row per t")
        if len(t) < 4:
            raise InvalidLoop(f"a loop needs at least 4 samples (N >= 3), got {len(t)}")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(q))):
            raise InvalidLoop("loop has non-finite samples")
        if np.any(np.diff(t) <= 0):
            raise InvalidLoop("t must be strictly increasing")
        if self.closed and np.max(np.abs(q[-1] - q[0])) > CLOSURE_TOL:
            raise InvalidLoop("loop is not closed: last point differs from the first")
        t.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "q", q)

    @property
    def d(self):
        return self.q.shape[1]

    @property
    def n_samples(self):
        return len(self.t)

    def reversed(self):
        return LoopSpec(self.t[-1] + self.t[0] - self.t[::-1], self.q[::-1])

    def doubled(self):
        """The same loop traversed twice."""
        period = self.t[-1] - self.t[0]
        return LoopSpec(np.concatenate([self.t, self.t[1:] + period]), np.concatenate([self.q, self.q[1:]]))

    def shifted(self, offset):
        """Same loop with basepoint moved to sample ``offset``."""
        m = self.n_samples - 1
        offset %= m
        idx = np.concatenate([np.arange(offset, m), np.arange(0, offset + 1)])
        period = self.t[-1] - self.t[0]
        t = np.concatenate([self.t[offset:m], self.t[: offset + 1] + period])
        q = self.q[idx]
        q[-1] = q[0]
        return LoopSpec(t, q)

    def refined(self):
        """Insert the chord midpoint of every step (halves all steps)."""
        t = np.empty(2 * self.n_samples - 1)
        q = np.empty((2 * self.n_samples - 1, self.d))
        t[::2], q[::2] = self.t, self.q
        t[1::2] = 0.5 * (self.t[:-1] + self.t[1:])
        q[1::2] = 0.5 * (self.q[:-1] + self.q[1:])
        return LoopSpec(t, q)

    def describe(self):
        return {"samples": int(self.n_samples), "d": int(self.d), "t_start": float(self.t[0]), "t_end": float(self.t[-1])}


def circle_loop(radius, samples, d=2, center=None, turns=1):
    """Counterclockwise circle in the (Q1, Q2) plane, other coordinates fixed.

    ``samples`` counts distinct points; the returned loop has ``samples + 1``
    entries with the last equal to the first.
    """
    if d < 2:
        raise InvalidLoop("a circle needs at least two parameter coordinates")
    if samples < 3:
        raise InvalidLoop("a circle needs at least 3 samples")
    c = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    if c.shape != (d,):
        raise InvalidLoop(f"center must have {d} coordinates")
    total = samples * turns
    theta = 2 * np.pi * np.arange(total + 1) / samples
    q = np.tile(c, (total + 1, 1))
    q[:, 0] += radius * np.cos(theta)
    q[:, 1] += radius * np.sin(theta)
    q[-1] = q[0]
    return LoopSpec(theta, q)


def curve_loop(func, samples, t_start=0.0, t_end=2 * np.pi):
    """Sample ``func(t) -> Q`` on a uniform grid; the endpoint is snapped to the start."""
    t = np.linspace(t_start, t_end, samples + 1)
    q = np.array([np.atleast_1d(func(x)) for x in t], dtype=float)
    q[-1] = q[0]
    return LoopSpec(t, q)


def polygon_loop(vertices, per_edge=16):
    """Closed polygon through ``vertices`` with ``per_edge`` samples per side.

    ``t`` is the cumulative arc length.
    """
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or len(v) < 3:
        raise InvalidLoop("a polygon needs at least 3 vertices")
    closed = np.vstack([v, v[:1]])
    pts = [closed[0]]
    for a, b in zip(closed[:-1], closed[1:]):
        for s in np.arange(1, per_edge + 1) / per_edge:
            pts.append(a + s * (b - a))
    q = np.array(pts)
    q[-1] = q[0]
    t = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(q, axis=0), axis=1))])
    return LoopSpec(t, q)


def parse_loop(text):
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if body:
            lines.append((lineno, body))
    if not lines:
        raise LoopParseError("empty loop file")
    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 2 or parts[0] != "params" or not parts[1].isdigit() or int(parts[1]) < 1:
        raise LoopParseError(f"line {lineno}: expected 'params <d>'")
    d = int(parts[1])
    rows = []
    for lineno, body in lines[1:]:
        fields = body.split()
        if len(fields) != d + 1:
            raise LoopParseError(f"line {lineno}: expected {d + 1} numbers, got {len(fields)}")
        try:
            rows.append([float(x) for x in fields])
        except ValueError as exc:
            raise LoopParseError(f"line {lineno}: {exc}") from None
    arr = np.array(rows, dtype=float).reshape(-1, d + 1)
    return LoopSpec(arr[:, 0], arr[:, 1:])


def load_loop(path):
    with open(path, encoding="utf-8") as fh:
        return parse_loop(fh.read())


def format_loop(loop: LoopSpec):
    out = [f"params {loop.d}"]
    for t, q in zip(loop.t, loop.q):
        out.append(" ".join(repr(float(x)) for x in (t, *q)))
    return "\n".join(out) + "\n"
