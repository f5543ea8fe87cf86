"""Nondegenerate extension of boundary eigendata over the unit disc.

Given eigenframes ``F(theta)`` and strictly ordered eigenvalues
``lambda_i(theta)`` on the unit circle, with ``F`` a contractible loop in
SO(n), this module builds

    H(rho, theta) = F~(rho, theta) diag(lambda~(rho, theta)) F~(rho, theta)^T

on a polar grid.  ``lambda~`` linearly blends the boundary eigenvalues into
fixed anchors ``A_1 < ... < A_n`` at the centre.  ``F~`` is a homotopy from the
boundary loop to a constant frame.  It is built by curve shortening of the
lifted loop on the 3-sphere, followed by a geodesic pull to the basepoint.
For ``rho > 1`` the extension is constant in ``rho``.
"""

import csv
import io
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InvalidInput, InvalidLoop, NotTrivial, ShorteningStalled, StepTooLarge
from .linalg import quats_to_so3
from .topology import NONTRIVIAL, first_column_transform, lift_so3, reduce_so4, winding_so2
from .transport import TransportResult

# Fraction of the rho range spent on the geodesic pull to the basepoint; the
# outer part (rho > _SPLIT) replays the shortening flow.
_SPLIT = 0.5
_MAX_TABLE_STEP = np.pi / 4


@dataclass(frozen=True)
class BoundaryData:
    theta: np.ndarray  # (K,) strictly increasing in [0, 2 pi)
    frames: np.ndarray  # (K, n, n)
    eigenvalues: np.ndarray  # (K, n)

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=float)
        fr = np.asarray(self.frames, dtype=float)
        ev = np.asarray(self.eigenvalues, dtype=float)
        if th.ndim != 1 or fr.shape[0] != len(th) or ev.shape[0] != len(th):
            raise InvalidInput("theta, frames and eigenvalues must have matching lengths")
        if len(th) < 3:
            raise InvalidInput("boundary data needs at least 3 samples")
        if np.any(np.diff(th) <= 0) or th[0] < 0 or th[-1] >= 2 * np.pi:
            raise InvalidInput("theta must increase strictly within [0, 2 pi)")
        if np.any(np.diff(ev, axis=1) <= 0):
            raise InvalidInput("boundary eigenvalues must be strictly increasing at every theta")
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "frames", fr)
        object.__setattr__(self, "eigenvalues", ev)

    @property
    def n(self):
        return self.frames.shape[1]

    @classmethod
    def from_transport(cls, res: TransportResult):
        """Boundary data from a transport run, with ``t`` rescaled to ``[0, 2 pi)``."""
        if res.sign_change:
            raise NotTrivial("eigenvectors change sign around the loop; the frame path is not closed")
        t = res.t
        theta = 2 * np.pi * (t[:-1] - t[0]) / (t[-1] - t[0])
        return cls(theta, res.frames[:-1], res.eigenvalues[:-1])

    def hamiltonians(self):
        return np.einsum("kij,kj,klj->kil", self.frames, self.eigenvalues, self.frames)

    def closed_frames(self):
        return np.concatenate([self.frames, self.frames[:1]])


def default_anchors(n):
    return np.arange(1, n + 1) - (n + 1) / 2


def _check_anchors(anchors, n):
    a = np.asarray(anchors, dtype=float)
    if a.shape != (n,):
        raise InvalidInput(f"need {n} anchors, got shape {a.shape}")
    if np.any(np.diff(a) <= 0):
        raise InvalidInput("anchors must be strictly increasing")
    return a


def interpolate_eigenvalues(b: BoundaryData, anchors, rho, theta):
    """``rho * lambda(theta) + (1 - rho) * A``.

    Between boundary samples ``lambda(theta)`` is interpolated linearly
    (periodically), which keeps the ordering strict.
    """
    a = _check_anchors(anchors, b.n)
    th = np.concatenate([b.theta, [b.theta[0] + 2 * np.pi]])
    ev = np.concatenate([b.eigenvalues, b.eigenvalues[:1]])
    x = float(theta) % (2 * np.pi)
    if x < b.theta[0]:
        x += 2 * np.pi
    lam = np.array([np.interp(x, th, ev[:, i]) for i in range(b.n)])
    return rho * lam + (1 - rho) * a


# ---------------------------------------------------------------------------
# Contraction of loops on the 3-sphere
# ---------------------------------------------------------------------------


def _slerp(p0, p, s):
    """Geodesic from ``p0`` (s=0) to each row of ``p`` (s=1)."""
    dots = np.clip(p @ p0, -1.0, 1.0)
    omega = np.arccos(dots)
    out = np.empty_like(p)
    small = omega < 1e-12
    out[small] = p[small]
    om = omega[~small]
    so = np.sin(om)
    out[~small] = (np.sin((1 - s) * om) / so)[:, None] * p0 + (np.sin(s * om) / so)[:, None] * p[~small]
    return out / np.linalg.norm(out, axis=1)[:, None]


def _tilt_direction(p):
    """Unit vector least represented in the span of the loop points."""
    _, _, vt = np.linalg.svd(p, full_matrices=True)
    e = vt[-1]
    return e if e[np.argmax(np.abs(e))] > 0 else -e


def _tilted(p, eps, direction):
    bump = np.sin(np.pi * np.arange(len(p)) / len(p))
    out = p + eps * bump[:, None] * direction[None, :]
    return out / np.linalg.norm(out, axis=1)[:, None]


def _run_shortening(p, max_iter):
    check_every = max(8, len(p) // 4)
    _, total, status, _, progress = _kernels.shorten_loop(p, max_iter, check_every)
    return total, status, progress, check_every


def contract_sphere_loop(points, rho, split=_SPLIT, max_iter=None):
    """Basepoint-preserving null-homotopy of a closed loop of unit vectors.

    ``points`` holds distinct samples (the closing repeat omitted) with the
    basepoint at index 0.  Returns an array ``(len(rho), K, dim)`` whose slice
    at ``rho = 1`` is the input and at ``rho = 0`` the constant basepoint.

    Moving inward from ``rho = 1`` the homotopy runs the shortening flow until
    the loop fits in an open hemisphere, then pulls every point along its
    geodesic to the basepoint over ``rho < split``.  Inside the shortening
    stage ``rho`` is proportional to the accumulated displacement, not to the
    iteration count.  A loop the flow cannot move (a great circle is a
    fixed point) is first tilted off its plane by a bump that vanishes at the
    basepoint.
    """
    p = np.asarray(points, dtype=float)
    rho = np.asarray(rho, dtype=float)
    k = len(p)
    if max_iter is None:
        max_iter = 40 * k * k + 10_000
    tilt = None
    start = p
    total, status, progress, check_every = _run_shortening(p, max_iter)
    if status == _kernels.STALLED:
        tilt = _tilt_direction(p)
        start = _tilted(p, 1.0, tilt)
        total, status, progress, check_every = _run_shortening(start, max_iter)
    if status != _kernels.CONVERGED:
        raise ShorteningStalled(
            f"curve shortening did not bring the loop inside a hemisphere after {total} iterations"
        )

    # rho in [tilt_lo, 1]: tilt; [split, tilt_lo]: shortening; [0, split]: geodesic pull
    tilt_lo = 1.0 - 0.2 * (1.0 - split) if tilt is not None else 1.0
    iters = np.arange(len(progress) + 1) * check_every
    cum = np.concatenate([[0.0], np.cumsum(progress)])
    shorten_rho = (rho >= split) & (rho <= tilt_lo)
    u = np.where(shorten_rho, (tilt_lo - rho) / (tilt_lo - split), 0.0)
    tau = np.interp(u * cum[-1], cum, iters) if cum[-1] > 0 else np.zeros_like(u)
    tau = np.where(shorten_rho, tau, 0.0)
    tau[rho < split] = total
    need = np.unique(np.concatenate([np.floor(tau), np.ceil(tau), [0, total]]).astype(np.int64))
    snaps, _, _, _, _ = _kernels.shorten_loop(start, total, check_every, need)
    by_iter = dict(zip(need.tolist(), snaps))
    final = by_iter[total]

    out = np.empty((len(rho), k, p.shape[1]))
    for j, r in enumerate(rho):
        if r > tilt_lo:
            out[j] = _tilted(p, (1.0 - r) / (1.0 - tilt_lo), tilt)
        elif r >= split:
            lo = int(np.floor(tau[j]))
            hi = int(np.ceil(tau[j]))
            f = tau[j] - lo
            mix = (1 - f) * by_iter[lo] + f * by_iter[hi]
            out[j] = mix / np.linalg.norm(mix, axis=1)[:, None]
        else:
            out[j] = _slerp(p[0], final, r / split)
    if rho[-1] == 1.0:
        out[-1] = p
    return out


def _so3_distance_from_quats(a, b):
    return 2 * np.arccos(np.clip(np.abs(np.einsum("...i,...i->...", a, b)), 0.0, 1.0))


def _contract_so3(frames, rho):
    quats, cls = lift_so3(np.concatenate([frames, frames[:1]]))
    if cls == NONTRIVIAL:
        raise NotTrivial("frame loop is nontrivial in SO(3); no nondegenerate extension exists")
    table = contract_sphere_loop(quats[:-1], rho)
    _check_steps(_so3_distance_from_quats(table[1:], table[:-1]), "rho")
    _check_steps(_so3_distance_from_quats(table, np.roll(table, -1, axis=1)), "theta")
    return quats_to_so3(table / np.linalg.norm(table, axis=-1, keepdims=True))


def _check_steps(dist, direction):
    worst = float(np.max(dist)) if dist.size else 0.0
    if worst > _MAX_TABLE_STEP:
        raise InvalidInput(
            f"homotopy table step of {worst:.3f} rad along {direction} exceeds pi/4; use a finer grid"
        )


def contract_frame_loop(b: BoundaryData, rho_nodes=64):
    """Homotopy table ``F~[j, k]`` at ``rho = linspace(0, 1, rho_nodes)[j]``, ``theta_k``.

    Row ``-1`` reproduces the boundary frames; row ``0`` is constant.
    Raises :class:`NotTrivial` for a noncontractible loop.
    """
    rho = np.linspace(0.0, 1.0, int(rho_nodes))
    if len(rho) < 2:
        raise InvalidInput("need at least two rho nodes")
    n = b.n
    frames = b.frames
    if n == 2:
        try:
            w = winding_so2(b.closed_frames())
        except (StepTooLarge, InvalidLoop) as exc:
            raise InvalidInput(f"boundary frames are not a resolvable SO(2) loop: {exc}") from exc
        if w != 0:
            raise NotTrivial(f"frame loop winds {w} times; no nondegenerate extension exists")
        c = frames[:, :, 0]
        inc = np.arctan2(c[:-1, 0] * c[1:, 1] - c[:-1, 1] * c[1:, 0], np.einsum("ij,ij->i", c[:-1], c[1:]))
        alpha = np.arctan2(c[0, 1], c[0, 0]) + np.concatenate([[0.0], np.cumsum(inc)])
        angles = rho[:, None] * alpha[None, :] + (1 - rho[:, None]) * alpha[0]
        table = np.empty((len(rho), len(alpha), 2, 2))
        cos, sin = np.cos(angles), np.sin(angles)
        table[..., 0, 0] = cos
        table[..., 0, 1] = -sin
        table[..., 1, 0] = sin
        table[..., 1, 1] = cos
        # keep the boundary row bit-identical to the input
        table[-1] = frames
        return rho, table
    if n == 3:
        table = _contract_so3(frames, rho)
        table[-1] = frames
        return rho, table
    if n == 4:
        reduced = reduce_so4(np.concatenate([frames, frames[:1]]))[:-1]
        a_table = _contract_so3(reduced, rho)
        f_table = contract_sphere_loop(frames[:, :, 0], rho)
        blocks = np.zeros(a_table.shape[:2] + (4, 4))
        blocks[..., 0, 0] = 1.0
        blocks[..., 1:, 1:] = a_table
        t_mats = first_column_transform(np.moveaxis(f_table, -1, 0))
        # first_column_transform stacks as (4, 4, J, K); bring the grid axes first
        t_mats = np.moveaxis(t_mats, (0, 1), (-2, -1))
        table = np.einsum("jkli,jklm->jkim", t_mats, blocks)
        table[-1] = frames
        return rho, table
    raise InvalidInput(f"no contraction available for SO({n})")


# ---------------------------------------------------------------------------
# Extension on the disc
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscHamiltonian:
    rho: np.ndarray  # (J,) from 0 to 1
    theta: np.ndarray  # (K,)
    matrices: np.ndarray  # (J, K, n, n)
    anchors: np.ndarray  # (n,)

    @property
    def n(self):
        return self.matrices.shape[-1]

    def evaluate(self, rho, theta):
        """Bilinear interpolation between nodes; ``rho > 1`` is clamped to 1."""
        r = min(max(float(rho), 0.0), 1.0)
        x = float(theta) % (2 * np.pi)
        th = np.concatenate([self.theta, [self.theta[0] + 2 * np.pi]])
        if x < th[0]:
            x += 2 * np.pi
        k = int(np.searchsorted(th, x, side="right") - 1)
        k = min(k, len(self.theta) - 1)
        fk = (x - th[k]) / (th[k + 1] - th[k])
        j = min(int(np.searchsorted(self.rho, r, side="right") - 1), len(self.rho) - 2)
        fj = (r - self.rho[j]) / (self.rho[j + 1] - self.rho[j])
        k1 = (k + 1) % len(self.theta)
        m = self.matrices
        return (
            (1 - fj) * ((1 - fk) * m[j, k] + fk * m[j, k1])
            + fj * ((1 - fk) * m[j + 1, k] + fk * m[j + 1, k1])
        )

    def evaluate_point(self, x):
        """Value at a parameter point; only the first two coordinates matter."""
        x = np.asarray(x, dtype=float)
        return self.evaluate(np.hypot(x[0], x[1]), np.arctan2(x[1], x[0]))

    def to_csv(self, fh):
        n = self.n
        iu = np.triu_indices(n)
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rho", "theta"] + [f"h_{i + 1}_{j + 1}" for i, j in zip(*iu)])
        for j, r in enumerate(self.rho):
            for k, t in enumerate(self.theta):
                writer.writerow([repr(float(r)), repr(float(t))] + [repr(float(v)) for v in self.matrices[j, k][iu]])

    def to_csv_text(self):
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()


def read_extension_csv(fh):
    """Inverse of :meth:`DiscHamiltonian.to_csv` (anchors are not stored)."""
    rows = list(csv.reader(fh))
    header, body = rows[0], np.array(rows[1:], dtype=float)
    m = len(header) - 2
    n = int(round((np.sqrt(8 * m + 1) - 1) / 2))
    rho = np.unique(body[:, 0])
    theta = body[: len(body) // len(rho), 1]
    iu = np.triu_indices(n)
    mats = np.zeros((len(rho), len(theta), n, n))
    vals = body[:, 2:].reshape(len(rho), len(theta), m)
    mats[..., iu[0], iu[1]] = vals
    mats[..., iu[1], iu[0]] = vals
    return DiscHamiltonian(rho, theta, mats, np.full(n, np.nan))


def build_extension(b: BoundaryData, anchors=None, rho_nodes=64) -> DiscHamiltonian:
    """Nondegenerate Hamiltonian on a ``rho_nodes`` x ``len(b.theta)`` polar grid."""
    a = _check_anchors(default_anchors(b.n) if anchors is None else anchors, b.n)
    rho, frames = contract_frame_loop(b, rho_nodes)
    lam = rho[:, None, None] * b.eigenvalues[None, :, :] + (1 - rho[:, None, None]) * a[None, None, :]
    mats = np.einsum("jkil,jkl,jkml->jkim", frames, lam, frames)
    mats = 0.5 * (mats + np.swapaxes(mats, -1, -2))
    # the rho = 1 row is the boundary Hamiltonian itself
    return DiscHamiltonian(rho, b.theta.copy(), mats, a)


@dataclass(frozen=True)
class ExtensionReport:
    min_gap: float
    boundary_mismatch: float
    continuity_modulus: float
    coarse_continuity_modulus: float
    symmetric: bool
    gap_ok: bool
    boundary_ok: bool
    continuity_ok: bool

    @property
    def passed(self):
        return self.symmetric and self.gap_ok and self.boundary_ok and self.continuity_ok

    @property
    def continuity_ratio(self):
        if self.coarse_continuity_modulus == 0:
            return 0.0 if self.continuity_modulus == 0 else np.inf
        return self.continuity_modulus / self.coarse_continuity_modulus

    def to_dict(self):
        return {
            "min_gap": self.min_gap,
            "boundary_mismatch": self.boundary_mismatch,
            "continuity_modulus": self.continuity_modulus,
            "coarse_continuity_modulus": self.coarse_continuity_modulus,
            "continuity_ratio": self.continuity_ratio,
            "symmetric": self.symmetric,
            "gap_ok": self.gap_ok,
            "boundary_ok": self.boundary_ok,
            "continuity_ok": self.continuity_ok,
            "passed": self.passed,
        }


BOUNDARY_TOL = 1e-8
# A continuous field roughly halves its largest neighbour jump when the grid
# spacing halves; an isolated defect does not.
CONTINUITY_RATIO_MAX = 0.75


def _modulus(m):
    """Largest Frobenius jump between rho- and (periodic) theta-neighbours."""
    if m.shape[0] < 2 and m.shape[1] < 2:
        return 0.0
    jumps = [0.0]
    if m.shape[0] > 1:
        jumps.append(np.max(np.linalg.norm(np.diff(m, axis=0), axis=(-2, -1))))
    if m.shape[1] > 1:
        jumps.append(np.max(np.linalg.norm(m - np.roll(m, -1, axis=1), axis=(-2, -1))))
    return float(max(jumps))


def verify_extension(h: DiscHamiltonian, b: BoundaryData) -> ExtensionReport:
    """Scan every node for the gap, the boundary fit and grid continuity.

    The eigenvalue scan uses ``numpy.linalg.eigvalsh`` so that it does not
    share code with the construction.
    """
    m = h.matrices
    symmetric = bool(np.array_equal(m, np.swapaxes(m, -1, -2))) and bool(np.all(np.isfinite(m)))
    w = np.linalg.eigvalsh(m)
    min_gap = float(np.min(np.diff(w, axis=-1))) if h.n > 1 else np.inf
    boundary = float(np.max(np.linalg.norm(m[-1] - b.hamiltonians(), axis=(-2, -1))))
    fine = _modulus(m)
    coarse = _modulus(m[::2, ::2])
    ratio_ok = fine == 0 or (coarse > 0 and fine / coarse <= CONTINUITY_RATIO_MAX)
    return ExtensionReport(
        min_gap=min_gap,
        boundary_mismatch=boundary,
        continuity_modulus=fine,
        coarse_continuity_modulus=coarse,
        symmetric=symmetric,
        gap_ok=min_gap > 0,
        boundary_ok=boundary < BOUNDARY_TOL,
        continuity_ok=bool(ratio_ok),
    )
