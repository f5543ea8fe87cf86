"""Continuous transport of the eigenframe of a model around a closed loop."""

from dataclasses import dataclass

import numpy as np

from .errors import GapCollapse, InvalidLoop, RefinementExhausted
from .linalg import eig_sym, eig_sym_raw
from .loops import LoopSpec
from .models import HamiltonianModel, eval_model

# At the closing sample the eigenvectors must match the start up to sign.
_CLOSURE_OVERLAP = 1 - 1e-6


@dataclass(frozen=True)
class TransportConfig:
    overlap_floor: float = 0.9
    max_refinement_depth: int = 20
    gap_floor: float = 1e-9

    def __post_init__(self):
        if not 0 < self.overlap_floor < 1:
            raise ValueError("overlap_floor must lie in (0, 1)")
        if self.max_refinement_depth < 0:
            raise ValueError("max_refinement_depth must be >= 0")
        if not self.gap_floor > 0:
            raise ValueError("gap_floor must be positive")


@dataclass(frozen=True)
class TransportResult:
    t: np.ndarray  # (M,) sample parameters including inserted ones
    q: np.ndarray  # (M, d)
    frames: np.ndarray  # (M, n, n), columns aligned by continuity
    eigenvalues: np.ndarray  # (M, n) ascending per row
    min_gap: float
    sign_matrix: np.ndarray  # (n, n) diagonal, F_end = F_0 @ D
    step_overlaps: np.ndarray  # (M-1,) smallest |<psi_i(t_k)|psi_i(t_k+1)>| per step
    refinements: int
    max_depth_used: int

    @property
    def n(self):
        return self.frames.shape[1]

    @property
    def n_samples(self):
        return len(self.t)

    @property
    def signs(self):
        return np.diag(self.sign_matrix).astype(int)

    @property
    def sign_change(self):
        return bool(np.any(self.signs < 0))


def _min_gap(w):
    return float(np.min(np.diff(w))) if len(w) > 1 else np.inf


def transport(model: HamiltonianModel, loop: LoopSpec, cfg: TransportConfig = None) -> TransportResult:
    """Carry the eigenframe of ``model`` around ``loop``.

    Each new frame takes its columns from the eigensolver with signs chosen so
    every diagonal overlap with the previous frame is positive.  A step whose
    smallest overlap magnitude is below ``cfg.overlap_floor``, or whose aligned
    frame would have determinant -1, is bisected at the chord midpoint, up to
    ``cfg.max_refinement_depth`` levels.
    """
    cfg = cfg or TransportConfig()
    if not loop.closed:
        raise InvalidLoop("transport needs a closed loop")
    if loop.d != model.d:
        raise InvalidLoop(f"loop has {loop.d} coordinates but model {model.name!r} takes {model.d}")

    def solve(t, q, raw=True):
        h = eval_model(model, q)
        w, v = eig_sym_raw(h) if raw else eig_sym(h)
        gap = _min_gap(w)
        if gap <= cfg.gap_floor:
            raise GapCollapse(float(t), gap)
        return w, v

    w0, f0 = solve(loop.t[0], loop.q[0], raw=False)
    ts, qs, frames, evals, overlaps = [loop.t[0]], [loop.q[0]], [f0], [w0], []
    t_a, q_a, f_a = loop.t[0], loop.q[0], f0
    refinements = 0
    depth_used = 0

    for k in range(1, loop.n_samples):
        stack = [(loop.t[k], loop.q[k], 0, None)]
        while stack:
            t_b, q_b, depth, solved = stack[-1]
            w, v = solved if solved is not None else solve(t_b, q_b)
            ov = np.einsum("ij,ij->j", f_a, v)
            worst = float(np.min(np.abs(ov)))
            aligned = v * np.where(ov < 0, -1.0, 1.0)
            # a determinant flip means the step skipped past a rotation of
            # more than a right angle in some plane: resolve it like a low overlap
            flipped = np.linalg.det(aligned) < 0
            if worst < cfg.overlap_floor or flipped:
                if depth >= cfg.max_refinement_depth:
                    raise RefinementExhausted(float(t_a), float(t_b), worst)
                stack[-1] = (t_b, q_b, depth, (w, v))
                stack.append((0.5 * (t_a + t_b), 0.5 * (q_a + q_b), depth + 1, None))
                refinements += 1
                depth_used = max(depth_used, depth + 1)
                continue
            v = aligned
            stack.pop()
            ts.append(t_b)
            qs.append(q_b)
            frames.append(v)
            evals.append(w)
            overlaps.append(worst)
            t_a, q_a, f_a = t_b, q_b, v

    closing = np.einsum("ij,ij->j", f0, frames[-1])
    if np.min(np.abs(closing)) < _CLOSURE_OVERLAP:
        raise InvalidLoop("final frame does not match the initial frame up to signs")
    signs = np.where(closing > 0, 1.0, -1.0)
    frames_arr = np.array(frames)
    evals_arr = np.array(evals)
    return TransportResult(
        t=np.array(ts, dtype=float),
        q=np.array(qs, dtype=float),
        frames=frames_arr,
        eigenvalues=evals_arr,
        min_gap=float(np.min(np.diff(evals_arr, axis=1))) if evals_arr.shape[1] > 1 else np.inf,
        sign_matrix=np.diag(signs),
        step_overlaps=np.array(overlaps),
        refinements=refinements,
        max_depth_used=depth_used,
    )


def sign_pattern(result: TransportResult) -> np.ndarray:
    """Diagonal +-1 matrix ``D`` with ``F_end = F_0 D``; ``D != I`` means a sign change."""
    return result.sign_matrix.copy()
