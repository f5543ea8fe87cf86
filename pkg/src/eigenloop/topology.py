"""Homotopy classification of transported frame loops.

SO(2) loops are classified by an integer winding number; SO(3) loops by
lifting to unit quaternions and checking whether the lift closes (trivial) or
ends at minus its start (nontrivial).  SO(4) loops are first reduced to SO(3)
by left multiplication with a matrix built from the first frame column.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import AmbiguousPiercing, BlockLeakage, InvalidInput, InvalidLoop, StepTooLarge
from .linalg import axis_angle, geodesic_interpolate, so3_to_quat
from .loops import LoopSpec
from .models import HamiltonianModel
from .transport import TransportConfig, TransportResult, transport

TRIVIAL = "trivial"
NONTRIVIAL = "nontrivial"

# Number of times classify() halves the loop steps when a classifier asks for
# finer sampling.
_MAX_RETRIES = 4


@dataclass(frozen=True)
class HomotopyClass:
    kind: str  # "Winding" | "Z2" | "SignChangeOnly" | "Unsupported"
    winding: int = None
    z2: str = None

    @property
    def nontrivial(self):
        if self.kind == "Winding":
            return self.winding != 0
        if self.kind == "Z2":
            return self.z2 == NONTRIVIAL
        return False


@dataclass(frozen=True)
class Verdict:
    degeneracy_implied: bool
    evidence: str  # "SignChange" | "NontrivialClass" | None
    homotopy: HomotopyClass
    min_gap: float
    samples_used: int
    refinements: int
    max_depth_used: int
    caveat: str = None
    result: TransportResult = field(default=None, repr=False)


def winding_so2(frames) -> int:
    """Winding number of the first column, counterclockwise positive."""
    frames = np.asarray(frames, dtype=float)
    if frames.ndim != 3 or frames.shape[1:] != (2, 2):
        raise InvalidInput("winding_so2 expects a sequence of 2x2 frames")
    c = frames[:, :, 0]
    cross = c[:-1, 0] * c[1:, 1] - c[:-1, 1] * c[1:, 0]
    dot = np.einsum("ij,ij->i", c[:-1], c[1:])
    inc = np.arctan2(cross, dot)
    big = np.flatnonzero(np.abs(inc) >= np.pi / 2)
    if big.size:
        raise StepTooLarge(int(big[0]))
    turns = inc.sum() / (2 * np.pi)
    w = int(round(turns))
    if abs(turns - w) > 1e-6:
        raise InvalidLoop(f"frame path is not closed (accumulated {turns:.6f} turns)")
    return w


def lift_so3(frames):
    """Lift an SO(3) frame loop to unit quaternions by sign continuity.

    Returns ``(quaternions, class)`` where class is ``"trivial"`` when the lift
    closes and ``"nontrivial"`` when it ends at minus its start.
    """
    frames = np.asarray(frames, dtype=float)
    if frames.ndim != 3 or frames.shape[1:] != (3, 3):
        raise InvalidInput("lift_so3 expects a sequence of 3x3 frames")
    quats = np.empty((len(frames), 4))
    quats[0] = so3_to_quat(frames[0])
    for k in range(1, len(frames)):
        p = so3_to_quat(frames[k])
        dot = p @ quats[k - 1]
        if abs(dot) < 1 / np.sqrt(2):
            raise StepTooLarge(k - 1)
        quats[k] = p if dot > 0 else -p
    closing = quats[-1] @ quats[0]
    if abs(closing) < 1 - 1e-6:
        raise InvalidLoop("frame path is not closed")
    return quats, TRIVIAL if closing > 0 else NONTRIVIAL


@dataclass(frozen=True)
class Piercings:
    count: int
    events: tuple  # (step index, fraction within the step) per piercing

    @property
    def z2(self):
        return NONTRIVIAL if self.count % 2 else TRIVIAL


def piercing_parity(frames, eps=1e-3, max_depth=40) -> Piercings:
    """Count passages of an SO(3) loop through the ``phi = pi`` boundary.

    In the ball picture a rotation is the vector ``phi * axis``.  A step whose
    ball vectors stay close is continuous.  A step that jumps is a piercing
    when one end sits within ``eps`` of ``pi`` and the axis reverses.  Any
    other jump is under-resolved, so it is split at the geodesic midpoint and
    re-examined.
    """
    frames = np.asarray(frames, dtype=float)
    if frames.ndim != 3 or frames.shape[1:] != (3, 3):
        raise InvalidInput("piercing_parity expects a sequence of 3x3 frames")
    events = []
    aas = [axis_angle(f) for f in frames]
    for k in range(len(frames) - 1):
        _count_step(frames[k], frames[k + 1], aas[k], aas[k + 1], eps, max_depth, k, 0.0, 1.0, events)
    return Piercings(len(events), tuple(events))


def _count_step(ra, rb, aa, ab, eps, depth, k, lo, hi, events):
    jump = np.linalg.norm(ab.phi * ab.axis - aa.phi * aa.axis)
    if jump < np.pi / 2:
        return
    if max(aa.phi, ab.phi) > np.pi - eps and aa.axis @ ab.axis < 0:
        events.append((k, 0.5 * (lo + hi)))
        return
    if depth == 0:
        raise AmbiguousPiercing(k)
    mid = geodesic_interpolate(ra, rb, 0.5)
    am = axis_angle(mid)
    half = 0.5 * (lo + hi)
    _count_step(ra, mid, aa, am, eps, depth - 1, k, lo, half, events)
    _count_step(mid, rb, am, ab, eps, depth - 1, k, half, hi, events)


def first_column_transform(f) -> np.ndarray:
    """Orthogonal ``T(f)`` with ``T(f) f = e1`` for a unit 4-vector ``f``."""
    f1, f2, f3, f4 = f
    return np.array(
        [
            [f1, f2, f3, f4],
            [-f2, f1, -f4, f3],
            [-f3, f4, f1, -f2],
            [-f4, -f3, f2, f1],
        ]
    )


def reduce_so4(frames, tol=1e-9) -> np.ndarray:
    """Map an SO(4) loop ``F_k`` to the SO(3) loop ``A_k`` of the same class.

    ``T(f_k) F_k`` has ``e1`` as first row and column; ``A_k`` is the remaining
    3x3 block.
    """
    frames = np.asarray(frames, dtype=float)
    if frames.ndim != 3 or frames.shape[1:] != (4, 4):
        raise InvalidInput("reduce_so4 expects a sequence of 4x4 frames")
    out = np.empty((len(frames), 3, 3))
    e1 = np.array([1.0, 0.0, 0.0, 0.0])
    for k, f in enumerate(frames):
        m = first_column_transform(f[:, 0]) @ f
        dev = max(np.max(np.abs(m[:, 0] - e1)), np.max(np.abs(m[0, :] - e1)))
        if dev > tol:
            raise BlockLeakage(k, float(dev))
        out[k] = m[1:, 1:]
    return out


def classify_frames(frames) -> HomotopyClass:
    """Homotopy class of a closed frame loop (no sign change)."""
    frames = np.asarray(frames, dtype=float)
    n = frames.shape[1]
    if n == 2:
        return HomotopyClass("Winding", winding=winding_so2(frames))
    if n == 3:
        return HomotopyClass("Z2", z2=lift_so3(frames)[1])
    if n == 4:
        return HomotopyClass("Z2", z2=lift_so3(reduce_so4(frames))[1])
    return HomotopyClass("Unsupported")


def classify(model: HamiltonianModel, loop: LoopSpec, cfg: TransportConfig = None) -> Verdict:
    """Run the degeneracy test for ``model`` around ``loop``.

    A sign change of any transported eigenvector implies an enclosed
    degeneracy.  Otherwise the frame loop is closed and a nontrivial homotopy
    class implies one.  A trivial class is inconclusive: some Hamiltonian
    with the same boundary eigendata is nondegenerate everywhere inside.
    """
    if model.n < 2:
        raise InvalidInput("classification needs at least a two-level model")
    cfg = cfg or TransportConfig()
    for _ in range(_MAX_RETRIES + 1):
        res = transport(model, loop, cfg)
        if res.sign_change:
            return _verdict(res, HomotopyClass("SignChangeOnly"), "SignChange")
        try:
            cls = classify_frames(res.frames)
        except StepTooLarge:
            loop = loop.refined()
            continue
        caveat = None
        if cls.kind == "Unsupported":
            caveat = (
                f"no homotopy classifier for SO({res.n}); only the sign test ran, "
                "so absence of a sign change is inconclusive"
            )
        return _verdict(res, cls, "NontrivialClass" if cls.nontrivial else None, caveat)
    raise StepTooLarge(-1, "classifier still needs finer sampling after repeated refinement")


def _verdict(res, cls, evidence, caveat=None):
    return Verdict(
        degeneracy_implied=evidence is not None,
        evidence=evidence,
        homotopy=cls,
        min_gap=res.min_gap,
        samples_used=res.n_samples,
        refinements=res.refinements,
        max_depth_used=res.max_depth_used,
        caveat=caveat,
        result=res,
    )
