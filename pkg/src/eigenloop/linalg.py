"""Small dense linear algebra for real symmetric matrices and rotations.

Matrices and frames are plain ``numpy`` arrays.  Quaternions are length-4
arrays ordered ``(w, x, y, z)``.
"""

from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import InvalidInput, NotARotation

MAX_DIM = 8
TIE_TOL = 1e-12
# below this value of sin(phi) the axis is read from the symmetric part
SMALL_SINE = 1e-6


class AxisAngle(NamedTuple):
    phi: float
    axis: np.ndarray


def sym_matrix(entries) -> np.ndarray:
    """Validate and return a read-only float copy of a symmetric matrix."""
    m = np.array(entries, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {m.shape}")
    if not 1 <= m.shape[0] <= MAX_DIM:
        raise InvalidInput(f"matrix dimension {m.shape[0]} outside supported range 1..{MAX_DIM}")
    if not np.all(np.isfinite(m)):
        raise InvalidInput("matrix has non-finite entries")
    if not np.array_equal(m, m.T):
        raise InvalidInput("matrix is not exactly symmetric")
    m.setflags(write=False)
    return m


def gauge_columns(frame: np.ndarray) -> np.ndarray:
    """Flip column signs so each column's largest-magnitude entry is positive.

    Entries within ``TIE_TOL`` of the column maximum count as tied; the lowest
    index wins.
    """
    out = np.array(frame, dtype=float)
    mags = np.abs(out)
    for j in range(out.shape[1]):
        pivot = int(np.argmax(mags[:, j] >= mags[:, j].max() - TIE_TOL))
        if out[pivot, j] < 0:
            out[:, j] = -out[:, j]
    return out


def eig_sym(m):
    """Eigen-decompose a real symmetric matrix.

    Returns ascending eigenvalues and a frame whose columns are the matching
    unit eigenvectors.  Columns are gauge fixed (largest component positive)
    and then the last column is negated if needed so ``det(frame) = +1``.
    """
    m = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise InvalidInput("matrix has non-finite entries")
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {m.shape}")
    w, v, _ = _kernels.jacobi_eigh(m)
    v = gauge_columns(v)
    if np.linalg.det(v) < 0:
        v[:, -1] = -v[:, -1]
    return w, v


def eig_sym_raw(m):
    """Eigenvalues and eigenvectors without gauge or orientation fixing."""
    w, v, _ = _kernels.jacobi_eigh(m)
    return w, v


def is_rotation(r, tol=1e-8) -> bool:
    r = np.asarray(r, dtype=float)
    n = r.shape[0]
    return (
        r.shape == (n, n)
        and np.max(np.abs(r.T @ r - np.eye(n))) <= tol
        and abs(np.linalg.det(r) - 1.0) <= tol
    )


def _check_so3(r):
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        raise NotARotation(f"expected a 3x3 matrix, got shape {r.shape}")
    if not is_rotation(r):
        raise NotARotation("matrix is not in SO(3) within 1e-8")
    return r


def _vee(r):
    return 0.5 * np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]])


def axis_angle(r) -> AxisAngle:
    """Rotation angle in ``[0, pi]`` and unit axis of an SO(3) matrix.

    The angle comes from ``atan2(sin, cos)`` so it stays accurate near pi.
    The identity gets axis ``(1, 0, 0)``.  At exactly pi the axis sign follows
    the largest-component-positive gauge.
    """
    r = _check_so3(r)
    w = _vee(r)
    s = float(np.linalg.norm(w))
    c = 0.5 * (np.trace(r) - 1.0)
    phi = float(np.arctan2(s, c))
    if s >= SMALL_SINE or (c > 0 and s > 0):
        return AxisAngle(phi, w / s)
    if c > 0:
        return AxisAngle(0.0, np.array([1.0, 0.0, 0.0]))
    # near pi: (R + R^T)/2 - cos(phi) I = (1 - cos(phi)) v v^T
    b = 0.5 * (r + r.T) - c * np.eye(3)
    col = int(np.argmax(np.diag(b)))
    axis = b[:, col] / np.linalg.norm(b[:, col])
    if s > 1e-14:
        if axis @ w < 0:
            axis = -axis
    else:
        axis = gauge_columns(axis[:, None])[:, 0]
    return AxisAngle(phi, axis)


def rotation_from_axis_angle(phi, axis) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    k = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + np.sin(phi) * k + (1 - np.cos(phi)) * (k @ k)


def quat_to_so3(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (4,) or abs(q @ q - 1.0) > 1e-10:
        raise InvalidInput("quaternion must be a unit 4-vector")
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quats_to_so3(q) -> np.ndarray:
    """Batched :func:`quat_to_so3` over the last axis (no unit-norm check)."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = np.moveaxis(q, -1, 0)
    out = np.empty(q.shape[:-1] + (3, 3))
    out[..., 0, 0] = 1 - 2 * (y * y + z * z)
    out[..., 0, 1] = 2 * (x * y - w * z)
    out[..., 0, 2] = 2 * (x * z + w * y)
    out[..., 1, 0] = 2 * (x * y + w * z)
    out[..., 1, 1] = 1 - 2 * (x * x + z * z)
    out[..., 1, 2] = 2 * (y * z - w * x)
    out[..., 2, 0] = 2 * (x * z - w * y)
    out[..., 2, 1] = 2 * (y * z + w * x)
    out[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return out


def so3_to_quat(r, check=True) -> np.ndarray:
    """One of the two unit quaternions covering ``r``.

    Uses the numerically largest of ``w, x, y, z`` as pivot.  The canonical
    branch has ``w > 0``; when ``w`` is zero the largest component is positive.
    """
    r = _check_so3(r) if check else np.asarray(r, dtype=float)
    tr = np.trace(r)
    cand = np.array([tr, r[0, 0], r[1, 1], r[2, 2]])
    i = int(np.argmax(cand))
    if i == 0:
        w = 0.5 * np.sqrt(max(1.0 + tr, 0.0))
        f = 0.25 / w
        q = np.array([w, (r[2, 1] - r[1, 2]) * f, (r[0, 2] - r[2, 0]) * f, (r[1, 0] - r[0, 1]) * f])
    elif i == 1:
        x = 0.5 * np.sqrt(max(1.0 + 2 * r[0, 0] - tr, 0.0))
        f = 0.25 / x
        q = np.array([(r[2, 1] - r[1, 2]) * f, x, (r[0, 1] + r[1, 0]) * f, (r[0, 2] + r[2, 0]) * f])
    elif i == 2:
        y = 0.5 * np.sqrt(max(1.0 + 2 * r[1, 1] - tr, 0.0))
        f = 0.25 / y
        q = np.array([(r[0, 2] - r[2, 0]) * f, (r[0, 1] + r[1, 0]) * f, y, (r[1, 2] + r[2, 1]) * f])
    else:
        z = 0.5 * np.sqrt(max(1.0 + 2 * r[2, 2] - tr, 0.0))
        f = 0.25 / z
        q = np.array([(r[1, 0] - r[0, 1]) * f, (r[0, 2] + r[2, 0]) * f, (r[1, 2] + r[2, 1]) * f, z])
    q /= np.linalg.norm(q)
    if q[0] < 0:
        q = -q
    elif q[0] == 0:
        q = gauge_columns(q[:, None])[:, 0]
    return q


def geodesic_interpolate(ra, rb, s):
    """Point at fraction ``s`` along the shortest SO(3) path from ``ra`` to ``rb``."""
    rel = ra.T @ rb
    aa = axis_angle(rel)
    return ra @ rotation_from_axis_angle(s * aa.phi, aa.axis)


def rotation_distance(ra, rb) -> float:
    """Angle of the relative rotation ``ra^T rb`` (SO(3) only)."""
    rel = np.asarray(ra).T @ np.asarray(rb)
    c = 0.5 * (np.trace(rel) - 1.0)
    return float(np.arctan2(np.linalg.norm(_vee(rel)), c))


def planar_rotation(alpha) -> np.ndarray:
    c, s = np.cos(alpha), np.sin(alpha)
    return np.array([[c, -s], [s, c]])
