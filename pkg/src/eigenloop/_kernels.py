"""Hot numeric kernels with a numba path and a pure-numpy fallback.

Two kernels dominate runtime: the cyclic Jacobi eigensolver (called once per
loop sample and once per extension node) and the discrete curve-shortening
iteration used to contract quaternion loops.  Both exist twice: a scalar-loop
version compiled with ``numba.njit`` and a vectorised numpy version.  The
module-level names ``jacobi_eigh`` and ``shorten_loop`` point at the numba
variants unless numba is missing or ``EIGENLOOP_DISABLE_NUMBA`` is set to a
truthy value before import.
"""

import os

import numpy as np

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    _HAVE_NUMBA = False

_DISABLED = os.environ.get("EIGENLOOP_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")
USE_NUMBA = _HAVE_NUMBA and not _DISABLED

# shorten_loop status codes
CONVERGED = 0
STALLED = 1
CAPPED = 2


def _maybe_njit(fn):
    if not _HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


# ---------------------------------------------------------------------------
# Jacobi eigensolver
# ---------------------------------------------------------------------------


def _jacobi_eigh_loops(a, rel_tol, max_sweeps):
    n = a.shape[0]
    A = a.copy()
    V = np.eye(n)
    norm2 = 0.0
    for i in range(n):
        for j in range(n):
            norm2 += A[i, j] * A[i, j]
    thresh2 = rel_tol * rel_tol * norm2
    sweeps = 0
    while sweeps < max_sweeps:
        off2 = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off2 += A[i, j] * A[i, j]
        if off2 <= thresh2:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * akq
                    A[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = c * apk - s * aqk
                    A[q, k] = s * apk + c * aqk
                A[p, q] = 0.0
                A[q, p] = 0.0
                for k in range(n):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * vkp - s * vkq
                    V[k, q] = s * vkp + c * vkq
    w = np.empty(n)
    for i in range(n):
        w[i] = A[i, i]
    order = np.argsort(w, kind="mergesort")
    w_sorted = np.empty(n)
    V_sorted = np.empty((n, n))
    for j in range(n):
        w_sorted[j] = w[order[j]]
        for i in range(n):
            V_sorted[i, j] = V[i, order[j]]
    return w_sorted, V_sorted, sweeps


def jacobi_eigh_numpy(a, rel_tol=1e-13, max_sweeps=64):
    """Cyclic Jacobi with vectorised Givens updates.

    Returns ``(eigenvalues ascending, eigenvectors as columns, sweeps)``.
    """
    A = np.array(a, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    thresh2 = rel_tol * rel_tol * np.sum(A * A)
    mask = ~np.eye(n, dtype=bool)
    sweeps = 0
    while sweeps < max_sweeps:
        if np.sum(A[mask] ** 2) <= thresh2:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                cols = A[:, [p, q]]
                A[:, p] = c * cols[:, 0] - s * cols[:, 1]
                A[:, q] = s * cols[:, 0] + c * cols[:, 1]
                rows = A[[p, q], :]
                A[p, :] = c * rows[0] - s * rows[1]
                A[q, :] = s * rows[0] + c * rows[1]
                A[p, q] = A[q, p] = 0.0
                vc = V[:, [p, q]]
                V[:, p] = c * vc[:, 0] - s * vc[:, 1]
                V[:, q] = s * vc[:, 0] + c * vc[:, 1]
    w = np.diag(A).copy()
    order = np.argsort(w, kind="mergesort")
    return w[order], V[:, order], sweeps


jacobi_eigh_numba = _maybe_njit(_jacobi_eigh_loops)


# ---------------------------------------------------------------------------
# Discrete curve shortening of a closed loop of unit vectors
# ---------------------------------------------------------------------------
#
# One iteration replaces every point except index 0 (the basepoint) by the
# normalised sum q[k-1] + 2 q[k] + q[k+1]; indices wrap around.  The loop has
# diameter < pi/2 on the sphere exactly when every pairwise dot product is > 0.


def _min_pair_dot_loops(q):
    m = q.shape[0]
    d = q.shape[1]
    best = 1.0
    for i in range(m):
        for j in range(i + 1, m):
            s = 0.0
            for c in range(d):
                s += q[i, c] * q[j, c]
            if s < best:
                best = s
    return best


def _shorten_loop_loops(q0, max_iter, check_every, record_at, patience):
    m = q0.shape[0]
    d = q0.shape[1]
    cur = q0.copy()
    nxt = q0.copy()
    last = q0.copy()
    snaps = np.empty((record_at.shape[0], m, d))
    progress = np.zeros(max_iter // check_every + 1)
    r = 0
    while r < record_at.shape[0] and record_at[r] == 0:
        snaps[r] = cur
        r += 1
    best = _min_pair_dot_loops(cur)
    if best > 0.0:
        return snaps, 0, CONVERGED, best, progress[:0]
    since_improved = 0
    it = 0
    n_checks = 0
    while it < max_iter:
        for k in range(1, m):
            km = k - 1
            kp = k + 1 if k + 1 < m else 0
            norm2 = 0.0
            for c in range(d):
                v = cur[km, c] + 2.0 * cur[k, c] + cur[kp, c]
                nxt[k, c] = v
                norm2 += v * v
            inv = 1.0 / np.sqrt(norm2)
            for c in range(d):
                nxt[k, c] *= inv
        tmp = cur
        cur = nxt
        nxt = tmp
        it += 1
        while r < record_at.shape[0] and record_at[r] == it:
            snaps[r] = cur
            r += 1
        if it % check_every == 0:
            moved = 0.0
            for k in range(m):
                s = 0.0
                for c in range(d):
                    diff = cur[k, c] - last[k, c]
                    s += diff * diff
                    last[k, c] = cur[k, c]
                if s > moved:
                    moved = s
            progress[n_checks] = np.sqrt(moved)
            n_checks += 1
            md = _min_pair_dot_loops(cur)
            if md > 0.0:
                return snaps, it, CONVERGED, md, progress[:n_checks]
            if md > best + 1e-12:
                best = md
                since_improved = 0
            else:
                since_improved += 1
                if since_improved >= patience:
                    return snaps, it, STALLED, md, progress[:n_checks]
    return snaps, it, CAPPED, _min_pair_dot_loops(cur), progress[:n_checks]


def _min_pair_dot_numpy(q):
    g = q @ q.T
    m = q.shape[0]
    if m < 2:
        return 1.0
    return float(g[np.triu_indices(m, 1)].min())


def shorten_loop_numpy(q0, max_iter, check_every, record_at, patience):
    cur = np.array(q0, dtype=float)
    m, d = cur.shape
    record_at = np.asarray(record_at, dtype=np.int64)
    snaps = np.empty((record_at.shape[0], m, d))
    progress = []
    r = 0
    while r < len(record_at) and record_at[r] == 0:
        snaps[r] = cur
        r += 1
    best = _min_pair_dot_numpy(cur)
    if best > 0.0:
        return snaps, 0, CONVERGED, best, np.zeros(0)
    base = cur[0].copy()
    last = cur.copy()
    since_improved = 0
    it = 0
    while it < max_iter:
        nxt = np.roll(cur, 1, axis=0) + 2.0 * cur + np.roll(cur, -1, axis=0)
        nxt /= np.linalg.norm(nxt, axis=1)[:, None]
        nxt[0] = base
        cur = nxt
        it += 1
        while r < len(record_at) and record_at[r] == it:
            snaps[r] = cur
            r += 1
        if it % check_every == 0:
            progress.append(np.sqrt(np.max(np.sum((cur - last) ** 2, axis=1))))
            last = cur
            md = _min_pair_dot_numpy(cur)
            if md > 0.0:
                return snaps, it, CONVERGED, md, np.array(progress)
            if md > best + 1e-12:
                best = md
                since_improved = 0
            else:
                since_improved += 1
                if since_improved >= patience:
                    return snaps, it, STALLED, md, np.array(progress)
    return snaps, it, CAPPED, _min_pair_dot_numpy(cur), np.array(progress)


if _HAVE_NUMBA:
    _min_pair_dot_loops = _maybe_njit(_min_pair_dot_loops)
shorten_loop_numba = _maybe_njit(_shorten_loop_loops)


if USE_NUMBA:
    _jacobi_impl = jacobi_eigh_numba
    _shorten_impl = shorten_loop_numba
else:
    _jacobi_impl = jacobi_eigh_numpy
    _shorten_impl = shorten_loop_numpy


def jacobi_eigh(a, rel_tol=1e-13, max_sweeps=64):
    return _jacobi_impl(np.ascontiguousarray(a, dtype=np.float64), rel_tol, max_sweeps)


def shorten_loop(q0, max_iter, check_every=32, record_at=(), patience=64):
    """Run the basepoint-fixed shortening flow on rows of ``q0``.

    Returns ``(snapshots, iterations, status, min_pair_dot, progress)``.
    ``snapshots[i]`` is the loop after ``record_at[i]`` iterations, and
    ``record_at`` must be sorted ascending.  ``progress[c]`` is the largest
    distance any point moved during the ``c``-th block of ``check_every``
    iterations.
    """
    rec = np.ascontiguousarray(record_at, dtype=np.int64)
    return _shorten_impl(
        np.ascontiguousarray(q0, dtype=np.float64), int(max_iter), int(check_every), rec, int(patience)
    )
