"""Dense linear algebra: a Jacobi SVD reference, norms, truncation and polar factors.

Matrices are plain 2-D numpy arrays (float64 or complex128).  The SVD here is a
one-sided (Hestenes) Jacobi iteration, written out rather than delegated to
LAPACK so that it can serve as an independent oracle for the variational solver.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import check_matrix, check_square

#: singular values below ``RANK_RTOL * d_1`` count as zero
RANK_RTOL = 1e-12

_MAX_SWEEPS = 80


@dataclass(frozen=True)
class SvdTriple:
    """Full singular value decomposition ``M = U diag(d) V^dagger``.

    ``singular_values`` has ``min(rows, cols)`` entries in non-increasing order,
    ``left_vectors`` is ``rows x rows`` and ``right_vectors`` is ``cols x cols``;
    singular vectors are the columns.
    """

    singular_values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray

    @property
    def rank(self):
        d = self.singular_values
        if d.size == 0 or d[0] == 0.0:
            return 0
        return int(np.count_nonzero(d > RANK_RTOL * d[0]))

    def truncate(self, t):
        """Return ``(d[:t], U[:, :t], V[:, :t])``."""
        return (
            self.singular_values[:t],
            self.left_vectors[:, :t],
            self.right_vectors[:, :t],
        )


def _jacobi_columns(a):
    """Orthogonalise the columns of ``a`` in place; return the accumulated rotation."""
    n = a.shape[1]
    v = np.eye(n, dtype=a.dtype)
    eps = np.finfo(np.float64).eps
    for _ in range(_MAX_SWEEPS):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                ai = a[:, i].copy()
                aj = a[:, j].copy()
                alpha = np.vdot(ai, ai).real
                beta = np.vdot(aj, aj).real
                gamma = np.vdot(ai, aj)
                g = abs(gamma)
                if g == 0.0 or g <= eps * np.sqrt(alpha * beta):
                    continue
                with np.errstate(over="ignore"):
                    zeta = (beta - alpha) / (2.0 * g)
                if not np.isfinite(zeta) or abs(zeta) > 1e150:
                    continue  # rotation angle underflows to zero
                rotated = True
                phase = gamma / g
                t = np.copysign(1.0, zeta) / (abs(zeta) + np.hypot(1.0, zeta))
                c = 1.0 / np.hypot(1.0, t)
                s = c * t
                # rotate (a_i, conj(phase) a_j), which have a real Gram entry
                bj = aj * np.conj(phase)
                a[:, i] = c * ai - s * bj
                a[:, j] = (s * ai + c * bj) * phase
                vi = v[:, i].copy()
                wj = v[:, j] * np.conj(phase)
                v[:, i] = c * vi - s * wj
                v[:, j] = (s * vi + c * wj) * phase
        if not rotated:
            break
    return v


def _complete_basis(q, k):
    """Extend the first ``k`` orthonormal columns of ``q`` to a full unitary."""
    m = q.shape[0]
    basis = [q[:, j] for j in range(k)]
    for e in np.eye(m, dtype=q.dtype):
        if len(basis) == m:
            break
        w = e.copy()
        for _ in range(2):
            for b in basis:
                w = w - np.vdot(b, w) * b
        nrm = np.linalg.norm(w)
        if nrm > 1e-8:
            basis.append(w / nrm)
    return np.column_stack(basis)


def _fix_phases(u, v, count):
    """Make the first non-negligible entry of each right vector real positive."""
    for j in range(count):
        col = v[:, j]
        idx = np.flatnonzero(np.abs(col) > 1e-12)
        if idx.size == 0:
            continue
        z = col[idx[0]]
        ph = np.conj(z) / abs(z)
        v[:, j] = col * ph
        u[:, j] = u[:, j] * ph
    return u, v


def classical_svd(m):
    """Reference SVD of a finite dense matrix by one-sided Jacobi rotations.

    Returns an :class:`SvdTriple`.  Deterministic for a fixed input; right
    vectors are phase-fixed (first non-negligible entry real and positive) and
    the matching left vectors carry the same phase.
    """
    arr = check_matrix(m)
    rows, cols = arr.shape
    if rows < cols:
        tr = classical_svd(arr.conj().T)
        return SvdTriple(
            tr.singular_values,
            *_fix_phases(tr.right_vectors.copy(), tr.left_vectors.copy(), rows),
        )

    dtype = np.complex128 if np.iscomplexobj(arr) else np.float64
    a = arr.astype(dtype, copy=True)
    v = _jacobi_columns(a)
    d = np.linalg.norm(a, axis=0)
    order = np.argsort(-d, kind="stable")
    d = d[order]
    a = a[:, order]
    v = v[:, order]

    tol = RANK_RTOL * d[0] if d[0] > 0 else 0.0
    k = int(np.count_nonzero(d > tol)) if d[0] > 0 else 0
    u = np.zeros((rows, rows), dtype=dtype)
    u[:, :k] = a[:, :k] / d[:k]
    u = _complete_basis(u, k)
    d[k:] = np.where(d[k:] > tol, d[k:], 0.0)
    u, v = _fix_phases(u, v, cols)
    return SvdTriple(d, u, v)


def frobenius_norm(m):
    arr = check_matrix(m, allow_empty=True)
    return float(np.sqrt(np.sum(np.abs(arr) ** 2)))


def reconstruct_rank_t(values, lefts, rights, t):
    """Sum of the first ``t`` rank-one terms ``values[j] * lefts_j rights_j^dagger``.

    ``lefts`` and ``rights`` hold vectors as columns.
    """
    values = np.asarray(values, dtype=float)
    lefts = np.asarray(lefts)
    rights = np.asarray(rights)
    if lefts.ndim != 2 or rights.ndim != 2:
        raise ValueError("lefts and rights must be 2-D arrays of column vectors")
    t = int(t)
    if t < 0 or t > min(values.size, lefts.shape[1], rights.shape[1]):
        raise ValueError(
            f"t={t} exceeds the available terms "
            f"({values.size} values, {lefts.shape[1]} left, {rights.shape[1]} right)"
        )
    dtype = np.result_type(lefts, rights, np.float64)
    if t == 0:
        return np.zeros((lefts.shape[0], rights.shape[0]), dtype=dtype)
    return (lefts[:, :t] * values[:t]) @ rights[:, :t].conj().T


def polar_decompose(m):
    """Right polar decomposition ``m = w @ p`` from the reference SVD."""
    arr = check_square(m)
    svd = classical_svd(arr)
    u, d, v = svd.left_vectors, svd.singular_values, svd.right_vectors
    w = u @ v.conj().T
    p = (v * d) @ v.conj().T
    p = 0.5 * (p + p.conj().T)
    return w, p
