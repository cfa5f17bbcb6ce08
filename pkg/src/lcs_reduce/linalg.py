"""Small dense linear algebra for chart-sized systems (ambient dim <= 8).

Row reduction with partial pivoting throughout; no SVD dependency.
Principal angles go through modified Gram-Schmidt and a Jacobi
eigen-iteration on the (<= 4x4) cross-Gram matrix.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "LinAlgError",
    "SingularMatrixError",
    "SubspaceBasis",
    "check_finite",
    "DEFAULT_PIVOT_TOL",
    "rank",
    "null_space",
    "solve_linear",
    "orthonormalize",
    "principal_angle_distance",
]

DEFAULT_PIVOT_TOL = 1e-10
_INDEPENDENCE_TOL = 1e-10


class LinAlgError(ValueError):
    pass


class SingularMatrixError(LinAlgError):
    def __init__(self, pivot: float):
        self.pivot = pivot
        super().__init__(f"matrix singular to tolerance, worst pivot {pivot:.3e}")


def check_finite(a: np.ndarray, what: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise LinAlgError(f"non-finite entries in {what}")
    return a


class SubspaceBasis:
    """A list of linearly independent vectors spanning a subspace."""

    def __init__(self, ambient_dim: int, vectors, tol: float = _INDEPENDENCE_TOL):
        self.ambient_dim = int(ambient_dim)
        vecs = [check_finite(np.asarray(v, dtype=float), "basis vector") for v in vectors]
        for v in vecs:
            if v.shape != (self.ambient_dim,):
                raise LinAlgError(
                    f"basis vector of shape {v.shape} in ambient dimension {self.ambient_dim}"
                )
        self.vectors = vecs
        if vecs:
            if rank(np.array(vecs), tol) != len(vecs):
                raise LinAlgError("basis vectors are linearly dependent at tolerance")

    @property
    def dim(self) -> int:
        return len(self.vectors)

    def matrix(self) -> np.ndarray:
        """Vectors stacked as rows; shape (dim, ambient_dim)."""
        if not self.vectors:
            return np.zeros((0, self.ambient_dim))
        return np.array(self.vectors)

    def __repr__(self):
        return f"SubspaceBasis(dim={self.dim}, ambient={self.ambient_dim})"


def _row_echelon(a: np.ndarray, tol: float):
    """Reduced row echelon form with partial pivoting; returns (rref, pivot columns)."""
    m = a.copy()
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        p = r + int(np.argmax(np.abs(m[r:, c])))
        if abs(m[p, c]) <= tol:
            m[r:, c] = 0.0
            continue
        if p != r:
            m[[r, p]] = m[[p, r]]
        m[r] = m[r] / m[r, c]
        for i in range(rows):
            if i != r and m[i, c] != 0.0:
                m[i] -= m[i, c] * m[r]
        pivots.append(c)
        r += 1
    return m, pivots


def rank(a: np.ndarray, tol: float = DEFAULT_PIVOT_TOL) -> int:
    a = check_finite(a)
    if a.size == 0:
        return 0
    scale = float(np.max(np.abs(a)))
    _, pivots = _row_echelon(a, tol * max(scale, 1.0))
    return len(pivots)


def null_space(a: np.ndarray, tol: float = DEFAULT_PIVOT_TOL) -> SubspaceBasis:
    """Basis of {v : Av = 0} by row reduction; pivots below tol count as zero."""
    a = check_finite(a)
    rows, cols = a.shape
    scale = float(np.max(np.abs(a), initial=0.0))
    m, pivots = _row_echelon(a, tol * max(scale, 1.0))
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for c in free:
        v = np.zeros(cols)
        v[c] = 1.0
        for r, pc in enumerate(pivots):
            v[pc] = -m[r, c]
        basis.append(v)
    return SubspaceBasis(cols, basis)


def solve_linear(a: np.ndarray, b: np.ndarray, tol: float = DEFAULT_PIVOT_TOL) -> np.ndarray:
    """Solve Ax = b (A square) by Gaussian elimination with partial pivoting."""
    a = check_finite(a).copy()
    b = check_finite(np.asarray(b, dtype=float), "right-hand side").copy()
    n = a.shape[0]
    if a.shape != (n, n) or b.shape != (n,):
        raise LinAlgError(f"solve_linear shapes {a.shape}, {b.shape}")
    scale = max(float(np.max(np.abs(a), initial=0.0)), 1.0)
    for c in range(n):
        p = c + int(np.argmax(np.abs(a[c:, c])))
        if abs(a[p, c]) <= tol * scale:
            raise SingularMatrixError(abs(a[p, c]))
        if p != c:
            a[[c, p]] = a[[p, c]]
            b[[c, p]] = b[[p, c]]
        for i in range(c + 1, n):
            f = a[i, c] / a[c, c]
            if f != 0.0:
                a[i, c:] -= f * a[c, c:]
                b[i] -= f * b[c]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - a[i, i + 1 :] @ x[i + 1 :]) / a[i, i]
    return x


def orthonormalize(vectors: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Modified Gram-Schmidt on the rows; drops near-zero remainders."""
    out: list[np.ndarray] = []
    for v in np.asarray(vectors, dtype=float):
        w = v.copy()
        for q in out:
            w -= (q @ w) * q
        for q in out:  # second pass for numerical orthogonality
            w -= (q @ w) * q
        nrm = float(np.sqrt(w @ w))
        if nrm > tol:
            out.append(w / nrm)
    return np.array(out) if out else np.zeros((0, vectors.shape[1]))


def _jacobi_eigenvalues(s: np.ndarray, sweeps: int = 30, tol: float = 1e-14) -> np.ndarray:
    """Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations."""
    a = s.copy()
    n = a.shape[0]
    for _ in range(sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off = max(off, abs(a[p, q]))
                if abs(a[p, q]) <= tol:
                    continue
                theta = 0.5 * np.arctan2(2.0 * a[p, q], a[q, q] - a[p, p])
                c, sn = np.cos(theta), np.sin(theta)
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = sn
                rot[q, p] = -sn
                a = rot.T @ a @ rot
        if off <= tol:
            break
    return np.sort(np.diag(a))


def principal_angle_distance(b1: SubspaceBasis, b2: SubspaceBasis) -> float:
    """Largest principal angle between two spans of equal dimension.

    Small angles use the sine route (singular values of the orthogonal
    residual), which stays accurate where arccos of a near-1 cosine
    would lose half the digits; wide angles use the cosine route.
    """
    if b1.ambient_dim != b2.ambient_dim:
        raise LinAlgError("subspaces live in different ambient dimensions")
    if b1.dim != b2.dim:
        raise LinAlgError(f"subspace dimensions differ: {b1.dim} vs {b2.dim}")
    if b1.dim == 0:
        return 0.0
    q1 = orthonormalize(b1.matrix())
    q2 = orthonormalize(b2.matrix())
    m = q1 @ q2.T
    # residual of span(q2) against span(q1): largest singular value is
    # the sine of the largest principal angle
    r = q2 - m.T @ q1
    sin_sq = float(np.clip(_jacobi_eigenvalues(r @ r.T)[-1], 0.0, 1.0))
    if sin_sq < 0.5:
        return float(np.arcsin(np.sqrt(sin_sq)))
    cos_sq = float(np.clip(_jacobi_eigenvalues(m @ m.T)[0], 0.0, 1.0))
    return float(np.arccos(np.sqrt(cos_sq)))
