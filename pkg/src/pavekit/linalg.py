"""Dense linear-algebra kernels for small real/complex matrices.

Vectors are rows of numpy arrays; a family of k vectors in dimension n is a
(k, n) array wrapped in :class:`VectorFamily`.  Inner products are linear in
the first argument and conjugate-linear in the second, so ``gram(F)[i, j]``
is ``<f_i, f_j>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Entrywise tolerance for treating a matrix as Hermitian.
HERMITIAN_TOL = 1e-12
# Rank-deficiency cutoff, relative to the largest vector norm in a family.
RANK_TOL = 1e-10


def inner(x: np.ndarray, y: np.ndarray):
    """Inner product <x, y>, linear in x, conjugate-linear in y."""
    return np.vdot(y, x)


def as_matrix(m) -> np.ndarray:
    """Validate and return a nonempty finite 2-d array."""
    a = np.asarray(m)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError("expected a nonempty 2-d matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a.astype(complex if np.iscomplexobj(a) else float, copy=False)


def require_square(m) -> np.ndarray:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    return a


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        return False
    return bool(np.max(np.abs(a - a.conj().T)) <= tol)


def require_hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    a = require_square(m)
    if not is_hermitian(a, tol):
        raise ValueError("matrix is not Hermitian within tolerance")
    return a


@dataclass(frozen=True)
class VectorFamily:
    """Ordered finite family of vectors, stored as rows of a (k, n) array.

    With ``unit_norm`` set, every vector must have norm 1 within 1e-10.
    Instances are immutable; the backing array is marked read-only.
    """

    vectors: np.ndarray
    unit_norm: bool = False

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vectors))
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError("family must contain at least one nonempty vector")
        if not np.all(np.isfinite(v)):
            raise ValueError("family entries must be finite")
        v = v.astype(complex if np.iscomplexobj(v) else float)
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)
        if self.unit_norm:
            norms = np.linalg.norm(v, axis=1)
            if np.any(np.abs(norms - 1.0) > 1e-10):
                raise ValueError("unit_norm family contains a vector with norm != 1")

    @classmethod
    def from_vectors(cls, vectors, unit_norm: bool = False) -> "VectorFamily":
        """Build a family from an iterable of 1-d vectors of equal length."""
        rows = [np.atleast_1d(np.asarray(v)) for v in vectors]
        if not rows:
            raise ValueError("family must contain at least one vector")
        n = rows[0].shape[0]
        if any(r.ndim != 1 or r.shape[0] != n for r in rows):
            raise ValueError("inconsistent ambient dimension")
        return cls(np.array(rows), unit_norm=unit_norm)

    @property
    def size(self) -> int:
        """Number of vectors in the family."""
        return self.vectors.shape[0]

    @property
    def dimension(self) -> int:
        """Ambient dimension."""
        return self.vectors.shape[1]

    @property
    def is_complex(self) -> bool:
        return bool(np.iscomplexobj(self.vectors))

    def subfamily(self, indices) -> "VectorFamily":
        """Subfamily in the given index order (0-based)."""
        idx = list(indices)
        if not idx:
            raise ValueError("subfamily must be nonempty")
        return VectorFamily(self.vectors[idx], unit_norm=self.unit_norm)


def gram(family: VectorFamily) -> np.ndarray:
    """Gram matrix G with G[i, j] = <f_i, f_j>; Hermitian, PSD."""
    v = family.vectors
    g = v @ v.conj().T
    # symmetrize to kill rounding asymmetry; exact for the math
    return (g + g.conj().T) / 2.0


def _deterministic_direction(n: int) -> np.ndarray:
    d = np.sin(np.arange(1, n + 1, dtype=float))
    nd = np.linalg.norm(d)
    if nd == 0.0:  # n == 0 can't happen; sin(1..n) never all zero
        d = np.ones(n)
        nd = math.sqrt(n)
    return d / nd


def operator_norm(m, tol: float = 1e-12, max_iter: int = 10000) -> float:
    """Spectral norm (largest singular value) by power iteration on M*M.

    Deterministic: the start vector is the normalized all-ones vector.  After
    the estimate stagnates, the iterate is perturbed along a fixed direction
    and iteration resumes; the estimate is accepted once a perturbed restart
    fails to improve it.  Works for rectangular input.
    """
    a = as_matrix(m)
    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        return 0.0
    a = a / scale
    ah = a.conj().T
    n = a.shape[1]
    direction = _deterministic_direction(n)

    x = np.ones(n, dtype=a.dtype) / math.sqrt(n)
    budget = max_iter
    best = 0.0
    for _ in range(5):  # initial run plus perturbed confirmations
        est_prev = -1.0
        est = 0.0
        while budget > 0:
            budget -= 1
            y = a @ x
            est = float(np.linalg.norm(y))
            if est == 0.0:
                # x fell into the kernel: deterministic escape
                x = x + direction
                x = x / np.linalg.norm(x)
                est_prev = -1.0
                continue
            z = ah @ y
            x = z / np.linalg.norm(z)
            if est_prev >= 0.0 and abs(est - est_prev) <= tol * est:
                break
            est_prev = est
        if est <= best * (1.0 + 10.0 * tol):
            # perturbed restart did not improve: confirmed
            best = max(best, est)
            break
        best = max(best, est)
        if budget <= 0:
            break
        # large enough that a missed dominant mode climbs visibly instead of
        # stalling below the relative-change threshold
        x = x + 1e-3 * direction
        x = x / np.linalg.norm(x)
    return best * scale


def hermitian_eig_bounds(m, tol: float = HERMITIAN_TOL) -> tuple[float, float]:
    """(lambda_min, lambda_max) of a Hermitian matrix."""
    a = require_hermitian(m, tol)
    evs = np.linalg.eigvalsh((a + a.conj().T) / 2.0)
    return float(evs[0]), float(evs[-1])


def gram_schmidt(family: VectorFamily) -> tuple[VectorFamily, np.ndarray]:
    """Orthonormalize a linearly independent family in its given order.

    Modified Gram-Schmidt with one reorthogonalization pass.  Returns the
    orthonormal family {e_m} and the lower-triangular coefficient matrix K
    with K[m, l] = <f_m, e_l>, so f_m = sum_{l<=m} K[m, l] e_l.  The diagonal
    of K is real and strictly positive.
    """
    v = family.vectors
    k, n = v.shape
    dtype = complex if family.is_complex else float
    scale = float(np.max(np.linalg.norm(v, axis=1)))
    q = np.zeros((k, n), dtype=dtype)
    coeffs = np.zeros((k, k), dtype=dtype)
    for m in range(k):
        w = v[m].astype(dtype, copy=True)
        for _ in range(2):  # MGS + one reorthogonalization pass
            for l in range(m):
                c = inner(w, q[l])
                w = w - c * q[l]
                coeffs[m, l] += c
        r = float(np.linalg.norm(w))
        if r <= RANK_TOL * scale:
            raise ValueError("family not a Riesz basic sequence at working precision")
        coeffs[m, m] = r
        q[m] = w / r
    return VectorFamily(q, unit_norm=True), coeffs


def projection_residual(family: VectorFamily, i: int) -> float:
    """Norm of the orthogonal projection of f_i onto span{f_l : l != i}.

    Computed as the norm of the least-squares fit of f_i by the other
    vectors; 0 for a single-vector family.
    """
    v = family.vectors
    k = v.shape[0]
    if not 0 <= i < k:
        raise IndexError(f"index {i} out of range for family of size {k}")
    if k == 1:
        return 0.0
    others = np.delete(v, i, axis=0)
    coeffs, *_ = np.linalg.lstsq(others.T, v[i], rcond=None)
    fit = others.T @ coeffs
    return float(np.linalg.norm(fit))
