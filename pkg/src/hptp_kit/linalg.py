"""Dense complex-matrix kernel.

Conventions used throughout the package:

* ``vec`` stacks rows, so ``vec(|i><j|) = |i> (x) |j>`` and ``vec(A)`` is simply
  ``A.reshape(-1)``. With this choice ``kron(A, B) @ vec(C) == vec(A @ C @ B.T)``.
* Matrix equality is measured in the max-abs-entry norm.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonHermitianInput, NullRestriction


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds.

    eig_tol: eigenvalues with magnitude at or below this are treated as zero.
    eq_tol: matrices closer than this in max-abs-entry norm are equal.
    sdp_tol: optimality gap / boundary band of the semi-positivity program.
    """

    eig_tol: float = 1e-9
    eq_tol: float = 1e-9
    sdp_tol: float = 1e-7

    def __post_init__(self):
        for name in ("eig_tol", "eq_tol", "sdp_tol"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be a finite nonnegative number, got {value!r}")


DEFAULT_TOLERANCES = Tolerances()


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2 or m.size == 0:
        raise DimensionMismatch(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def dag(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def is_hermitian(a, tol: float = DEFAULT_TOLERANCES.eq_tol) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and max_abs(a - dag(a)) <= tol


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


def vec(a) -> np.ndarray:
    """Row-stacking vectorization, returned as an ``(r*c, 1)`` column."""
    a = as_matrix(a)
    return a.reshape(-1, 1)


def unvec(v, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Inverse of :func:`vec`. Square output unless ``shape`` is given."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    if shape is None:
        d = int(round(np.sqrt(v.size)))
        if d * d != v.size:
            raise DimensionMismatch(f"cannot unvec length {v.size} into a square matrix")
        shape = (d, d)
    if shape[0] * shape[1] != v.size:
        raise DimensionMismatch(f"cannot unvec length {v.size} into shape {shape}")
    return v.reshape(shape)


def partial_trace(a, dim1: int, dim2: int, which: str = "second") -> np.ndarray:
    """Trace out one factor of a matrix on ``C^dim1 (x) C^dim2``.

    ``which="first"`` removes the ``dim1`` factor, ``which="second"`` the ``dim2`` one.
    """
    a = as_matrix(a)
    d = dim1 * dim2
    if a.shape != (d, d):
        raise DimensionMismatch(f"expected a {d}x{d} matrix for dims ({dim1}, {dim2}), got {a.shape}")
    t = a.reshape(dim1, dim2, dim1, dim2)
    if which == "first":
        return np.einsum("ijik->jk", t)
    if which == "second":
        return np.einsum("ijkj->ik", t)
    raise ValueError(f"which must be 'first' or 'second', got {which!r}")


def _require_hermitian(a: np.ndarray, tol: float, exc=NonHermitianInput) -> None:
    if a.shape[0] != a.shape[1]:
        raise exc(f"matrix of shape {a.shape} is not square")
    dev = max_abs(a - dag(a))
    if dev > tol:
        raise exc(f"matrix is not Hermitian (max |a - a^dag| = {dev:.3e} > {tol:.1e})")


def eig_hermitian(a, tol: float = DEFAULT_TOLERANCES.eq_tol) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix with eigenvalues in descending order.

    Returns ``(w, v)`` with ``a = v @ diag(w) @ v^dag``. The input is rejected (not
    symmetrized) when it is not Hermitian within ``tol``.
    """
    a = as_matrix(a)
    _require_hermitian(a, tol)
    w, v = np.linalg.eigh((a + dag(a)) / 2)
    return w[::-1].copy(), v[:, ::-1].copy()


def min_eigenvalue(a) -> float:
    """Smallest eigenvalue of the Hermitian part of ``a`` (no Hermiticity check)."""
    a = np.asarray(a)
    return float(np.linalg.eigvalsh((a + dag(a)) / 2)[0])


def is_psd(a, tol: float = DEFAULT_TOLERANCES.eig_tol, herm_tol: float = DEFAULT_TOLERANCES.eq_tol) -> bool:
    a = as_matrix(a)
    _require_hermitian(a, herm_tol)
    return min_eigenvalue(a) >= -tol


def orthonormal_completion(q: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Columns completing the orthonormal columns of ``q`` to a basis.

    Gram-Schmidt over the standard basis with pivoting: at each step the standard
    basis vector with the largest component outside the current span is taken.
    Deterministic for fixed input.
    """
    q = np.asarray(q, dtype=complex)
    dim, r = q.shape
    basis = [q[:, j] for j in range(r)]
    out = []
    candidates = np.eye(dim, dtype=complex)
    while len(basis) < dim:
        if basis:
            b = np.stack(basis, axis=1)
            # two passes of projection for numerical orthogonality
            resid = candidates - b @ (dag(b) @ candidates)
            resid = resid - b @ (dag(b) @ resid)
        else:
            resid = candidates.copy()
        norms = np.linalg.norm(resid, axis=0)
        k = int(np.argmax(norms))
        if norms[k] <= tol:
            raise ArithmeticError("orthonormal completion failed: input columns are not independent")
        new = resid[:, k] / norms[k]
        basis.append(new)
        out.append(new)
    if not out:
        return np.zeros((dim, 0), dtype=complex)
    return np.stack(out, axis=1)


def range_basis(a, tol: float = DEFAULT_TOLERANCES.eig_tol) -> np.ndarray:
    """Orthonormal basis (as columns) of the column space of ``a``."""
    a = as_matrix(a)
    u, s, _ = np.linalg.svd(a)
    r = int(np.sum(s > tol))
    return u[:, :r]


def polar_unitary_on_subspace(a, p, tol: float = DEFAULT_TOLERANCES.eig_tol) -> np.ndarray:
    """Unitary factor ``U`` of the polar decomposition ``a p = U sqrt(p a^dag a p)``.

    On the support of ``p a^dag a p`` the unitary is fixed by the decomposition; it is
    extended to the whole space by mapping the complement of the row space onto the
    complement of the column space (pivoted Gram-Schmidt completion on both sides).
    """
    a = as_matrix(a, "a")
    p = as_matrix(p, "p")
    if a.shape[0] != a.shape[1] or a.shape != p.shape:
        raise DimensionMismatch(f"a {a.shape} and p {p.shape} must be square of equal size")
    m = a @ p
    w, s, vh = np.linalg.svd(m)
    r = int(np.sum(s > tol))
    if r == 0:
        raise NullRestriction("a annihilates the range of p")
    w_r, v_r = w[:, :r], dag(vh)[:, :r]
    u = w_r @ dag(v_r)
    if r < a.shape[0]:
        u = u + orthonormal_completion(w_r) @ dag(orthonormal_completion(v_r))
    return u


def sqrtm_psd(a) -> np.ndarray:
    """Principal square root of a PSD matrix (negative round-off clipped)."""
    w, v = np.linalg.eigh((a + dag(a)) / 2)
    return (v * np.sqrt(np.clip(w, 0, None))) @ dag(v)


def inv_sqrtm_pd(a) -> np.ndarray:
    w, v = np.linalg.eigh((a + dag(a)) / 2)
    if w[0] <= 0:
        raise ArithmeticError("matrix is not positive definite")
    return (v / np.sqrt(w)) @ dag(v)


def trace_norm(a) -> float:
    return float(np.sum(np.linalg.svd(np.asarray(a), compute_uv=False)))
