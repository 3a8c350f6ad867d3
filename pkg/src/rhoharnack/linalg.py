"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; subspaces are
``(n, k)`` arrays with orthonormal columns (``k`` may be zero).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import CapacityError, DimensionError, DimensionMismatch, NonHermitianInput

MAX_DIM = 512
HERMITIAN_TOL = 1e-9
ANGLE_TOL = 1e-7


def as_matrix(A, *, name: str = "matrix") -> np.ndarray:
    """Validate and convert ``A`` to a square, finite complex128 array."""
    M = np.asarray(A, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise DimensionError(f"{name} must be a non-empty square matrix", shape=list(M.shape))
    if M.shape[0] > MAX_DIM:
        raise CapacityError(f"{name} has dimension {M.shape[0]} > {MAX_DIM}", dim=M.shape[0])
    if not np.all(np.isfinite(M)):
        raise DimensionError(f"{name} has non-finite entries")
    return M


def adjoint(A: np.ndarray) -> np.ndarray:
    return np.swapaxes(A, -1, -2).conj()


def hermitian_part(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + adjoint(A))


def normalize_phases(V: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rotate each column so its first non-negligible component is real positive."""
    V = np.array(V, dtype=np.complex128, copy=True)
    for j in range(V.shape[1]):
        col = V[:, j]
        nz = np.flatnonzero(np.abs(col) > tol)
        if nz.size:
            v = col[nz[0]]
            V[:, j] = col * (abs(v) / v)
    return V


@dataclass(frozen=True)
class HermitianEigenSystem:
    """Eigenvalues sorted descending with matching orthonormal eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


def hermitian_eig(A, tol: float | None = None) -> HermitianEigenSystem:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending.

    The symmetric part ``(A + A*)/2`` is decomposed; the skew part must be
    below ``tol`` (default ``1e-9 * (1 + ||A||)``).
    """
    A = as_matrix(A)
    scale = 1.0 + np.linalg.norm(A, 2)
    tol = HERMITIAN_TOL * scale if tol is None else tol
    skew = np.linalg.norm(A - A.conj().T, 2)
    if skew > tol:
        raise NonHermitianInput("matrix is not Hermitian", skew=float(skew), tol=float(tol))
    w, V = np.linalg.eigh(hermitian_part(A))
    w, V = w[::-1], V[:, ::-1]
    return HermitianEigenSystem(eigenvalues=w, eigenvectors=normalize_phases(V))


def spectral_norm(A) -> float:
    A = np.asarray(A, dtype=np.complex128)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def spectral_radius(A) -> float:
    A = np.asarray(A, dtype=np.complex128)
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def orthonormalize(V: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the column span of ``V`` (rank-revealing SVD)."""
    V = np.asarray(V, dtype=np.complex128)
    if V.ndim != 2:
        raise DimensionError("basis must be two-dimensional")
    if V.shape[1] == 0:
        return V.copy()
    U, s, _ = np.linalg.svd(V, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 0.0)))
    return normalize_phases(U[:, :rank])


def orthogonal_complement(V: np.ndarray, n: int | None = None) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of span(V)."""
    V = np.asarray(V, dtype=np.complex128)
    n = V.shape[0] if n is None else n
    if V.shape[1] == 0:
        return np.eye(n, dtype=np.complex128)
    Q = scipy.linalg.null_space(V.conj().T)
    return normalize_phases(Q)


def empty_basis(n: int) -> np.ndarray:
    return np.zeros((n, 0), dtype=np.complex128)


def principal_angles(U: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Principal angles (radians, ascending) between two orthonormal bases.

    Returns ``min(k_U, k_W)`` angles in ``[0, pi/2]``.
    """
    U = np.asarray(U, dtype=np.complex128)
    W = np.asarray(W, dtype=np.complex128)
    if U.shape[0] != W.shape[0]:
        raise DimensionMismatch("subspaces live in different ambient spaces",
                                left=U.shape[0], right=W.shape[0])
    k = min(U.shape[1], W.shape[1])
    if k == 0:
        return np.zeros(0)
    s = np.linalg.svd(U.conj().T @ W, compute_uv=False)[:k]
    s = np.clip(s, 0.0, 1.0)
    # arcsin of the sine is accurate for small angles where arccos is not
    if U.shape[1] <= W.shape[1]:
        resid = U - W @ (W.conj().T @ U)
    else:
        resid = W - U @ (U.conj().T @ W)
    sines = np.sort(np.linalg.svd(resid, compute_uv=False))[:k]
    sines = np.clip(sines, 0.0, 1.0)
    angles = np.where(s > np.sqrt(0.5), np.arcsin(sines), np.arccos(np.sort(s)[::-1]))
    return np.sort(angles)


def subspaces_equal(U: np.ndarray, W: np.ndarray, angle_tol: float = ANGLE_TOL) -> bool:
    if U.shape[1] != W.shape[1]:
        return False
    if U.shape[1] == 0:
        return True
    return bool(principal_angles(U, W).max() <= angle_tol)


def subspace_contained(U: np.ndarray, W: np.ndarray, angle_tol: float = ANGLE_TOL) -> bool:
    """True when span(U) lies inside span(W) up to ``angle_tol``."""
    if U.shape[1] == 0:
        return True
    if U.shape[1] > W.shape[1]:
        return False
    return bool(principal_angles(U, W).max() <= angle_tol)


def hermitian_null_basis(K: np.ndarray, rank_tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and a basis of the numerical null space of ``K``.

    An eigenvector belongs to the null space when its eigenvalue has modulus
    at most ``rank_tol * max(1, ||K||)``.
    """
    w, V = np.linalg.eigh(hermitian_part(K))
    thr = rank_tol * max(1.0, float(np.max(np.abs(w))) if w.size else 0.0)
    mask = np.abs(w) <= thr
    return w, normalize_phases(V[:, mask])
