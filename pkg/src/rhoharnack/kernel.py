"""The operatorial rho-kernel and its positivity margins.

For a matrix ``T`` with spectrum off the point ``1/conj(z)`` the kernel is

    K_z(T) = (I - conj(z) T)^-1 + (I - z T*)^-1 + (rho - 2) I,

a Hermitian matrix that is harmonic in ``z``. ``T`` is a rho-contraction iff
``K_z(T) >= 0`` on the open disk (and the spectrum lies in the closed disk).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import SingularResolvent, UnsupportedRho
from .linalg import adjoint, as_matrix, hermitian_null_basis, hermitian_part, spectral_norm
from .sampling import MAX_GRID, RadialSchedule, TorusGrid, argmin_first, map_chunks

RANK_TOL = 1e-8
RESOLVENT_TOL = 1e-8
CONDITION_LIMIT = 1e12
LIPSCHITZ_SAFETY = 1.25


def check_rho(rho: float) -> float:
    rho = float(rho)
    if not np.isfinite(rho) or rho < 1.0:
        raise UnsupportedRho(f"rho must be >= 1, got {rho}", rho=rho)
    return rho


@dataclass(frozen=True)
class KernelSample:
    z: complex
    rho: float
    value: np.ndarray
    eigenvalues: np.ndarray  # ascending
    null_basis: np.ndarray

    @property
    def min_eig(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def kernel_dim(self) -> int:
        return int(self.null_basis.shape[1])

    def to_dict(self) -> dict:
        n = self.value.shape[0]
        return {
            "z": [self.z.real, self.z.imag],
            "rho": self.rho,
            "min_eig": self.min_eig,
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "kernel_dim": self.kernel_dim,
            "value": [[[float(self.value[i, j].real), float(self.value[i, j].imag)]
                       for j in range(n)] for i in range(n)],
        }


def _check_spectrum(eigs: np.ndarray, zs: np.ndarray, tol: float) -> None:
    """Raise when some ``1/conj(z)`` sits within ``tol`` of the spectrum."""
    zs = np.atleast_1d(zs)
    if eigs.size == 0:
        return
    nz = np.abs(zs) > 0
    if not np.any(nz):
        return
    zc = np.conj(zs[nz])
    # |1 - conj(z) lam| / |z| <= tol, written without dividing by a tiny |z|
    gap = np.min(np.abs(1.0 - zc[:, None] * eigs[None, :]), axis=1)
    bad = np.flatnonzero(gap <= tol * np.abs(zc))
    if bad.size:
        k = bad[0]
        z = zs[nz][k]
        raise SingularResolvent("1/conj(z) is too close to the spectrum",
                                z=[float(z.real), float(z.imag)], theta=float(np.angle(z)),
                                distance=float(gap[k] / abs(zc[k])))


def kernel_batch(T: np.ndarray, rho: float, zs: np.ndarray, *,
                 resolvent_tol: float = RESOLVENT_TOL, check: bool = True) -> np.ndarray:
    """Kernels at many points, shape ``(len(zs), n, n)``, symmetrized."""
    T = np.asarray(T, dtype=np.complex128)
    zs = np.asarray(zs, dtype=np.complex128).ravel()
    n = T.shape[0]
    if check:
        _check_spectrum(np.linalg.eigvals(T), zs, resolvent_tol)
    eye = np.eye(n, dtype=np.complex128)

    def chunk(zc: np.ndarray) -> np.ndarray:
        A = eye[None] - np.conj(zc)[:, None, None] * T[None]
        X = np.linalg.solve(A, np.broadcast_to(eye, A.shape))
        K = X + adjoint(X) + (rho - 2.0) * eye[None]
        return hermitian_part(K)

    return map_chunks(chunk, zs, n)


def boundary_form_batch(T: np.ndarray, rho: float, thetas: np.ndarray) -> np.ndarray:
    """``rho I + 2(1-rho) Re(e^{-i theta} T) + (rho-2) T*T`` on the unit circle.

    This is congruent to the kernel at ``z = e^{i theta}`` through
    ``I - e^{-i theta} T``, so it has the same inertia wherever that factor is
    invertible, and it stays bounded where the kernel does not.
    """
    T = np.asarray(T, dtype=np.complex128)
    n = T.shape[0]
    thetas = np.asarray(thetas, dtype=float).ravel()
    base = rho * np.eye(n) + (rho - 2.0) * (T.conj().T @ T)
    base = hermitian_part(base)
    Th = T.conj().T

    def chunk(th: np.ndarray) -> np.ndarray:
        e = np.exp(-1j * th)[:, None, None]
        return base[None] + (1.0 - rho) * (e * T[None] + np.conj(e) * Th[None])

    return map_chunks(chunk, thetas, n)


def min_eigs(stack: np.ndarray) -> np.ndarray:
    n = stack.shape[-1] if stack.ndim == 3 else 1
    return map_chunks(lambda s: np.linalg.eigvalsh(s)[:, 0], stack, n)


def all_eigs(stack: np.ndarray) -> np.ndarray:
    n = stack.shape[-1] if stack.ndim == 3 else 1
    return map_chunks(np.linalg.eigvalsh, stack, n)


def kernel_matrix(T, rho: float, z: complex, *, resolvent_tol: float = RESOLVENT_TOL) -> np.ndarray:
    T = as_matrix(T)
    rho = check_rho(rho)
    z = complex(z)
    _check_spectrum(np.linalg.eigvals(T), np.array([z]), resolvent_tol)
    A = np.eye(T.shape[0]) - np.conj(z) * T
    if np.linalg.cond(A) > CONDITION_LIMIT:
        raise SingularResolvent("I - conj(z) T is numerically singular",
                                z=[z.real, z.imag], theta=float(np.angle(z)))
    X = np.linalg.solve(A, np.eye(T.shape[0]))
    K = X + X.conj().T + (rho - 2.0) * np.eye(T.shape[0])
    return hermitian_part(K)


def _sample(z: complex, rho: float, K: np.ndarray, rank_tol: float) -> KernelSample:
    w, null = hermitian_null_basis(K, rank_tol)
    return KernelSample(z=complex(z), rho=rho, value=K, eigenvalues=w, null_basis=null)


def eval_kernel_resolvent(T, rho: float, z: complex, *, rank_tol: float = RANK_TOL,
                          resolvent_tol: float = RESOLVENT_TOL) -> KernelSample:
    """Kernel sample from the resolvent formula."""
    rho = check_rho(rho)
    K = kernel_matrix(T, rho, z, resolvent_tol=resolvent_tol)
    return _sample(z, rho, K, rank_tol)


def eval_kernel_factored(T, rho: float, z: complex, *, rank_tol: float = RANK_TOL,
                         resolvent_tol: float = RESOLVENT_TOL) -> KernelSample:
    """Kernel sample from the factorization

        K = (I - z T*)^-1 [rho I + 2(1-rho) Re(conj(z) T) + (rho-2)|z|^2 T*T] (I - conj(z) T)^-1.

    Independent of :func:`eval_kernel_resolvent`; used as a cross-check.
    """
    T = as_matrix(T)
    rho = check_rho(rho)
    z = complex(z)
    n = T.shape[0]
    _check_spectrum(np.linalg.eigvals(T), np.array([z]), resolvent_tol)
    A = np.eye(n) - np.conj(z) * T
    if np.linalg.cond(A) > CONDITION_LIMIT:
        raise SingularResolvent("I - conj(z) T is numerically singular",
                                z=[z.real, z.imag], theta=float(np.angle(z)))
    zT = np.conj(z) * T
    middle = (rho * np.eye(n) + (1.0 - rho) * (zT + zT.conj().T)
              + (rho - 2.0) * abs(z) ** 2 * (T.conj().T @ T))
    X = np.linalg.inv(A)
    K = X.conj().T @ middle @ X
    return _sample(z, rho, hermitian_part(K), rank_tol)


def kernel_null_basis(T, rho: float, z: complex, *, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the numerical kernel of ``K_z(T)``."""
    return eval_kernel_resolvent(T, rho, z, rank_tol=rank_tol).null_basis


class CircleMargin(NamedTuple):
    margin: float
    index: int
    theta: float


def circle_profile(T, rho: float, grid: TorusGrid | None = None, r: float = 1.0, *,
                   rank_tol: float = RANK_TOL) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-angle smallest eigenvalue and kernel dimension on the circle ``|z| = r``."""
    T = as_matrix(T)
    rho = check_rho(rho)
    grid = grid or TorusGrid()
    K = kernel_batch(T, rho, grid.points(r))
    w = all_eigs(K)
    scale = np.maximum(1.0, np.max(np.abs(w), axis=1))
    dims = np.sum(np.abs(w) <= rank_tol * scale[:, None], axis=1)
    return grid.angles, w[:, 0], dims


def kernel_margin_on_circle(T, rho: float, r: float = 1.0, grid: TorusGrid | None = None) -> CircleMargin:
    """Minimum over the grid of the smallest kernel eigenvalue on ``|z| = r``.

    Ties resolve to the lowest angle index.
    """
    thetas, mins, _ = circle_profile(T, rho, grid, r)
    k = argmin_first(mins)
    return CircleMargin(float(mins[k]), k, float(thetas[k]))


def write_margins_csv(path, thetas: np.ndarray, mins: np.ndarray, dims: np.ndarray) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["theta", "min_eig", "kernel_dim"])
        for t, m, d in zip(thetas, mins, dims):
            wr.writerow([repr(float(t)), repr(float(m)), int(d)])


def sandwich_norm_bound(T, rho: float, z: complex, lam: complex) -> tuple[float, float]:
    """Bound on ``||(I - conj(lam) T) K_z(T) (I - lam T*)||`` for rho-contractions.

    Returns ``(bound, actual)`` where

        bound = rho (1 + 2|1-rho| + |rho-2| rho) (1 + rho |z-lam| / (1-|z|))^2,

    valid for ``|z| < 1``, ``|lam| <= 1`` whenever ``w_rho(T) <= 1``.
    """
    T = as_matrix(T)
    rho = check_rho(rho)
    z, lam = complex(z), complex(lam)
    if abs(z) >= 1.0:
        raise ValueError("z must lie in the open unit disk")
    bound = rho * (1 + 2 * abs(1 - rho) + abs(rho - 2) * rho) * (1 + rho * abs(z - lam) / (1 - abs(z))) ** 2
    n = T.shape[0]
    K = kernel_matrix(T, rho, z)
    L = np.eye(n) - np.conj(lam) * T
    actual = spectral_norm(L @ K @ L.conj().T)
    return float(bound), float(actual)


class CertifiedMargin(NamedTuple):
    certified: float
    grid_margin: float
    lipschitz: float
    spacing: float
    n_points: int


def lipschitz_constant(T, r: float, zs: np.ndarray) -> float:
    """``2 r ||T|| max ||(I - conj(z) T)^-1||^2 * safety`` over the sample points."""
    T = np.asarray(T, dtype=np.complex128)
    n = T.shape[0]
    eye = np.eye(n)

    def chunk(zc: np.ndarray) -> np.ndarray:
        A = eye[None] - np.conj(zc)[:, None, None] * T[None]
        X = np.linalg.solve(A, np.broadcast_to(eye, A.shape))
        return np.linalg.norm(X, ord=2, axis=(1, 2))

    norms = map_chunks(chunk, np.asarray(zs), n)
    return float(2.0 * r * spectral_norm(T) * np.max(norms) ** 2 * LIPSCHITZ_SAFETY)


def lipschitz_certified_margin(T, rho: float, grid: TorusGrid | None = None, r: float = 1.0) -> CertifiedMargin:
    """Lower bound on the smallest kernel eigenvalue over the whole circle.

    Eigenvalues move no faster than the kernel itself, so between samples the
    smallest eigenvalue drops by at most ``L h / 2`` with ``h`` the angular
    spacing and ``L`` a bound on ``||dK/dtheta||``. A positive return
    certifies positivity on the entire circle (in floating point).
    """
    T = as_matrix(T)
    rho = check_rho(rho)
    grid = grid or TorusGrid()
    zs = grid.points(r)
    K = kernel_batch(T, rho, zs)
    mins = min_eigs(K)
    L = lipschitz_constant(T, r, zs)
    g = float(np.min(mins))
    h = grid.spacing
    return CertifiedMargin(g - L * h / 2.0, g, L, h, grid.n_points)


def certify_on_circle(T, rho: float, grid: TorusGrid | None = None, r: float = 1.0,
                      max_points: int = MAX_GRID) -> CertifiedMargin:
    """Double the grid until the certified margin is positive or the cap is hit."""
    grid = grid or TorusGrid()
    while True:
        cm = lipschitz_certified_margin(T, rho, grid, r)
        if cm.certified > 0 or grid.n_points * 2 > max_points:
            return cm
        grid = grid.doubled()


def radial_margins(T, rho: float, schedule: RadialSchedule | None = None,
                   grid: TorusGrid | None = None) -> list[tuple[float, float]]:
    """Kernel margins on circles ``r T`` approaching the boundary."""
    schedule = schedule or RadialSchedule()
    return [(float(r), kernel_margin_on_circle(T, rho, r, grid).margin) for r in schedule.radii]
