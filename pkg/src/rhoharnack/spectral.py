"""Unimodular spectrum, the unitary/strict splitting, and the numerical range on the circle.

In finite dimension the spectrum, the point spectrum and the approximate point
spectrum coincide, so everything on the torus is read off eigenvalues.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DefectiveUnimodularEigenvalue, NotReducing, PreconditionFailed
from .kernel import kernel_batch, min_eigs
from .linalg import as_matrix, empty_basis, normalize_phases, orthogonal_complement, spectral_norm, spectral_radius
from .sampling import TorusGrid, map_chunks, refine_minimum

UNIMODULAR_TOL = 1e-8
CLUSTER_TOL = 1e-7
REDUCING_TOL = 1e-8
BOUNDARY_TOL = 1e-7
DEGENERACY_TOL = 1e-4
STABILITY_MARGIN = 1e-10


@dataclass(frozen=True)
class TorusSpectrum:
    """Distinct unimodular eigenvalues with multiplicities and eigenspaces."""

    gamma: tuple[complex, ...] = ()
    multiplicities: tuple[int, ...] = ()
    eigenspaces: tuple[np.ndarray, ...] = ()

    def __len__(self) -> int:
        return len(self.gamma)

    @property
    def is_empty(self) -> bool:
        return not self.gamma

    def index_of(self, lam: complex, tol: float = CLUSTER_TOL) -> int | None:
        for i, g in enumerate(self.gamma):
            if abs(g - lam) <= tol:
                return i
        return None

    def to_dict(self) -> dict:
        return {
            "gamma": [[float(g.real), float(g.imag)] for g in self.gamma],
            "angles": [float(np.angle(g)) for g in self.gamma],
            "multiplicities": list(self.multiplicities),
        }


def _cluster(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Group points within ``tol`` of each other (single linkage, sorted by angle)."""
    if values.size == 0:
        return []
    order = np.argsort(np.mod(np.angle(values), 2 * np.pi), kind="stable")
    groups: list[list[int]] = [[int(order[0])]]
    for i in order[1:]:
        if abs(values[i] - values[groups[-1][-1]]) <= tol:
            groups[-1].append(int(i))
        else:
            groups.append([int(i)])
    # wrap-around between the last and first group
    if len(groups) > 1 and abs(values[groups[0][0]] - values[groups[-1][-1]]) <= tol:
        groups[0] = groups.pop() + groups[0]
    return [np.array(g) for g in groups]


def gamma_set(T, unimodular_tol: float = UNIMODULAR_TOL, cluster_tol: float = CLUSTER_TOL) -> TorusSpectrum:
    """Eigenvalues of ``T`` on the unit circle, grouped with their eigenspaces.

    Raises :class:`DefectiveUnimodularEigenvalue` when a unimodular
    eigenvalue has fewer independent eigenvectors than its algebraic
    multiplicity.
    """
    T = as_matrix(T)
    n = T.shape[0]
    eigs = np.linalg.eigvals(T)
    on = eigs[np.abs(np.abs(eigs) - 1.0) <= unimodular_tol]
    scale = 1.0 + spectral_norm(T)
    gam, mult, spaces = [], [], []
    for grp in _cluster(on, cluster_tol):
        lam0 = complex(np.mean(on[grp]))
        k = int(grp.size)
        _, s, Vh = np.linalg.svd(T - lam0 * np.eye(n))
        thr = 10.0 * cluster_tol * scale
        geo = int(np.sum(s <= thr))
        if geo < k:
            raise DefectiveUnimodularEigenvalue(
                "unimodular eigenvalue is not semisimple",
                eigenvalue=[lam0.real, lam0.imag], algebraic=k, geometric=geo)
        V = normalize_phases(Vh[n - k:].conj().T)
        # Rayleigh quotient is a better estimate than the cluster mean
        lam = complex(np.trace(V.conj().T @ T @ V) / k)
        gam.append(lam)
        mult.append(k)
        spaces.append(V)
    return TorusSpectrum(tuple(gam), tuple(mult), tuple(spaces))


@dataclass(frozen=True)
class UnimodularDecomposition:
    """``T = U (+) C`` with ``U`` diagonal unitary on ``E`` and ``C`` acting on ``E^perp``.

    ``E`` and ``complement`` are orthonormal bases; ``phases`` holds the
    eigenvalue attached to each column of ``E``.
    """

    E: np.ndarray
    phases: np.ndarray
    complement: np.ndarray
    compression: np.ndarray
    residual: float
    spectrum: TorusSpectrum = field(default_factory=TorusSpectrum)

    @property
    def U_block(self) -> np.ndarray:
        return np.diag(self.phases).astype(np.complex128)

    @property
    def dim(self) -> int:
        return self.E.shape[0]

    @property
    def compression_radius(self) -> float:
        return spectral_radius(self.compression)

    def reconstruct(self) -> np.ndarray:
        E, Q = self.E, self.complement
        return E @ self.U_block @ E.conj().T + Q @ self.compression @ Q.conj().T

    def compress(self, S) -> np.ndarray:
        Q = self.complement
        return Q.conj().T @ np.asarray(S) @ Q

    def reducing_residual(self, S) -> float:
        """How far ``E`` is from reducing ``S``."""
        S = np.asarray(S, dtype=np.complex128)
        E, Q = self.E, self.complement
        if E.shape[1] == 0 or Q.shape[1] == 0:
            return 0.0
        return spectral_norm(Q.conj().T @ S @ E) + spectral_norm(E.conj().T @ S @ Q)


def unimodular_decomposition(T, unimodular_tol: float = UNIMODULAR_TOL,
                             reducing_tol: float = REDUCING_TOL) -> UnimodularDecomposition:
    """Split off the span of unimodular eigenvectors.

    Raises :class:`NotReducing` when eigenspaces of distinct unimodular
    eigenvalues are not orthogonal or their span does not reduce ``T``.
    """
    T = as_matrix(T)
    n = T.shape[0]
    spec = gamma_set(T, unimodular_tol)
    tol = reducing_tol * (1.0 + spectral_norm(T))
    for i in range(len(spec)):
        for j in range(i):
            overlap = spectral_norm(spec.eigenspaces[i].conj().T @ spec.eigenspaces[j])
            if overlap > tol:
                raise NotReducing("unimodular eigenspaces are not orthogonal",
                                  overlap=overlap, tol=tol)
    if spec.is_empty:
        E = empty_basis(n)
        phases = np.zeros(0, dtype=np.complex128)
    else:
        E = np.hstack(spec.eigenspaces)
        phases = np.concatenate([np.full(k, g) for g, k in zip(spec.gamma, spec.multiplicities)])
    Q = orthogonal_complement(E, n) if E.shape[1] < n else empty_basis(n)
    dec = UnimodularDecomposition(E=E, phases=phases, complement=Q,
                                  compression=Q.conj().T @ T @ Q, residual=0.0, spectrum=spec)
    res = dec.reducing_residual(T)
    if res > tol:
        raise NotReducing("the unimodular eigenspace does not reduce T", residual=res, tol=tol)
    return UnimodularDecomposition(E=E, phases=phases, complement=Q, compression=dec.compression,
                                   residual=res, spectrum=spec)


@dataclass(frozen=True)
class NumericalRangeTorus:
    points: tuple[complex, ...]
    thetas: np.ndarray
    witnesses: np.ndarray
    on_torus: np.ndarray

    def to_dict(self) -> dict:
        return {
            "count": len(self.points),
            "points": [[float(p.real), float(p.imag)] for p in self.points],
            "angles": [float(np.angle(p)) for p in self.points],
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["theta", "re", "im", "on_torus"])
            for t, w, o in zip(self.thetas, self.witnesses, self.on_torus):
                wr.writerow([repr(float(t)), repr(float(w.real)), repr(float(w.imag)), int(o)])


def support_witnesses(T, thetas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Top eigenvalue of ``Re(e^{-i theta} T)`` and the point ``<Tx, x>`` of its eigenvector."""
    T = as_matrix(T)
    n = T.shape[0]

    def chunk(th: np.ndarray) -> np.ndarray:
        e = np.exp(-1j * th)[:, None, None]
        H = 0.5 * (e * T[None] + np.conj(e) * T.conj().T[None])
        w, V = np.linalg.eigh(H)
        x = V[:, :, -1]
        Tx = x @ T.T
        wit = np.einsum("ki,ki->k", x.conj(), Tx)
        return np.stack([w[:, -1].astype(np.complex128), wit], axis=1)

    out = map_chunks(chunk, np.asarray(thetas, dtype=float), n)
    return out[:, 0].real, out[:, 1]


def numerical_range_torus(T, n_angles: int = 4096, boundary_tol: float = BOUNDARY_TOL) -> NumericalRangeTorus:
    """Points of the numerical range lying on the unit circle.

    For each support direction the top eigenvector of ``Re(e^{-i theta} T)``
    gives a boundary point of ``W(T)``; those within ``boundary_tol`` of the
    circle are kept and merged when closer than half the angular resolution.
    """
    if n_angles < 256:
        raise ValueError("n_angles must be at least 256")
    grid = TorusGrid(n_angles)
    thetas = grid.angles
    _, wit = support_witnesses(T, thetas)
    on = np.abs(np.abs(wit) - 1.0) <= boundary_tol
    cand = wit[on]
    points: list[complex] = []
    if cand.size:
        ang = np.mod(np.angle(cand), 2 * np.pi)
        order = np.argsort(ang, kind="stable")
        half = grid.spacing / 2.0
        groups: list[list[int]] = [[int(order[0])]]
        for i in order[1:]:
            if ang[i] - ang[groups[-1][-1]] < half:
                groups[-1].append(int(i))
            else:
                groups.append([int(i)])
        if len(groups) > 1 and ang[groups[0][0]] + 2 * np.pi - ang[groups[-1][-1]] < half:
            groups[0] = groups.pop() + groups[0]
        for g in groups:
            p = complex(np.mean(cand[g]))
            points.append(p / abs(p))
    return NumericalRangeTorus(tuple(points), thetas, wit, on)


def degenerate_boundary_point(T, grid: TorusGrid | None = None,
                              degeneracy_tol: float = DEGENERACY_TOL) -> tuple[complex, float]:
    """A point of the circle where the rho=2 kernel of ``T`` is (nearly) singular.

    Requires numerical radius one and no unimodular eigenvalues.
    """
    from .radii import numerical_radius

    T = as_matrix(T)
    w = numerical_radius(T)
    if abs(w - 1.0) > 1e-4:
        raise PreconditionFailed("numerical radius must be one", numerical_radius=w)
    if not gamma_set(T).is_empty:
        raise PreconditionFailed("T has unimodular eigenvalues")
    grid = grid or TorusGrid()
    mins = min_eigs(kernel_batch(T, 2.0, grid.points()))

    def f(t: float) -> float:
        K = kernel_batch(T, 2.0, np.array([np.exp(1j * t)]), check=False)[0]
        return float(np.linalg.eigvalsh(K)[0])

    best = refine_minimum(f, grid.angles, mins)
    return complex(np.exp(1j * best.theta)), best.value


def stability_check(T) -> bool:
    """Powers tend to zero: spectral radius below one."""
    return spectral_radius(as_matrix(T)) < 1.0 - STABILITY_MARGIN
