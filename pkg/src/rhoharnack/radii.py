"""Membership in C_rho and the operator radius w_rho.

Membership is decided on the unit circle after splitting off the unitary part.
For ``|z| = 1`` the kernel of the remaining block ``C`` is congruent to

    M(theta) = rho I + (1 - rho)(e^{-i theta} C + e^{i theta} C*) + (rho - 2) C*C,

which stays bounded even when ``C`` has spectrum near the circle. Each
``<M(theta) x, x>`` has second derivative at most ``2 (rho - 1) w(C)``, so the
smallest eigenvalue between two samples at spacing ``h`` cannot dip more than
``(rho - 1) w(C) h^2 / 4`` below the sampled minimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DefectiveUnimodularEigenvalue, NotReducing
from .kernel import boundary_form_batch, check_rho, min_eigs
from .linalg import as_matrix, spectral_norm, spectral_radius
from .sampling import MAX_GRID, TorusGrid, argmin_first, map_chunks, refine_maximum, refine_minimum, required_points
from .spectral import UNIMODULAR_TOL, unimodular_decomposition

MEMBERSHIP_TOL = 1e-9
RADIUS_TOL = 1e-6
# angles for the coarse numerical-radius upper bound used by the certificate
_COARSE_ANGLES = 64


@dataclass(frozen=True)
class Membership:
    verdict: str  # "yes" | "no" | "inconclusive"
    margin: float
    certified_margin: float | None
    grid_points: int
    witness_theta: float | None = None
    reason: str = ""

    @property
    def member(self) -> bool:
        """Accepting reading: inconclusive counts as a member."""
        return self.verdict != "no"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "margin": self.margin,
            "certified_margin": self.certified_margin,
            "grid_points": self.grid_points,
            "witness_theta": self.witness_theta,
            "reason": self.reason,
        }


@dataclass(frozen=True)
class RadiiReport:
    rho: float
    value: float
    bracket: tuple[float, float]
    iterations: int
    grid_points: int

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "value": self.value,
            "bracket": list(self.bracket),
            "iterations": self.iterations,
            "grid_points": self.grid_points,
        }


def numerical_radius_profile(T, thetas: np.ndarray) -> np.ndarray:
    """``lambda_max(Re(e^{-i theta} T))`` at each angle."""
    T = np.asarray(T, dtype=np.complex128)
    n = T.shape[0]
    Th = T.conj().T

    def chunk(th: np.ndarray) -> np.ndarray:
        e = np.exp(-1j * th)[:, None, None]
        return np.linalg.eigvalsh(0.5 * (e * T[None] + np.conj(e) * Th[None]))[:, -1]

    return map_chunks(chunk, np.asarray(thetas, dtype=float), n)


def numerical_radius_sweep(T, n_angles: int = 8192) -> float:
    """Numerical radius sampled on ``n_angles`` uniform support directions.

    Never overestimates; doubling ``n_angles`` never decreases the result.
    """
    if n_angles < 64:
        raise ValueError("n_angles must be at least 64")
    T = as_matrix(T)
    return float(max(0.0, np.max(numerical_radius_profile(T, TorusGrid(n_angles).angles))))


def numerical_radius(T, n_angles: int = 1024) -> float:
    """Numerical radius with the sampled maximum polished by a local search."""
    T = as_matrix(T)
    grid = TorusGrid(n_angles)
    prof = numerical_radius_profile(T, grid.angles)
    best = refine_maximum(lambda t: float(numerical_radius_profile(T, np.array([t]))[0]), grid.angles, prof)
    return float(max(0.0, best.value))


def numerical_radius_upper(T, n_angles: int = _COARSE_ANGLES) -> float:
    """Upper bound ``max_k lambda_max(Re(e^{-i theta_k} T)) / cos(pi / n)``."""
    prof = numerical_radius_profile(T, TorusGrid(n_angles).angles)
    return float(max(0.0, np.max(prof)) / np.cos(np.pi / n_angles))


def boundary_margin_profile(C: np.ndarray, rho: float, grid: TorusGrid) -> np.ndarray:
    return min_eigs(boundary_form_batch(C, rho, grid.angles))


def _boundary_min(C: np.ndarray, rho: float, theta: float) -> float:
    return float(min_eigs(boundary_form_batch(C, rho, np.array([theta])))[0])


def is_rho_contraction(T, rho: float, grid: TorusGrid | None = None, *,
                       membership_tol: float = MEMBERSHIP_TOL, radius_tol: float = RADIUS_TOL,
                       unimodular_tol: float = UNIMODULAR_TOL, max_points: int = MAX_GRID) -> Membership:
    """Decide ``T in C_rho`` with a certified boundary sweep."""
    T = as_matrix(T)
    rho = check_rho(rho)
    grid = grid or TorusGrid()
    r = spectral_radius(T)
    if r > 1.0 + radius_tol:
        return Membership("no", 1.0 - r, None, 0, None, "spectrum outside the closed disk")
    try:
        dec = unimodular_decomposition(T, unimodular_tol)
    except DefectiveUnimodularEigenvalue:
        return Membership("no", float("-inf"), None, 0, None, "defective unimodular eigenvalue")
    except NotReducing:
        return Membership("no", float("-inf"), None, 0, None, "unimodular eigenspace is not reducing")
    C = dec.compression
    if C.shape[0] == 0:
        return Membership("yes", 0.0, 0.0, 0, None, "unitary")
    if spectral_radius(C) >= 1.0:
        return Membership("no", 1.0 - spectral_radius(C), None, 0, None, "spectrum outside the closed disk")

    curvature = (rho - 1.0) * numerical_radius_upper(C) / 4.0
    while True:
        prof = boundary_margin_profile(C, rho, grid)
        k = argmin_first(prof)
        gmin = float(prof[k])
        h = grid.spacing
        certified = gmin - curvature * h * h
        if certified >= -membership_tol:
            return Membership("yes", gmin, certified, grid.n_points, float(grid.angles[k]))
        best = refine_minimum(lambda t: _boundary_min(C, rho, t), grid.angles, prof)
        if best.value < -membership_tol:
            return Membership("no", best.value, certified, grid.n_points, best.theta,
                              "kernel has a negative direction on the circle")
        if grid.n_points >= max_points:
            return Membership("inconclusive", best.value, certified, grid.n_points, best.theta,
                              "grid cap reached before certification")
        n = required_points(gmin + membership_tol, curvature, grid.n_points, max_points)
        grid = TorusGrid(n)


def rho_radius(T, rho: float, radius_tol: float = RADIUS_TOL, grid: TorusGrid | None = None) -> RadiiReport:
    """Bisection for ``inf{gamma > 0 : T / gamma in C_rho}``."""
    T = as_matrix(T)
    rho = check_rho(rho)
    grid = grid or TorusGrid()
    norm = spectral_norm(T)
    if norm == 0.0:
        return RadiiReport(rho, 0.0, (0.0, 0.0), 0, 0)
    lo = max(spectral_radius(T), norm / rho)
    hi = norm
    it = 0
    pts = grid.n_points
    while hi - lo > 2.0 * radius_tol:
        mid = 0.5 * (lo + hi)
        m = is_rho_contraction(T / mid, rho, grid)
        pts = max(pts, m.grid_points)
        if m.member:
            hi = mid
        else:
            lo = mid
        it += 1
    return RadiiReport(rho, 0.5 * (lo + hi), (lo, hi), it, pts)
