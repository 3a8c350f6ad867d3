"""Analytic polynomials with nonnegative real part on the closed disk.

``herglotz_completion(q)`` returns ``p`` with ``Re p(e^{i theta}) = |q(e^{i theta})|^2``;
harmonicity of ``Re p`` carries the sign into the disk. These polynomials are
used to test the functional form of Harnack domination

    Re p(T1) <= c^2 Re p(T0) + (c^2 - 1)(rho - 1) Re p(0) I.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ZeroPolynomial
from .linalg import as_matrix, hermitian_part

MAX_DEGREE = 32
DOM_TOL = 1e-7


@dataclass(frozen=True)
class AnalyticPolynomial:
    """``p(z) = sum_k coefficients[k] z^k``."""

    coefficients: tuple[complex, ...]

    def __post_init__(self) -> None:
        if len(self.coefficients) == 0:
            raise ValueError("a polynomial needs at least one coefficient")
        if len(self.coefficients) - 1 > MAX_DEGREE:
            raise ValueError(f"degree is capped at {MAX_DEGREE}")

    @classmethod
    def of(cls, coeffs) -> "AnalyticPolynomial":
        return cls(tuple(complex(c) for c in np.atleast_1d(coeffs)))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coefficients, dtype=np.complex128)

    def __call__(self, z):
        # np.polyval wants the leading coefficient first
        return np.polyval(self.array[::-1], z)

    def at_matrix(self, T) -> np.ndarray:
        """``p(T)`` by Horner's rule."""
        T = np.asarray(T, dtype=np.complex128)
        n = T.shape[0]
        acc = self.coefficients[-1] * np.eye(n, dtype=np.complex128)
        for c in reversed(self.coefficients[:-1]):
            acc = acc @ T + c * np.eye(n)
        return acc

    def real_part_at(self, T) -> np.ndarray:
        return hermitian_part(self.at_matrix(T))

    def boundary_real_part(self, n_points: int = 8192) -> np.ndarray:
        z = np.exp(2j * np.pi * np.arange(n_points) / n_points)
        return np.real(self(z))


def herglotz_completion(q: AnalyticPolynomial) -> AnalyticPolynomial:
    """Analytic ``p`` of the same degree with ``Re p = |q|^2`` on the circle.

    With autocorrelations ``c_k = sum_j conj(q_j) q_{j+k}``,
    ``p = c_0 + 2 sum_{k>=1} c_k z^k``.
    """
    a = q.array
    if not np.any(a != 0):
        raise ZeroPolynomial("q is identically zero")
    d = a.size - 1
    c = np.array([np.vdot(a[: a.size - k], a[k:]) for k in range(d + 1)])
    coeffs = 2.0 * c
    coeffs[0] = c[0].real
    return AnalyticPolynomial.of(coeffs)


def random_polynomial(rng: np.random.Generator, max_degree: int = 6) -> AnalyticPolynomial:
    """Random ``q`` with complex Gaussian coefficients and degree in ``0..max_degree``."""
    d = int(rng.integers(0, max_degree + 1))
    coeffs = rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)
    return AnalyticPolynomial.of(coeffs)


def random_herglotz(rng: np.random.Generator, max_degree: int = 6) -> AnalyticPolynomial:
    return herglotz_completion(random_polynomial(rng, max_degree))


class ConditionCheck(NamedTuple):
    holds: bool
    margin: float


def condition_i_check(T1, T0, rho: float, c: float, p: AnalyticPolynomial, *,
                      dom_tol: float = DOM_TOL, scale: float = 1.0) -> ConditionCheck:
    """Smallest eigenvalue of ``c^2 Re p(T0) + (c^2-1)(rho-1) Re p(0) I - Re p(T1)``.

    ``scale`` evaluates at ``scale*T1`` and ``scale*T0`` (the radial form of
    the condition).
    """
    T1 = as_matrix(T1, name="T1") * scale
    T0 = as_matrix(T0, name="T0") * scale
    n = T0.shape[0]
    p0 = float(np.real(p.coefficients[0]))
    G = c * c * p.real_part_at(T0) + (c * c - 1.0) * (rho - 1.0) * p0 * np.eye(n) - p.real_part_at(T1)
    margin = float(np.linalg.eigvalsh(hermitian_part(G))[0])
    return ConditionCheck(margin >= -dom_tol, margin)
