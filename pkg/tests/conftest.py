from __future__ import annotations

import numpy as np
import pytest

A_SQRT2 = np.sqrt(2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def nilpotent_t0() -> np.ndarray:
    return np.array([[0, 2], [0, 0]], dtype=np.complex128)


def shift3(a: complex = A_SQRT2) -> np.ndarray:
    return np.array([[0, a, 0], [0, 0, a], [0, 0, 0]], dtype=np.complex128)


def jordan(n: int) -> np.ndarray:
    return np.diag(np.ones(n - 1, dtype=np.complex128), 1)


def rand_complex(rng, n: int) -> np.ndarray:
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


def brute_numerical_radius(T: np.ndarray, rng, starts: int = 40) -> float:
    """Maximize |<Tx, x>| over unit vectors by local search from random starts."""
    from scipy.optimize import minimize

    n = T.shape[0]

    def neg(v):
        x = v[:n] + 1j * v[n:]
        nx = np.linalg.norm(x)
        if nx == 0:
            return 0.0
        x = x / nx
        return -abs(np.vdot(x, T @ x))

    best = 0.0
    for _ in range(starts):
        res = minimize(neg, rng.normal(size=2 * n), method="BFGS", options={"gtol": 1e-12})
        best = max(best, -res.fun)
    return best


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
