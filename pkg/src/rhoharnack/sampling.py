"""Deterministic sampling of the circle and grid-sweep plumbing.

Grid sweeps are split into chunks whose size depends only on the problem
shape, never on the thread count, so every reduction is bit-identical for
any number of workers.
"""

from __future__ import annotations

import contextlib
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

DEFAULT_GRID = 2048
MAX_GRID = 2**17
# complex entries per chunk; keeps batched (m, n, n) arrays small
_CHUNK_BUDGET = 2**18

_threads = max(1, int(os.environ.get("RHOHARNACK_THREADS", "1") or 1))


def get_threads() -> int:
    return _threads


def set_threads(n: int) -> None:
    global _threads
    if n < 1:
        raise ValueError("thread count must be positive")
    _threads = int(n)


@contextlib.contextmanager
def threads(n: int) -> Iterator[None]:
    old = get_threads()
    set_threads(n)
    try:
        yield
    finally:
        set_threads(old)


@dataclass(frozen=True)
class TorusGrid:
    """Uniform angles ``2*pi*k/n_points`` on the unit circle."""

    n_points: int = DEFAULT_GRID

    def __post_init__(self) -> None:
        if int(self.n_points) != self.n_points or self.n_points < 8:
            raise ValueError("TorusGrid needs an integer n_points >= 8")

    @property
    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_points) / self.n_points

    @property
    def spacing(self) -> float:
        return 2.0 * np.pi / self.n_points

    def points(self, r: float = 1.0) -> np.ndarray:
        return r * np.exp(1j * self.angles)

    def doubled(self) -> "TorusGrid":
        return TorusGrid(self.n_points * 2)


@dataclass(frozen=True)
class RadialSchedule:
    """Increasing radii in (0, 1) approaching the boundary, ``1 - 2**-j``."""

    radii: tuple[float, ...] = field(default_factory=lambda: tuple(1.0 - 2.0 ** -j for j in range(1, 11)))

    def __post_init__(self) -> None:
        r = np.asarray(self.radii, dtype=float)
        if r.size == 0 or np.any(r <= 0) or np.any(r >= 1) or np.any(np.diff(r) <= 0):
            raise ValueError("radii must be strictly increasing in (0, 1)")

    @classmethod
    def geometric(cls, depth: int) -> "RadialSchedule":
        return cls(tuple(1.0 - 2.0 ** -j for j in range(1, depth + 1)))


def chunk_size(dim: int) -> int:
    return max(1, _CHUNK_BUDGET // max(1, dim * dim))


def map_chunks(fn: Callable[[np.ndarray], np.ndarray], values: np.ndarray, dim: int) -> np.ndarray:
    """Apply ``fn`` to fixed-size chunks of ``values`` and concatenate.

    ``fn`` must be a pure function of its chunk. Chunk boundaries depend on
    ``dim`` only, so results do not depend on the worker count.
    """
    values = np.asarray(values)
    step = chunk_size(dim)
    pieces = [values[i:i + step] for i in range(0, len(values), step)]
    if len(pieces) <= 1 or _threads == 1:
        out = [fn(p) for p in pieces]
    else:
        with ThreadPoolExecutor(max_workers=_threads) as pool:
            out = list(pool.map(fn, pieces))
    return np.concatenate(out, axis=0) if out else np.zeros(0)


def argmin_first(values: np.ndarray) -> int:
    """Index of the minimum; ties resolved to the lowest index."""
    return int(np.argmin(values))


class Refined(NamedTuple):
    value: float
    theta: float


def refine_minimum(func: Callable[[float], float], thetas: np.ndarray, values: np.ndarray,
                   *, max_candidates: int = 8, xatol: float = 1e-13) -> Refined:
    """Polish the lowest cyclic local minima of a sampled periodic function.

    Each candidate grid minimum is refined by bounded Brent search on the two
    adjacent cells. The result is never worse than the best grid sample.
    """
    values = np.asarray(values, dtype=float)
    n = values.size
    k0 = argmin_first(values)
    best = Refined(float(values[k0]), float(thetas[k0]))
    if n < 3:
        return best
    prev, nxt = np.roll(values, 1), np.roll(values, -1)
    cand = np.flatnonzero((values <= prev) & (values <= nxt))
    order = np.lexsort((cand, values[cand]))[:max_candidates]
    h = 2.0 * np.pi / n
    for k in cand[order]:
        t = float(thetas[k])
        res = minimize_scalar(func, bounds=(t - h, t + h), method="bounded",
                              options={"xatol": xatol, "maxiter": 200})
        if res.fun < best.value:
            best = Refined(float(res.fun), float(np.mod(res.x, 2.0 * np.pi)))
    return best


def refine_maximum(func: Callable[[float], float], thetas: np.ndarray, values: np.ndarray,
                   **kwargs) -> Refined:
    r = refine_minimum(lambda t: -func(t), thetas, -np.asarray(values, dtype=float), **kwargs)
    return Refined(-r.value, r.theta)


def next_pow2(x: float) -> int:
    return 1 << max(0, int(np.ceil(np.log2(max(1.0, x)))))


def required_points(gap: float, curvature: float, current: int, cap: int = MAX_GRID) -> int:
    """Smallest doubled grid on which a quadratic certificate with the given
    ``curvature`` (bound on ``|f''|/8``-style slack per ``h**2``) fits in ``gap``.
    """
    if curvature <= 0:
        return current
    if gap <= 0:
        return cap
    h = np.sqrt(gap / curvature)
    n = next_pow2(2.0 * np.pi / h)
    n = max(n, 2 * current)
    return int(min(n, cap))
