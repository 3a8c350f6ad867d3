"""Harnack domination and equivalence between rho-contractions.

Everything is evaluated on boundary kernels. After splitting ``T = U (+) C``
along the unimodular eigenspace ``E`` the boundary value of the kernel at
``e^{i theta}`` is

    K_bd(theta) = (rho - 1) P_E + Q K_theta(C) Q*,

plus Poisson point masses at the unimodular eigenvalues. The point masses are
compared exactly (eigenvalue and eigenspace inclusion with ``c >= 1``); the
continuous parts are compared sample by sample on a torus grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ClassViolation, DefectiveUnimodularEigenvalue, NotReducing, NotUnitary, PreconditionFailed
from .kernel import RANK_TOL, check_rho, kernel_batch, lipschitz_constant
from .linalg import ANGLE_TOL, adjoint, as_matrix, hermitian_null_basis, spectral_norm, subspace_contained, subspaces_equal
from .radii import Membership, is_rho_contraction
from .sampling import TorusGrid, argmin_first, map_chunks, refine_minimum
from .spectral import CLUSTER_TOL, REDUCING_TOL, TorusSpectrum, UnimodularDecomposition, gamma_set, unimodular_decomposition

DOM_TOL = 1e-7
C_CAP = 1e6
CONFIRM_SLACK = 1e-6
RESTRICTION_TOL = 1e-8
CONTRACTION_TOL = 1e-9

THEOREM_DOMINATION = "kernel inequality K(T1) <= c^2 K(T0) on the disk"
THEOREM_EQUIVALENCE = "equal boundary kernels for compact rho-contractions, after unitary splitting"
THEOREM_CONTRACTION = "contraction criterion: equal defect kernels and equal restrictions"
THEOREM_CONJUGATION = "unitary conjugation preserving boundary kernels"


# ---------------------------------------------------------------- boundary model

@dataclass(frozen=True)
class BoundaryModel:
    """Boundary kernels of a class member, computed through its unimodular splitting."""

    T: np.ndarray
    rho: float
    dec: UnimodularDecomposition

    @classmethod
    def of(cls, T, rho: float) -> "BoundaryModel":
        T = as_matrix(T)
        return cls(T, rho, unimodular_decomposition(T))

    @property
    def n(self) -> int:
        return self.T.shape[0]

    def kernels(self, thetas: np.ndarray) -> np.ndarray:
        E, Q, C = self.dec.E, self.dec.complement, self.dec.compression
        n = self.n
        base = (self.rho - 1.0) * (E @ E.conj().T)
        thetas = np.asarray(thetas, dtype=float)
        if C.shape[0] == 0:
            return np.broadcast_to(base, (thetas.size, n, n)).copy()
        KC = kernel_batch(C, self.rho, np.exp(1j * thetas))

        def chunk(Kc: np.ndarray) -> np.ndarray:
            return base[None] + Q[None] @ Kc @ Q.conj().T[None]

        return map_chunks(chunk, KC, n)

    def lipschitz(self, grid: TorusGrid) -> float:
        C = self.dec.compression
        if C.shape[0] == 0:
            return 0.0
        return lipschitz_constant(C, 1.0, grid.points())


def _require_member(T: np.ndarray, rho: float, grid: TorusGrid, name: str) -> Membership:
    m = is_rho_contraction(T, rho, grid)
    if m.verdict == "no":
        raise ClassViolation(f"{name} is not a rho-contraction", operand=name, rho=rho,
                             reason=m.reason, margin=m.margin)
    return m


class GammaCheck(NamedTuple):
    ok: bool
    eigenvalue: complex | None
    vector: np.ndarray | None
    reason: str


def gamma_inclusion(sub: TorusSpectrum, sup: TorusSpectrum, angle_tol: float = ANGLE_TOL,
                    cluster_tol: float = CLUSTER_TOL) -> GammaCheck:
    """Unimodular eigenvalues and eigenspaces of ``sub`` contained in those of ``sup``."""
    for lam, V in zip(sub.gamma, sub.eigenspaces):
        j = sup.index_of(lam, cluster_tol)
        if j is None:
            return GammaCheck(False, lam, V[:, 0], "eigenvalue missing")
        W = sup.eigenspaces[j]
        if not subspace_contained(V, W, angle_tol):
            resid = V - W @ (W.conj().T @ V)
            k = int(np.argmax(np.linalg.norm(resid, axis=0)))
            x = resid[:, k] / np.linalg.norm(resid[:, k])
            return GammaCheck(False, lam, x, "eigenspace not contained")
    return GammaCheck(True, None, None, "")


# ---------------------------------------------------------------- pencil kernels

class PencilStats(NamedTuple):
    """Per-sample data for the pencil ``(K1, K0)`` restricted to ``(ker K0)^perp``."""

    null_dim: np.ndarray
    leak: np.ndarray
    leak_scale: np.ndarray
    ratio_max: np.ndarray
    ratio_min: np.ndarray


def _pencil_chunk(pair: np.ndarray, rank_tol: float) -> np.ndarray:
    K1, K0 = pair[:, 0], pair[:, 1]
    m, n, _ = K0.shape
    w0, V0 = np.linalg.eigh(K0)
    scale0 = np.maximum(1.0, np.max(np.abs(w0), axis=1))
    null = np.abs(w0) <= rank_tol * scale0[:, None]
    Vn = V0 * null[:, None, :]
    leak = np.linalg.eigvalsh(adjoint(Vn) @ K1 @ Vn)[:, -1]
    scale1 = np.maximum(1.0, np.max(np.abs(np.linalg.eigvalsh(K1)), axis=1))
    d = np.where(null, 0.0, 1.0 / np.sqrt(np.maximum(w0, np.finfo(float).tiny)))
    Vs = V0 * d[:, None, :]
    P = adjoint(Vs) @ K1 @ Vs
    P = 0.5 * (P + adjoint(P))
    ev = np.linalg.eigvalsh(P)
    rmax = ev[:, -1]
    # push the null block above the spectrum so the bottom eigenvalue is the restricted one
    shift = np.abs(rmax) + 1.0
    ev_low = np.linalg.eigvalsh(P + (shift[:, None] * null)[:, :, None] * np.eye(n)[None])[:, 0]
    allnull = null.all(axis=1)
    rmax = np.where(allnull, 0.0, rmax)
    rmin = np.where(allnull, np.inf, ev_low)
    out = np.stack([null.sum(axis=1).astype(float), leak, rank_tol * scale1, rmax, rmin], axis=1)
    return out


def pencil_stats(K1: np.ndarray, K0: np.ndarray, rank_tol: float = RANK_TOL) -> PencilStats:
    n = K0.shape[-1]
    pair = np.stack([K1, K0], axis=1)
    out = map_chunks(lambda p: _pencil_chunk(p, rank_tol), pair, 2 * n)
    return PencilStats(out[:, 0].astype(int), out[:, 1], out[:, 2], out[:, 3], out[:, 4])


def _leak_vector(K1: np.ndarray, K0: np.ndarray, rank_tol: float) -> np.ndarray:
    w0, V0 = np.linalg.eigh(K0)
    null = np.abs(w0) <= rank_tol * max(1.0, float(np.max(np.abs(w0))))
    Vn = V0[:, null]
    w, Y = np.linalg.eigh(Vn.conj().T @ K1 @ Vn)
    return Vn @ Y[:, -1]


def _ratio_vector(K1: np.ndarray, K0: np.ndarray, rank_tol: float) -> np.ndarray:
    w0, V0 = np.linalg.eigh(K0)
    keep = np.abs(w0) > rank_tol * max(1.0, float(np.max(np.abs(w0))))
    Vs = V0[:, keep] / np.sqrt(w0[keep])
    w, Y = np.linalg.eigh(Vs.conj().T @ K1 @ Vs)
    x = Vs @ Y[:, -1]
    return x / np.linalg.norm(x)


def _vec(x: np.ndarray) -> list:
    return [[float(v.real), float(v.imag)] for v in x]


# ---------------------------------------------------------------- domination

@dataclass(frozen=True)
class DominationReport:
    dominated: bool
    c: float | None
    grid_points: int
    per_sample_max_ratio: list = field(default_factory=list)
    counterexample: dict | None = None
    cause: str = ""
    certified: bool | None = None
    certified_margin: float | None = None
    dom_tol: float = DOM_TOL
    c_cap: float = C_CAP
    rho: float = 1.0
    theorem: str = THEOREM_DOMINATION

    def to_dict(self, samples: bool = True) -> dict:
        d = {
            "dominated": self.dominated,
            "c": self.c,
            "rho": self.rho,
            "grid_points": self.grid_points,
            "mode": "certified" if self.certified is not None else "sampled",
            "certified": self.certified,
            "certified_margin": self.certified_margin,
            "cause": self.cause or None,
            "counterexample": self.counterexample,
            "dom_tol": self.dom_tol,
            "c_cap": self.c_cap,
            "theorem": self.theorem,
        }
        if samples:
            d["per_sample_max_ratio"] = [[float(t), float(r)] for t, r in self.per_sample_max_ratio]
        return d


def _gamma_report(chk: GammaCheck, rho: float, grid: TorusGrid) -> DominationReport:
    lam = chk.eigenvalue
    cert = {
        "kind": "point-mass",
        "eigenvalue": [lam.real, lam.imag],
        "x": _vec(chk.vector),
        "reason": chk.reason,
    }
    return DominationReport(False, None, grid.n_points, [], cert, "GammaObstruction", rho=rho,
                            theorem="unimodular spectrum and eigenspaces of T1 must lie in those of T0")


def domination_constant(T1, T0, rho: float, grid: TorusGrid | None = None, *, certify: bool = False,
                        rank_tol: float = RANK_TOL, dom_tol: float = DOM_TOL, c_cap: float = C_CAP) -> DominationReport:
    """Smallest ``c`` over the grid with ``K(T1) <= c^2 K(T0)``.

    ``c`` is sharp on the sampled angles; with ``certify`` the Lipschitz
    margin of ``c^2 K(T0) - K(T1)`` is attached without changing the verdict.
    """
    rho = check_rho(rho)
    grid = grid or TorusGrid()
    T1, T0 = as_matrix(T1, name="T1"), as_matrix(T0, name="T0")
    _require_member(T1, rho, grid, "T1")
    _require_member(T0, rho, grid, "T0")
    chk = gamma_inclusion(gamma_set(T1), gamma_set(T0))
    if not chk.ok:
        return _gamma_report(chk, rho, grid)
    m1, m0 = BoundaryModel.of(T1, rho), BoundaryModel.of(T0, rho)
    th = grid.angles
    K1, K0 = m1.kernels(th), m0.kernels(th)
    st = pencil_stats(K1, K0, rank_tol)
    ratios = list(zip(th.tolist(), st.ratio_max.tolist()))
    leaked = np.flatnonzero(st.leak > st.leak_scale)
    if leaked.size:
        k = int(leaked[0])
        x = _leak_vector(K1[k], K0[k], rank_tol)
        val = float(np.real(x.conj() @ ((c_cap ** 2) * K0[k] - K1[k]) @ x))
        cert = {"kind": "kernel-leak", "theta": float(th[k]),
                "z": [float(np.cos(th[k])), float(np.sin(th[k]))], "x": _vec(x), "value": val}
        return DominationReport(False, None, grid.n_points, ratios, cert, "KernelLeak", rho=rho,
                                dom_tol=dom_tol, c_cap=c_cap)
    k = argmin_first(-st.ratio_max)
    c2 = max(1.0, float(st.ratio_max[k]))
    if c2 > c_cap ** 2:
        x = _ratio_vector(K1[k], K0[k], rank_tol)
        val = float(np.real(x.conj() @ ((c_cap ** 2) * K0[k] - K1[k]) @ x))
        cert = {"kind": "ratio", "theta": float(th[k]),
                "z": [float(np.cos(th[k])), float(np.sin(th[k]))], "x": _vec(x), "value": val}
        return DominationReport(False, None, grid.n_points, ratios, cert, "ConstantCap", rho=rho,
                                dom_tol=dom_tol, c_cap=c_cap)
    c = float(np.sqrt(c2))
    certified = cert_margin = None
    if certify:
        F = c2 * K0 - K1
        gmin = float(np.min(map_chunks(lambda s: np.linalg.eigvalsh(s)[:, 0], F, F.shape[-1])))
        lip = c2 * m0.lipschitz(grid) + m1.lipschitz(grid)
        cert_margin = gmin - lip * grid.spacing / 2.0
        certified = bool(cert_margin >= -dom_tol)
    return DominationReport(True, c, grid.n_points, ratios, None, "", certified, cert_margin,
                            dom_tol, c_cap, rho)


class DominationCheck(NamedTuple):
    holds: bool
    margin: float
    theta: float | None
    reason: str


def _check(T1: np.ndarray, T0: np.ndarray, rho: float, c: float, grid: TorusGrid, dom_tol: float) -> DominationCheck:
    chk = gamma_inclusion(gamma_set(T1), gamma_set(T0))
    if not chk.ok:
        return DominationCheck(False, -1.0, None, "GammaObstruction")
    th = grid.angles
    F = c * c * BoundaryModel.of(T0, rho).kernels(th) - BoundaryModel.of(T1, rho).kernels(th)
    mins = map_chunks(lambda s: np.linalg.eigvalsh(s)[:, 0], F, F.shape[-1])
    k = argmin_first(mins)
    margin = float(mins[k])
    return DominationCheck(margin >= -dom_tol, margin, float(th[k]), "" if margin >= -dom_tol else "NegativeMargin")


def check_domination(T1, T0, rho: float, c: float, grid: TorusGrid | None = None, *,
                     dom_tol: float = DOM_TOL) -> DominationCheck:
    """Test ``K(T1) <= c^2 K(T0)`` at a fixed ``c >= 1`` on the grid."""
    rho = check_rho(rho)
    if not c >= 1.0:
        raise PreconditionFailed("c must be at least 1", c=c)
    grid = grid or TorusGrid()
    T1, T0 = as_matrix(T1, name="T1"), as_matrix(T0, name="T0")
    _require_member(T1, rho, grid, "T1")
    _require_member(T0, rho, grid, "T0")
    return _check(T1, T0, rho, float(c), grid, dom_tol)


# ---------------------------------------------------------------- equivalence

@dataclass(frozen=True)
class EquivalenceReport:
    equivalent: bool
    failure_reason: str | None = None
    alpha: float | None = None
    beta: float | None = None
    m_T: float | None = None
    M_T: float | None = None
    m_S: float | None = None
    M_S: float | None = None
    kernel_comparison: list = field(default_factory=list)
    grid_points: int = 0
    rho: float = 1.0
    composed: bool = False
    details: dict = field(default_factory=dict)
    theorem: str = THEOREM_EQUIVALENCE

    def to_dict(self, samples: bool = True) -> dict:
        d = {
            "equivalent": self.equivalent,
            "failure_reason": self.failure_reason,
            "alpha": self.alpha, "beta": self.beta,
            "m_T": self.m_T, "M_T": self.M_T, "m_S": self.m_S, "M_S": self.M_S,
            "rho": self.rho,
            "grid_points": self.grid_points,
            "unitary_split": self.composed,
            "details": self.details,
            "theorem": self.theorem,
        }
        if samples:
            d["kernel_comparison"] = [list(row) for row in self.kernel_comparison]
        return d


def _fail(failure: str, theorem: str, rho: float, grid_points: int = 0, comparison=None, **details) -> EquivalenceReport:
    return EquivalenceReport(False, failure, kernel_comparison=comparison or [], grid_points=grid_points,
                             rho=rho, details=details, theorem=theorem)


def _spectral_stages(T: np.ndarray, S: np.ndarray, rho: float, theorem: str):
    """Shared Gamma / eigenspace / unitary-block stages.

    Returns ``(decomposition of T, None)`` or ``(None, failure report)``.
    """
    try:
        gT, gS = gamma_set(T), gamma_set(S)
    except DefectiveUnimodularEigenvalue as exc:
        return None, _fail("ClassViolation", theorem, rho, cause=exc.code)
    if len(gT) != len(gS) or any(gS.index_of(l) is None for l in gT.gamma):
        return None, _fail("GammaMismatch", theorem, rho, gamma_T=gT.to_dict()["gamma"], gamma_S=gS.to_dict()["gamma"])
    for lam, V, k in zip(gT.gamma, gT.eigenspaces, gT.multiplicities):
        j = gS.index_of(lam)
        if gS.multiplicities[j] != k or not subspaces_equal(V, gS.eigenspaces[j]):
            return None, _fail("EigenspaceMismatch", theorem, rho, eigenvalue=[lam.real, lam.imag])
    try:
        dec = unimodular_decomposition(T)
    except NotReducing as exc:
        return None, _fail("ClassViolation", theorem, rho, cause=exc.code)
    tol = REDUCING_TOL * (1.0 + max(spectral_norm(T), spectral_norm(S)))
    if dec.E.shape[1]:
        res = dec.reducing_residual(S)
        blk = spectral_norm(dec.E.conj().T @ (S - T) @ dec.E)
        if res > tol or blk > tol:
            return None, _fail("UnitaryBlockMismatch", theorem, rho, residual=res, block_difference=blk)
    return dec, None


def _null_projectors(K: np.ndarray, rank_tol: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigenvalues, null masks and null-space projectors for a kernel batch."""
    w, V = np.linalg.eigh(K)
    scale = np.maximum(1.0, np.max(np.abs(w), axis=1))
    null = np.abs(w) <= rank_tol * scale[:, None]
    Vn = V * null[:, None, :]
    return w, null, Vn @ adjoint(Vn)


def _first_nonkernel(w: np.ndarray, null: np.ndarray) -> np.ndarray:
    k = null.sum(axis=1)
    n = w.shape[1]
    idx = np.minimum(k, n - 1)
    g = np.take_along_axis(w, idx[:, None], axis=1)[:, 0]
    return np.where(k >= n, np.inf, g)


def _kernel_at(C: np.ndarray, rho: float, theta: float, rank_tol: float) -> tuple[np.ndarray, np.ndarray]:
    K = kernel_batch(C, rho, np.array([np.exp(1j * theta)]))[0]
    return hermitian_null_basis(K, rank_tol)


def equivalence(T, S, rho: float, grid: TorusGrid | None = None, *, rank_tol: float = RANK_TOL,
                angle_tol: float = ANGLE_TOL, dom_tol: float = DOM_TOL, c_cap: float = C_CAP) -> EquivalenceReport:
    """Decide Harnack equivalence of ``T`` and ``S`` in C_rho.

    Cheap spectral conditions come first; boundary kernels of the strict
    parts are then compared sample by sample, the sharp two-sided constants
    are computed and finally confirmed by domination checks in both
    directions.
    """
    rho = check_rho(rho)
    grid = grid or TorusGrid()
    T, S = as_matrix(T, name="T"), as_matrix(S, name="S")
    th = THEOREM_EQUIVALENCE
    if T.shape != S.shape:
        return _fail("GammaMismatch", th, rho, reason="different dimensions")
    for name, X in (("T", T), ("S", S)):
        mem = is_rho_contraction(X, rho, grid)
        if mem.verdict == "no":
            return _fail("ClassViolation", th, rho, operand=name, reason=mem.reason, margin=mem.margin)
    dec, bad = _spectral_stages(T, S, rho, th)
    if bad is not None:
        return bad
    composed = dec.E.shape[1] > 0
    Ct, Cs = dec.compression, dec.compress(S)
    if Ct.shape[0] == 0:
        return EquivalenceReport(True, None, 1.0, 1.0, grid_points=grid.n_points, rho=rho, composed=composed)

    thetas = grid.angles
    zs = grid.points()
    KT, KS = kernel_batch(Ct, rho, zs), kernel_batch(Cs, rho, zs)
    wT, nT, PT = _null_projectors(KT, rank_tol)
    wS, nS, PS = _null_projectors(KS, rank_tol)
    dT, dS = nT.sum(axis=1), nS.sum(axis=1)
    sines = np.clip(np.max(np.abs(np.linalg.eigvalsh(PT - PS)), axis=1), 0.0, 1.0)
    angles = np.where(dT == dS, np.arcsin(sines), np.pi / 2)
    angles = np.where((dT == 0) & (dS == 0), 0.0, angles)
    comparison = [(float(t), int(a), int(b), float(g)) for t, a, b, g in zip(thetas, dT, dS, angles)]
    mism = np.flatnonzero(dT != dS)
    if mism.size:
        k = int(mism[0])
        return _fail("KernelDimMismatch", th, rho, grid.n_points, comparison, theta=float(thetas[k]),
                     dim_T=int(dT[k]), dim_S=int(dS[k]))
    bad_ang = np.flatnonzero(angles > angle_tol)
    if bad_ang.size:
        k = int(bad_ang[0])
        return _fail("KernelAngleMismatch", th, rho, grid.n_points, comparison, theta=float(thetas[k]),
                     angle=float(angles[k]))

    # kernels can jump at isolated angles between samples: polish the smallest
    # non-kernel eigenvalue and compare kernels where it nearly vanishes
    mins = {}
    for name, C, w, null in (("T", Ct, wT, nT), ("S", Cs, wS, nS)):
        g = _first_nonkernel(w, null)
        if not np.all(np.isfinite(g)):
            mins[name] = (float("inf"), None)
            continue
        k0 = argmin_first(g)
        idx = int(null[k0].sum())

        def f(t: float, C=C, idx=idx) -> float:
            K = kernel_batch(C, rho, np.array([np.exp(1j * t)]), check=False)[0]
            return float(np.linalg.eigvalsh(K)[idx])

        best = refine_minimum(f, thetas, g)
        mins[name] = (best.value, best.theta)
    for name in ("T", "S"):
        val, theta = mins[name]
        if theta is None:
            continue
        scale = max(1.0, float(np.max(np.abs(wT if name == "T" else wS))))
        if val <= rank_tol * scale:
            _, VT = _kernel_at(Ct, rho, theta, rank_tol)
            _, VS = _kernel_at(Cs, rho, theta, rank_tol)
            row = (float(theta), VT.shape[1], VS.shape[1], float("nan"))
            if VT.shape[1] != VS.shape[1]:
                return _fail("KernelDimMismatch", th, rho, grid.n_points, comparison + [row],
                             theta=float(theta), dim_T=VT.shape[1], dim_S=VS.shape[1], refined=True)
            if not subspaces_equal(VT, VS, angle_tol):
                return _fail("KernelAngleMismatch", th, rho, grid.n_points, comparison + [row],
                             theta=float(theta), refined=True)

    m_T, m_S = mins["T"][0], mins["S"][0]
    M_T, M_S = float(np.max(wT[:, -1])), float(np.max(wS[:, -1]))
    st = pencil_stats(KS, KT, rank_tol)
    beta = max(1.0, float(np.max(st.ratio_max)))
    alpha = min(1.0, float(np.min(st.ratio_min)))
    fin = lambda v: None if not np.isfinite(v) else float(v)
    if not alpha > 0:
        return _fail("ConfirmationFailed", th, rho, grid.n_points, comparison, alpha=alpha, beta=beta)
    c = max(np.sqrt(beta), 1.0 / np.sqrt(alpha)) * (1.0 + CONFIRM_SLACK)
    if c > c_cap:
        return _fail("ConfirmationFailed", th, rho, grid.n_points, comparison, alpha=alpha, beta=beta, c=c)
    fwd = _check(S, T, rho, c, grid, dom_tol)
    bwd = _check(T, S, rho, c, grid, dom_tol)
    if not (fwd.holds and bwd.holds):
        return _fail("ConfirmationFailed", th, rho, grid.n_points, comparison, alpha=alpha, beta=beta, c=c,
                     margin_S_le_T=fwd.margin, margin_T_le_S=bwd.margin)
    return EquivalenceReport(True, None, alpha, beta, fin(m_T), M_T, fin(m_S), M_S, comparison,
                             grid.n_points, rho, composed, {"c": float(c)})


def equivalence_c1(T, S, *, rank_tol: float = RANK_TOL, angle_tol: float = ANGLE_TOL,
                   restriction_tol: float = RESTRICTION_TOL) -> EquivalenceReport:
    """Harnack equivalence of contractions without any torus sampling.

    Two contractions are equivalent when their strict parts have the same
    defect kernel ``ker(I - C*C)`` and agree on it.
    """
    T, S = as_matrix(T, name="T"), as_matrix(S, name="S")
    th = THEOREM_CONTRACTION
    if T.shape != S.shape:
        return _fail("GammaMismatch", th, 1.0, reason="different dimensions")
    for name, X in (("T", T), ("S", S)):
        nrm = spectral_norm(X)
        if nrm > 1.0 + CONTRACTION_TOL:
            return _fail("ClassViolation", th, 1.0, operand=name, norm=nrm)
    dec, bad = _spectral_stages(T, S, 1.0, th)
    if bad is not None:
        return bad
    composed = dec.E.shape[1] > 0
    Ct, Cs = dec.compression, dec.compress(S)
    if Ct.shape[0] == 0:
        return EquivalenceReport(True, None, rho=1.0, composed=composed, theorem=th)
    m = Ct.shape[0]
    _, DT = hermitian_null_basis(np.eye(m) - Ct.conj().T @ Ct, rank_tol)
    _, DS = hermitian_null_basis(np.eye(m) - Cs.conj().T @ Cs, rank_tol)
    if not subspaces_equal(DT, DS, angle_tol):
        return _fail("DefectKernelMismatch", th, 1.0, dim_T=DT.shape[1], dim_S=DS.shape[1])
    diff = spectral_norm((Ct - Cs) @ DT) if DT.shape[1] else 0.0
    if diff > restriction_tol:
        return _fail("RestrictionMismatch", th, 1.0, difference=diff)
    return EquivalenceReport(True, None, rho=1.0, composed=composed,
                             details={"defect_dim": int(DT.shape[1]), "restriction_difference": diff}, theorem=th)


def conjugation_orbit_check(T, U, rho: float, grid: TorusGrid | None = None, *,
                            rank_tol: float = RANK_TOL, angle_tol: float = ANGLE_TOL) -> bool:
    """``U*TU`` is equivalent to ``T`` when ``U`` maps every boundary kernel of ``T`` into itself.

    Returns the conjunction of the invariance test and a full equivalence run.
    """
    rho = check_rho(rho)
    grid = grid or TorusGrid()
    T, U = as_matrix(T, name="T"), as_matrix(U, name="U")
    if T.shape != U.shape:
        raise NotUnitary("U has the wrong dimension", dim_T=T.shape[0], dim_U=U.shape[0])
    dev = spectral_norm(U.conj().T @ U - np.eye(U.shape[0]))
    if dev > 1e-9:
        raise NotUnitary("U is not unitary", deviation=dev)
    _require_member(T, rho, grid, "T")
    K = BoundaryModel.of(T, rho).kernels(grid.angles)
    _, null, P = _null_projectors(K, rank_tol)
    # ||(I - P) U P|| is the sine of the largest angle between U ker K and ker K
    R = U[None] @ P - P @ U[None] @ P
    drift = np.max(np.linalg.norm(R, ord=2, axis=(1, 2)))
    if drift > np.sin(angle_tol):
        return False
    return equivalence(T, U.conj().T @ T @ U, rho, grid).equivalent
