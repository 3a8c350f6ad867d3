from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from rhoharnack.errors import ClassViolation, NotUnitary, PreconditionFailed
from rhoharnack.harnack import (
    check_domination, conjugation_orbit_check, domination_constant, equivalence, equivalence_c1, pencil_stats,
)
from rhoharnack.kernel import kernel_batch, kernel_matrix
from rhoharnack.radii import rho_radius
from rhoharnack.sampling import TorusGrid

from conftest import jordan, nilpotent_t0, rand_complex

GRID = TorusGrid(512)


def strict_member(rng, n, rho, w=0.8):
    T = rand_complex(rng, n)
    # the upper bracket end is always a verified member
    return T * (w / rho_radius(T, rho).bracket[1])


def gen_eig_oracle(K1, K0):
    """Largest and smallest generalized eigenvalue over a batch, via scipy."""
    hi, lo = -np.inf, np.inf
    for a, b in zip(K1, K0):
        ev = sla.eigh(a, b, eigvals_only=True)
        hi, lo = max(hi, ev[-1]), min(lo, ev[0])
    return hi, lo


def test_t0_dominated_by_zero_closed_form():
    rep = domination_constant(nilpotent_t0(), np.zeros((2, 2)), 2.0, GRID)
    assert rep.dominated and rep.c == pytest.approx(np.sqrt(2), abs=1e-12)


def test_zero_not_dominated_by_t0():
    rep = domination_constant(np.zeros((2, 2)), nilpotent_t0(), 2.0, GRID)
    assert not rep.dominated and rep.cause == "KernelLeak"
    x = np.array([complex(a, b) for a, b in rep.counterexample["x"]])
    th = rep.counterexample["theta"]
    K0 = np.array([[2, 2 * np.exp(-1j * th)], [2 * np.exp(1j * th), 2]])
    assert np.linalg.norm(K0 @ x) < 1e-7  # x lies in ker K(T0)
    assert rep.counterexample["value"] < 0


def test_gamma_obstruction():
    rep = domination_constant(np.diag([1, 0]), np.diag([0.5, 0]), 1.5, GRID)
    assert not rep.dominated and rep.cause == "GammaObstruction"
    assert rep.counterexample["kind"] == "point-mass"


def test_nonmember_raises():
    with pytest.raises(ClassViolation):
        domination_constant(nilpotent_t0(), np.zeros((2, 2)), 1.5, GRID)


def test_constant_matches_generalized_eigen_oracle(rng):
    for _ in range(6):
        rho = float(rng.choice([1.0, 1.5, 2.0, 3.0]))
        T1, T0 = strict_member(rng, 3, rho), strict_member(rng, 3, rho)
        rep = domination_constant(T1, T0, rho, GRID)
        zs = GRID.points()
        hi, _ = gen_eig_oracle(kernel_batch(T1, rho, zs), kernel_batch(T0, rho, zs))
        assert rep.c == pytest.approx(np.sqrt(max(1.0, hi)), rel=1e-9)
        assert check_domination(T1, T0, rho, rep.c, GRID).holds
        if rep.c > 1.001:
            assert not check_domination(T1, T0, rho, rep.c * 0.999, GRID).holds


def test_domination_extends_into_disk(rng):
    rho = 2.0
    T1, T0 = strict_member(rng, 3, rho), strict_member(rng, 3, rho, 0.95)
    c = domination_constant(T1, T0, rho, TorusGrid(4096)).c * (1 + 1e-6)
    for _ in range(40):
        z = rng.uniform(0, 0.99) * np.exp(1j * rng.uniform(0, 6.3))
        F = c * c * kernel_matrix(T0, rho, z) - kernel_matrix(T1, rho, z)
        assert np.linalg.eigvalsh(F)[0] >= -1e-7


def test_check_domination_requires_c_at_least_one():
    with pytest.raises(PreconditionFailed):
        check_domination(np.zeros((2, 2)), np.zeros((2, 2)), 1.0, 0.5)


def test_certify_mode_reports_margin(rng):
    T1, T0 = strict_member(rng, 2, 1.5, 0.3), strict_member(rng, 2, 1.5, 0.3)
    rep = domination_constant(T1, T0, 1.5, TorusGrid(2048), certify=True)
    d = rep.to_dict(samples=False)
    assert d["mode"] == "certified" and isinstance(d["certified_margin"], float)
    assert domination_constant(T1, T0, 1.5, GRID).to_dict()["mode"] == "sampled"


def test_pencil_stats_against_oracle(rng):
    A = rand_complex(rng, 3)
    B = rand_complex(rng, 3)
    K1 = (A @ A.conj().T)[None]
    K0 = (B @ B.conj().T + np.eye(3))[None]
    st_ = pencil_stats(K1, K0)
    ev = sla.eigh(K1[0], K0[0], eigvals_only=True)
    assert st_.ratio_max[0] == pytest.approx(ev[-1], rel=1e-10)
    assert st_.ratio_min[0] == pytest.approx(ev[0], rel=1e-9, abs=1e-12)
    assert st_.null_dim[0] == 0


def test_pencil_restricted_minimum_with_null():
    K0 = np.diag([0.0, 1.0, 2.0])[None]
    K1 = np.diag([0.0, 3.0, 1.0])[None]
    s = pencil_stats(K1, K0)
    assert s.null_dim[0] == 1 and s.leak[0] <= s.leak_scale[0]
    assert s.ratio_max[0] == pytest.approx(3.0) and s.ratio_min[0] == pytest.approx(0.5)


# ---------------------------------------------------------------- equivalence

def test_equivalence_reflexive(rng):
    T = strict_member(rng, 3, 2.0, 1.0)
    rep = equivalence(T, T, 2.0, GRID)
    assert rep.equivalent and rep.alpha == pytest.approx(1) and rep.beta == pytest.approx(1)


def test_strict_members_are_equivalent_with_sharp_constants(rng):
    rho = 1.5
    T, S = strict_member(rng, 3, rho, 0.7), strict_member(rng, 3, rho, 0.9)
    rep = equivalence(T, S, rho, GRID)
    assert rep.equivalent
    zs = GRID.points()
    hi, lo = gen_eig_oracle(kernel_batch(S, rho, zs), kernel_batch(T, rho, zs))
    assert rep.beta == pytest.approx(max(1, hi), rel=1e-8)
    assert rep.alpha == pytest.approx(min(1, lo), rel=1e-8)
    assert rep.m_T > 0 and rep.M_T >= rep.m_T


def test_equivalence_failure_stages():
    g = GRID
    assert equivalence(np.diag([1, 0]), np.diag([1j, 0]), 1.0, g).failure_reason == "GammaMismatch"
    assert equivalence(np.diag([1, 0]), np.diag([0, 1]), 1.0, g).failure_reason == "EigenspaceMismatch"
    assert equivalence(nilpotent_t0(), np.zeros((2, 2)), 2.0, g).failure_reason == "KernelDimMismatch"
    assert equivalence(nilpotent_t0(), np.zeros((2, 2)), 1.5, g).failure_reason == "ClassViolation"
    rot = np.array([[0, 2j], [0, 0]])
    rep = equivalence(nilpotent_t0(), rot, 2.0, g)
    assert rep.failure_reason == "KernelAngleMismatch"
    assert rep.details["angle"] == pytest.approx(np.pi / 4, abs=1e-6)


def test_equivalence_with_unitary_part():
    T = np.zeros((3, 3), complex)
    T[0, 0] = 1j
    T[1:, 1:] = [[0, 0.3], [0, 0.1]]
    S = T.copy()
    S[1:, 1:] = [[0.2, 0], [0.1, 0]]
    rep = equivalence(T, S, 1.5, GRID)
    assert rep.equivalent and rep.composed


def test_equivalence_c1_cases():
    T = np.array([[0, 1], [0, 0]], complex)
    S = np.array([[0, 1], [0.2, 0]], complex)
    assert equivalence_c1(T, S).equivalent
    assert equivalence(T, S, 1.0, GRID).equivalent
    R = np.array([[0, 0.9], [0, 0]], complex)
    assert equivalence_c1(T, R).failure_reason == "DefectKernelMismatch"
    assert equivalence(T, R, 1.0, GRID).failure_reason == "KernelDimMismatch"
    S2 = np.array([[0, 1j], [0, 0]], complex)
    assert equivalence_c1(T, S2).failure_reason == "RestrictionMismatch"
    assert equivalence_c1(2 * T, T).failure_reason == "ClassViolation"


def contraction_with_defect(rng, n, k):
    """Contraction whose singular values include k ones."""
    U, _ = np.linalg.qr(rand_complex(rng, n))
    V, _ = np.linalg.qr(rand_complex(rng, n))
    s = np.concatenate([np.ones(k), rng.uniform(0, 0.9, n - k)])
    return U @ np.diag(s) @ V.conj().T


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31), st.integers(0, 1))
def test_c1_agrees_with_sampled_equivalence(seed, same):
    rng = np.random.default_rng(seed)
    T = contraction_with_defect(rng, 3, 1) * 0.999999 if rng.uniform() < 0.2 else contraction_with_defect(rng, 3, 1)
    if same:
        # perturb T off its defect space only, keeping the defect kernel and restriction
        _, s, Vh = np.linalg.svd(T)
        D = Vh.conj().T[:, :1]
        P = np.eye(3) - D @ D.conj().T
        S = T + 0.05 * rand_complex(rng, 3) @ P
        if np.linalg.norm(S, 2) > 1 + 1e-12:
            return
    else:
        S = contraction_with_defect(rng, 3, 1)
    a = equivalence_c1(T, S)
    b = equivalence(T, S, 1.0, TorusGrid(1024))
    assert a.equivalent == b.equivalent


# ---------------------------------------------------------------- orbits

def test_orbit_check_identity_and_rejects():
    assert conjugation_orbit_check(nilpotent_t0(), np.eye(2), 2.0, GRID)
    assert not conjugation_orbit_check(nilpotent_t0(), np.diag([1, -1]), 2.0, GRID)
    with pytest.raises(NotUnitary):
        conjugation_orbit_check(nilpotent_t0(), np.diag([1, 2]), 2.0, GRID)


def test_orbit_check_trivial_kernel():
    T = np.array([[0, 1], [0, 0]], complex)  # strict member at rho=2, no boundary kernels
    U = sla.expm(1j * np.array([[0.3, 0.1], [0.1, -0.2]]))
    assert conjugation_orbit_check(T, U, 2.0, GRID)


def test_identity_is_maximal(rng):
    for _ in range(20):
        rho = float(rng.choice([1.0, 1.5, 2.0]))
        T = strict_member(rng, 2, rho, float(rng.uniform(0.2, 1.0)))
        rep = domination_constant(np.eye(2), T, rho, GRID)
        assert not rep.dominated and rep.cause == "GammaObstruction"
