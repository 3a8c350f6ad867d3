from __future__ import annotations

import csv

import numpy as np
import pytest
from scipy.linalg import block_diag
from scipy.stats import unitary_group

from rhoharnack.errors import DefectiveUnimodularEigenvalue, NotReducing, PreconditionFailed
from rhoharnack.spectral import (
    degenerate_boundary_point, gamma_set, numerical_range_torus, stability_check, unimodular_decomposition,
)

from conftest import jordan, nilpotent_t0, shift3


def test_gamma_diag():
    spec = gamma_set(np.diag([1j, 0.5, 1, -1, 1]))
    assert np.allclose(spec.gamma, [1, 1j, -1])
    assert spec.multiplicities == (2, 1, 1)
    assert spec.index_of(-1) == 2 and spec.index_of(0.5) is None


def test_gamma_empty_for_strict():
    assert gamma_set(jordan(5)).is_empty
    assert gamma_set(nilpotent_t0()).is_empty


def test_gamma_eigenspaces_are_eigenvectors():
    U = unitary_group.rvs(4, random_state=3)
    T = U @ np.diag([np.exp(0.3j), np.exp(0.3j), 0.2, -0.4]) @ U.conj().T
    spec = gamma_set(T)
    assert spec.multiplicities == (2,)
    V = spec.eigenspaces[0]
    assert np.linalg.norm(T @ V - spec.gamma[0] * V) < 1e-10
    assert abs(spec.gamma[0] - np.exp(0.3j)) < 1e-12


def test_defective_raises():
    with pytest.raises(DefectiveUnimodularEigenvalue):
        gamma_set(np.array([[1, 1], [0, 1]]))


def test_wraparound_cluster():
    # two eigenvalues straddling angle 0 form one cluster
    eps = 1e-9
    spec = gamma_set(np.diag([np.exp(1j * eps), np.exp(-1j * eps)]), cluster_tol=1e-7)
    assert spec.multiplicities == (2,)


def test_decomposition_reconstructs():
    W = unitary_group.rvs(5, random_state=11)
    C = 0.3 * jordan(3)
    T = W @ block_diag(np.diag([1, 1j]), C) @ W.conj().T
    dec = unimodular_decomposition(T)
    assert dec.dim == 5 and dec.E.shape[1] == 2
    assert np.linalg.norm(dec.reconstruct() - T) < 1e-10
    assert dec.compression_radius == pytest.approx(0.0, abs=1e-5)
    sv = np.linalg.svd(dec.compression, compute_uv=False)
    assert np.allclose(sv, [0.3, 0.3, 0], atol=1e-10)


def test_nonreducing_raises():
    with pytest.raises(NotReducing):
        unimodular_decomposition(np.array([[1, 0.5], [0, 0.2]]))


def test_numerical_range_segment():
    nr = numerical_range_torus(np.diag([1, 0.5]), 1024)
    assert len(nr.points) == 1 and abs(nr.points[0] - 1) < 1e-12


def test_numerical_range_triangle():
    nr = numerical_range_torus(np.diag([1, 1j, 0]), 1024)
    assert len(nr.points) == 2
    assert np.allclose(sorted(nr.points, key=np.angle), [1, 1j], atol=1e-12)


def test_numerical_range_disk_touch_point(tmp_path):
    B = np.array([[0.5, 1], [0, 0.5]])  # W(B) is the disk of radius 1/2 about 1/2
    nr = numerical_range_torus(B, 1024)
    assert len(nr.points) == 1 and abs(nr.points[0] - 1) < 1e-7
    nr.write_csv(tmp_path / "w.csv")
    rows = list(csv.reader(open(tmp_path / "w.csv")))
    assert rows[0] == ["theta", "re", "im", "on_torus"] and len(rows) == 1025


def test_numerical_range_full_circle():
    nr = numerical_range_torus(shift3(), 512)
    assert len(nr.points) == 512


def test_numerical_range_min_angles():
    with pytest.raises(ValueError):
        numerical_range_torus(np.eye(2), 64)


def test_degenerate_boundary_point():
    z, val = degenerate_boundary_point(np.array([[0.5, 1], [0, 0.5]]))
    assert abs(z - 1) < 1e-5
    assert abs(val) < 1e-8


def test_degenerate_boundary_preconditions():
    with pytest.raises(PreconditionFailed):
        degenerate_boundary_point(nilpotent_t0() / 4)
    with pytest.raises(PreconditionFailed):
        degenerate_boundary_point(np.diag([1, 0.5]))


def test_stability():
    assert stability_check(0.999 * jordan(3) + 0.5 * np.eye(3))
    assert not stability_check(np.eye(2))
    assert stability_check(nilpotent_t0())


def test_contraction_range_meets_circle_at_gamma():
    W = unitary_group.rvs(4, random_state=5)
    T = W @ block_diag(np.diag([1j, np.exp(2j)]), 0.6 * jordan(2)) @ W.conj().T
    pts = numerical_range_torus(T, 2048).points
    gam = gamma_set(T).gamma
    assert len(pts) == len(gam)
    for g in gam:
        assert min(abs(p - g) for p in pts) < 1e-6
