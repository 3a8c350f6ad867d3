from __future__ import annotations

import numpy as np
import pytest

from rhoharnack.errors import BadShape, UnsupportedRho
from rhoharnack.radii import numerical_radius_sweep
from rhoharnack.reproductions import (
    REPRODUCTIONS, corner_family, fixture, fixture_names, jordan_corner, nilpotent_order2_case, orbit_probes,
    orbit_unitary, repro_jordan_part, repro_nilpotent_order2, repro_remark_constants, run,
)
from rhoharnack.sampling import TorusGrid


def test_fixtures_present():
    assert set(fixture_names()) >= {"t0", "n3", "n3_theta", "i", "j2", "n4_corner"}
    assert np.array_equal(fixture("t0"), [[0, 2], [0, 0]])
    assert np.array_equal(fixture("i"), np.eye(2))
    assert np.array_equal(fixture("j2"), [[0, 1], [0, 0]])


def test_orbit_fixture_is_conjugate():
    U = orbit_unitary(np.pi / 3)
    assert np.allclose(U.conj().T @ fixture("n3") @ U, fixture("n3_theta"), atol=1e-15)


def test_perturbation_probe_closed_form():
    # w([[0,p],[q,0]]) = (|p| + |q|)/2 exceeds one for every b != 0
    for b in (1e-3, 0.5j, -1.0):
        assert numerical_radius_sweep(np.array([[0, 2], [b, 0]])) == pytest.approx(1 + abs(b) / 2, abs=1e-12)


def test_corner_family_layout():
    T = corner_family(np.diag([0.3, 0.4]))
    assert T.shape == (4, 4) and T[0, 3] == 2 and T[1, 1] == 0.3 and T[2, 2] == 0.4
    assert np.array_equal(corner_family([[0.0, 0.0], [0.0, 0.0]]), fixture("n4_corner"))


def test_nilpotent_case_shape_checks():
    with pytest.raises(BadShape):
        nilpotent_order2_case(4, 2.0, [[0.1]])
    with pytest.raises(BadShape):
        nilpotent_order2_case(3, 1.5, [[0.1]])


@pytest.mark.parametrize("b,expected", [(0.5, True), (-0.99j, True), (1.0, False), (1.2, False)])
def test_scalar_block_cases(b, expected):
    case = nilpotent_order2_case(3, 2.0, [[b]], TorusGrid(1024))
    assert case["predicted"] == expected and case["passed"]


def test_nilpotent_reproduction_with_phase():
    out = repro_nilpotent_order2(4, 2j, np.array([[0.2, 0.3], [0.0, -0.1]]), TorusGrid(1024))
    assert out.passed, out.failures


def test_orbit_probes_are_off_orbit():
    a = np.sqrt(2)
    for label, P in orbit_probes(a):
        u, v, w = P[0, 1], P[1, 1], P[1, 2]
        assert abs(v) > 0 or abs(u * w - a * a) > 1e-3, label


def test_jordan_corner():
    M = jordan_corner(3, 0.5j)
    assert M[2, 0] == 0.5j and M[0, 1] == 1 and M[1, 2] == 1
    # the corner family is the set of contractions equal to J off the defect space
    assert np.linalg.norm(M, 2) == pytest.approx(1.0)
    with pytest.raises(BadShape):
        repro_jordan_part(1)


def test_jordan_custom_samples():
    out = repro_jordan_part(5, [0.3, 0.99 * np.exp(2j)])
    assert out.passed


def test_explicit_constants_reject_rho_one():
    with pytest.raises(UnsupportedRho):
        repro_remark_constants((1.0,))


@pytest.mark.parametrize("name", ["2x2-trivial", "nilpotent2", "jordan", "remark-constants"])
def test_named_reproductions_pass(name):
    (out,) = run(name)
    assert out.passed, out.failures
    d = out.to_dict()
    assert d["n_failed"] == 0 and d["n_checks"] == len(out.checks)


def test_unknown_reproduction():
    with pytest.raises(KeyError):
        run("nope")
    assert set(REPRODUCTIONS) == {"2x2-trivial", "nilpotent2", "3x3-orbit", "jordan", "remark-constants"}
