from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rhoharnack.errors import ZeroPolynomial
from rhoharnack.harnack import domination_constant
from rhoharnack.herglotz import AnalyticPolynomial, condition_i_check, herglotz_completion, random_herglotz
from rhoharnack.radii import rho_radius
from rhoharnack.sampling import TorusGrid

from conftest import nilpotent_t0, rand_complex

coef = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(st.lists(coef, min_size=1, max_size=8))
def test_boundary_real_part_is_modulus_squared(cs):
    q = AnalyticPolynomial.of(cs)
    if not np.any(q.array):
        return
    p = herglotz_completion(q)
    z = np.exp(2j * np.pi * np.arange(64) / 64)
    assert np.allclose(np.real(p(z)), np.abs(q(z)) ** 2, atol=1e-9 * (1 + np.sum(np.abs(q.array)) ** 2))
    assert p.degree == q.degree


def test_constant_completion():
    p = herglotz_completion(AnalyticPolynomial.of([2j]))
    assert p.coefficients == (4 + 0j,)


def test_known_completion():
    # q = 1 + z: |q|^2 = 2 + 2 Re z, so p = 2 + 2z
    p = herglotz_completion(AnalyticPolynomial.of([1, 1]))
    assert np.allclose(p.array, [2, 2])


def test_zero_polynomial():
    with pytest.raises(ZeroPolynomial):
        herglotz_completion(AnalyticPolynomial.of([0, 0]))


def test_degree_cap():
    with pytest.raises(ValueError):
        AnalyticPolynomial.of(np.ones(34))
    with pytest.raises(ValueError):
        AnalyticPolynomial(())


def test_at_matrix_matches_powers(rng):
    T = rand_complex(rng, 3)
    p = AnalyticPolynomial.of(rng.normal(size=5) + 1j * rng.normal(size=5))
    ref = sum(c * np.linalg.matrix_power(T, k) for k, c in enumerate(p.coefficients))
    assert np.allclose(p.at_matrix(T), ref, atol=1e-10)
    assert p(0.5) == pytest.approx(sum(c * 0.5 ** k for k, c in enumerate(p.coefficients)))


def test_condition_for_t0_pair():
    c = np.sqrt(2.0)
    rng = np.random.default_rng(5)
    for _ in range(30):
        p = random_herglotz(rng)
        assert condition_i_check(nilpotent_t0(), np.zeros((2, 2)), 2.0, c, p).holds


def test_condition_fails_with_small_constant():
    # p = 2 + 2z: Re p(T0) = [[2, 2], [2, 2]] has top eigenvalue 4, needs c^2 >= 2
    p = AnalyticPolynomial.of([2, 2])
    chk = condition_i_check(nilpotent_t0(), np.zeros((2, 2)), 2.0, 1.2, p)
    assert not chk.holds
    assert chk.margin == pytest.approx(1.44 * 2 + 0.44 * 2 - 4)


def test_condition_from_domination(rng):
    rho = 1.5
    T1 = rand_complex(rng, 3)
    T1 *= 0.9 / rho_radius(T1, rho).value
    T0 = rand_complex(rng, 3)
    T0 *= 0.9 / rho_radius(T0, rho).value
    c = domination_constant(T1, T0, rho, TorusGrid(4096)).c * (1 + 1e-6)
    for _ in range(20):
        p = random_herglotz(rng)
        for s in (1.0, 0.5):
            chk = condition_i_check(T1, T0, rho, c, p, scale=s)
            assert chk.margin >= -1e-7 * max(1.0, abs(p.coefficients[0]))
