from fractions import Fraction
from math import factorial

import numpy as np
import pytest

from evenindex.constants import (alpha, c_norm, chern_coefficient, eta,
                                 expansion_coefficient,
                                 expansion_coefficient_recursive,
                                 legendre_duplication_check, multi_indices,
                                 sigma_elementary)
from evenindex.quadrature import QuadratureSpec, integrate_real_line


def test_alpha_small_cases():
    assert alpha((0,)) == 1
    assert alpha((1,)) == Fraction(1, 2)
    assert alpha((0, 0)) == Fraction(1, 2)
    assert alpha(()) == 1


def test_expansion_coefficient_matches_recursion():
    for m in range(0, 5):
        for k in multi_indices(m, 8 - m):
            assert expansion_coefficient(k) == \
                expansion_coefficient_recursive(k)


def test_sigma_elementary_small():
    assert sigma_elementary(2) == (1, 1)
    assert sigma_elementary(3) == (2, 3, 1)


def test_sigma_elementary_against_brute_force():
    for n in range(1, 9):
        # brute force: expand prod (z + j) with numpy poly arithmetic
        poly = np.array([1.0])
        for j in range(n):
            poly = np.convolve(poly, np.array([1.0, j]))
        coeffs = poly[::-1]  # ascending powers
        assert np.allclose(coeffs[1:n + 1],
                           np.array(sigma_elementary(n), dtype=float))
        assert coeffs[0] == 0.0


def test_c_norm_values():
    assert c_norm(1.5) == pytest.approx(2.0)
    assert c_norm(1.0) == pytest.approx(np.pi)


@pytest.mark.parametrize("n", [2.4, 3.7])
def test_c_norm_matches_quadrature(n):
    spec = QuadratureSpec(abs_tol=1e-10)
    val = integrate_real_line(lambda s: (1 + s ** 2) ** (-n / 2), spec)
    assert val == pytest.approx(float(np.real(c_norm(n / 2))), abs=1e-9)


def test_legendre_duplication():
    for m in range(0, 21):
        assert legendre_duplication_check(m) <= 1e-12


def test_eta_recursion_exact():
    for m in range(0, 12, 2):
        assert Fraction(m + 1, 2) * eta(m + 2) == eta(m)


def test_chern_coefficients():
    assert chern_coefficient(0) == 1
    assert chern_coefficient(2) == -1
    assert chern_coefficient(4) == 6


def test_coefficient_factor_identity():
    # for even m >= 2: Gamma(m)/Gamma(m/2) = m! / (2 (m/2)!)
    for m in range(2, 12, 2):
        lhs = Fraction(factorial(m - 1), factorial(m // 2 - 1))
        rhs = Fraction(factorial(m), 2 * factorial(m // 2))
        assert lhs == rhs
