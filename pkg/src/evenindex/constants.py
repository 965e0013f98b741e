"""Combinatorial and Gamma-function constants of the index formula.

Everything rational is computed with exact ``fractions.Fraction``
arithmetic; only the Gamma-function values go through floating point
(via log-Gamma to avoid overflow).
"""

from __future__ import annotations

from fractions import Fraction
from math import comb, factorial

import numpy as np
from scipy.special import gammaln, loggamma

SQRT_PI = float(np.sqrt(np.pi))


def alpha(k: tuple[int, ...]) -> Fraction:
    """alpha(k) = 1 / (k_1! ... k_m! (k_1+1)(k_1+k_2+2)...(|k|+m)).

    The empty multi-index gives alpha(()) = 1.
    """
    denom = 1
    partial = 0
    for i, ki in enumerate(k, start=1):
        if ki < 0:
            raise ValueError("multi-index entries must be >= 0")
        partial += ki
        denom *= factorial(ki) * (partial + i)
    return Fraction(1, denom)


def expansion_coefficient(k: tuple[int, ...]) -> int:
    """C(k) = (|k| + m)! alpha(k); always an integer.

    Combinatorially C(k) is the number of ways the resolvents collect to
    the right of the operator word, which is the product of binomials
    binom(k_1 + ... + k_i + i - 1, k_i).
    """
    value = alpha(k) * factorial(sum(k) + len(k))
    assert value.denominator == 1
    return int(value)


def expansion_coefficient_recursive(k: tuple[int, ...]) -> int:
    """C(k) by the push-through recursion (independent route, for tests)."""
    out = 1
    partial = 0
    for i, ki in enumerate(k, start=1):
        partial += ki
        out *= comb(partial + i - 1, ki)
    return out


def sigma_elementary(n: int) -> tuple[int, ...]:
    """Coefficients sigma_{n,1..n} with prod_{j=0}^{n-1}(z+j) = sum sigma_{n,j} z^j.

    Exact integer polynomial multiplication.  The empty product (n = 0)
    is the constant 1, for which the caller should use the convention
    sigma_{0,0} = 1; here n >= 1 is required.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    # poly coefficients of prod (z + j), ascending powers, starting from z
    coeffs = [0, 1]  # z itself (j = 0 factor)
    for j in range(1, n):
        new = [0] * (len(coeffs) + 1)
        for p, c in enumerate(coeffs):
            new[p] += c * j
            new[p + 1] += c
        coeffs = new
    return tuple(coeffs[1:n + 1])


def eta(m: int) -> Fraction:
    """Normalisation eta_m = 2^(m+1) (m/2)! / m! for even m."""
    if m % 2 or m < 0:
        raise ValueError("eta is defined for even m >= 0")
    return Fraction(2 ** (m + 1) * factorial(m // 2), factorial(m))


def chern_coefficient(m: int) -> Fraction:
    """Coefficient of the degree-m Chern component of a projection.

    Degree 0 is the projection itself (coefficient 1); for even m >= 2
    the component is coeff * (2p-1) (x) p^(x m) with
    coeff = (-1)^(m/2) m! / (2 (m/2)!).
    """
    if m % 2 or m < 0:
        raise ValueError("Chern components exist in even degrees only")
    if m == 0:
        return Fraction(1)
    sign = -1 if (m // 2) % 2 else 1
    return Fraction(sign * factorial(m), 2 * factorial(m // 2))


def c_norm(halfn: complex) -> complex:
    """C_{n/2} = Gamma(1/2) Gamma(n/2 - 1/2) / Gamma(n/2) = int (1+s^2)^{-n/2} ds.

    Requires Re(n/2) > 1/2; evaluated through log-Gamma so large arguments
    do not overflow.  As a function of n/2 it has a simple pole at 1/2,
    which is exactly the critical-point mechanism of the residue formulas.
    """
    halfn = complex(halfn)
    if halfn.real <= 0.5:
        raise ValueError("c_norm requires Re(n/2) > 1/2")
    if halfn.imag == 0:
        return complex(np.exp(gammaln(0.5) + gammaln(halfn.real - 0.5)
                              - gammaln(halfn.real)))
    return complex(np.exp(loggamma(0.5) + loggamma(halfn - 0.5)
                          - loggamma(halfn)))


def gamma_ratio(num: complex, den: complex) -> complex:
    """Gamma(num) / Gamma(den) via log-Gamma (both arguments off the poles)."""
    return complex(np.exp(loggamma(complex(num)) - loggamma(complex(den))))


def legendre_duplication_check(m: int) -> float:
    """Relative defect of 2^(m-1) Gamma((m+1)/2) = sqrt(pi) Gamma(m)/Gamma(m/2).

    For m = 0 the right-hand side degenerates to sqrt(pi)/2.
    """
    lhs = 2.0 ** (m - 1) * np.exp(gammaln((m + 1) / 2))
    if m == 0:
        rhs = SQRT_PI / 2
    else:
        rhs = SQRT_PI * np.exp(gammaln(m) - gammaln(m / 2))
    return abs(lhs - rhs) / abs(rhs)


def multi_indices(length: int, max_total: int):
    """All multi-indices k of the given length with |k| <= max_total."""
    if length == 0:
        yield ()
        return
    for first in range(max_total + 1):
        for rest in multi_indices(length - 1, max_total - first):
            yield (first,) + rest
