import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evenindex.algebra import (BlockOperator, TracedAlgebra, complex_power,
                               func_calc, herm_eig, resolvent, trace)
from evenindex.errors import (NotSelfAdjointError, ShapeMismatchError,
                              SpectrumError)

from conftest import random_hermitian, random_operator


def test_trace_of_identity_weighted(weighted_algebra):
    one = BlockOperator.identity(weighted_algebra)
    assert trace(weighted_algebra, one) == pytest.approx(2 + np.sqrt(2))


def test_trace_of_zero(weighted_algebra):
    zero = BlockOperator.zero(weighted_algebra)
    assert trace(weighted_algebra, zero) == 0


def test_trace_shape_mismatch(weighted_algebra):
    other = TracedAlgebra(((3, 1.0),))
    op = BlockOperator.identity(other)
    with pytest.raises(ShapeMismatchError):
        trace(weighted_algebra, op)


@given(seed=st.integers(0, 10 ** 6))
@settings(max_examples=30, deadline=None)
def test_trace_is_tracial(seed, ):
    rng = np.random.default_rng(seed)
    alg = TracedAlgebra(((3, 1.0), (2, float(np.sqrt(2)))))
    a = random_operator(alg, rng)
    b = random_operator(alg, rng)
    lhs = trace(alg, a @ b)
    rhs = trace(alg, b @ a)
    scale = a.norm() * b.norm() * alg.trace_of_identity()
    assert abs(lhs - rhs) <= 1e-12 * max(scale, 1.0)


@given(seed=st.integers(0, 10 ** 6))
@settings(max_examples=25, deadline=None)
def test_faithfulness(seed):
    rng = np.random.default_rng(seed)
    alg = TracedAlgebra(((3, 0.5), (2, 2.0)))
    a = random_operator(alg, rng)
    val = trace(alg, a.adjoint() @ a)
    assert val.real > 0 or a.norm() <= 1e-10


def test_herm_eig_diagonal():
    alg = TracedAlgebra(((2, 1.0),))
    d = BlockOperator(alg, [np.diag([3.0, 1.0])])
    dec = herm_eig(d)
    assert sorted(dec.eigenvalues[0]) == [1.0, 3.0]


def test_herm_eig_zero():
    alg = TracedAlgebra(((4, 1.0),))
    dec = herm_eig(BlockOperator.zero(alg))
    assert np.allclose(dec.eigenvalues[0], 0.0)


def test_herm_eig_rejects_nonhermitian():
    alg = TracedAlgebra(((2, 1.0),))
    op = BlockOperator(alg, [np.array([[0.0, 1.0], [0.0, 0.0]])])
    with pytest.raises(NotSelfAdjointError):
        herm_eig(op)


@given(seed=st.integers(0, 10 ** 6))
@settings(max_examples=20, deadline=None)
def test_herm_eig_reconstruction(seed):
    rng = np.random.default_rng(seed)
    alg = TracedAlgebra(((8, 1.0),))
    a = random_hermitian(alg, rng)
    dec = herm_eig(a)
    err = (dec.reconstruct() - a).norm()
    assert err <= 1e-10 * max(a.norm(), 1.0)
    u = dec.eigenvectors[0]
    assert np.linalg.norm(u @ u.conj().T - np.eye(8), 2) <= 1e-10


def test_func_calc_square():
    alg = TracedAlgebra(((2, 1.0),))
    d = BlockOperator(alg, [np.diag([1.0, -2.0])])
    sq = func_calc(d, lambda x: x ** 2)
    assert np.allclose(sq.data[0], np.diag([1.0, 4.0]))


def test_func_calc_identity_function(weighted_algebra):
    rng = np.random.default_rng(7)
    d = random_hermitian(weighted_algebra, rng)
    one = func_calc(d, lambda x: np.ones_like(x))
    assert (one - BlockOperator.identity(weighted_algebra)).norm() <= 1e-12


def test_func_calc_closed_form():
    alg = TracedAlgebra(((2, 1.0),))
    d = BlockOperator(alg, [np.diag([0.0, 1.0])])
    out = func_calc(d, lambda x: (1 + x ** 2) ** -1.5)
    assert np.allclose(out.data[0], np.diag([1.0, 2.0 ** -1.5]))


@given(seed=st.integers(0, 10 ** 6))
@settings(max_examples=20, deadline=None)
def test_func_calc_homomorphism(seed):
    rng = np.random.default_rng(seed)
    alg = TracedAlgebra(((5, 1.0),))
    d = random_hermitian(alg, rng)
    f = lambda x: np.exp(-x ** 2)
    g = lambda x: 1.0 / (1 + x ** 2)
    lhs = func_calc(d, lambda x: f(x) * g(x))
    rhs = func_calc(d, f) @ func_calc(d, g)
    assert (lhs - rhs).norm() <= 1e-10


def test_complex_power_identity_base():
    alg = TracedAlgebra(((3, 1.0),))
    d = BlockOperator.zero(alg)
    out = complex_power(d, 1.0, 2.0)
    assert (out - BlockOperator.identity(alg)).norm() <= 1e-14


def test_complex_power_scalar():
    alg = TracedAlgebra(((1, 1.0),))
    d = BlockOperator(alg, [np.array([[1.0]])])
    out = complex_power(d, 1.0, 0.5)
    assert np.allclose(out.data[0], [[2.0 ** -0.5]])


@given(seed=st.integers(0, 10 ** 6))
@settings(max_examples=15, deadline=None)
def test_complex_power_semigroup(seed):
    rng = np.random.default_rng(seed)
    alg = TracedAlgebra(((4, 1.0),))
    d = random_hermitian(alg, rng)
    z1 = 0.7 + 0.3j
    z2 = 1.1 - 0.2j
    lhs = complex_power(d, 1.0, z1) @ complex_power(d, 1.0, z2)
    rhs = complex_power(d, 1.0, z1 + z2)
    assert (lhs - rhs).norm() <= 1e-10 * max(rhs.norm(), 1.0)


def test_complex_power_rejects_nonpositive_base():
    alg = TracedAlgebra(((1, 1.0),))
    d = BlockOperator(alg, [np.array([[0.0]])])
    with pytest.raises(SpectrumError):
        complex_power(d, 0.0, 1.0)


def test_resolvent_scalar_cases():
    alg = TracedAlgebra(((2, 1.0),))
    d = BlockOperator.zero(alg)
    out = resolvent(d, 1.0, 1j)
    assert np.allclose(out.data[0], np.eye(2) / (1j - 1.0))

    d = BlockOperator(alg, [np.diag([1.0, 2.0])])
    out = resolvent(d, 0.0, 0.5j)
    expect = np.diag([1.0 / (0.5j - 1.0), 1.0 / (0.5j - 4.0)])
    assert np.allclose(out.data[0], expect)


@given(seed=st.integers(0, 10 ** 6))
@settings(max_examples=15, deadline=None)
def test_resolvent_residual_and_identity(seed):
    rng = np.random.default_rng(seed)
    alg = TracedAlgebra(((6, 1.0),))
    d = random_hermitian(alg, rng)
    lam, mu = 0.25 + 2.0j, 0.1 - 1.0j
    r_lam = resolvent(d, 1.0, lam)
    r_mu = resolvent(d, 1.0, mu)
    d2 = d @ d
    one = BlockOperator.identity(alg)
    target = lam * one - (one + d2)
    assert (target @ r_lam - one).norm() <= 1e-10 * max(r_lam.norm(), 1.0)
    # first resolvent identity in the (lam - A)^{-1} convention
    lhs = r_lam - r_mu
    rhs = (mu - lam) * (r_lam @ r_mu)
    assert (lhs - rhs).norm() <= 1e-10 * max(rhs.norm(), 1.0)


def test_resolvent_spectrum_collision():
    alg = TracedAlgebra(((1, 1.0),))
    d = BlockOperator(alg, [np.array([[1.0]])])
    with pytest.raises(SpectrumError):
        resolvent(d, 0.0, 1.0)
