import numpy as np
import pytest

from evenindex.errors import QuadratureError
from evenindex.quadrature import (QuadratureSpec, contour_integral,
                                  integrate_even_line, integrate_real_line,
                                  principal_power)

SPEC = QuadratureSpec()


def test_gaussian_integral():
    val = integrate_real_line(lambda s: np.exp(-s ** 2), SPEC)
    assert val == pytest.approx(np.sqrt(np.pi), abs=1e-10)


def test_half_line_lorentzian():
    # int_0^oo (1+s^2)^{-3/2} ds = 1
    val = integrate_real_line(lambda s: (1 + s ** 2) ** -1.5, SPEC,
                              half_line=True)
    assert val == pytest.approx(1.0, abs=1e-8)


def test_even_integration_with_check():
    val = integrate_even_line(lambda s: 1.0 / (1 + s ** 2) ** 2, SPEC)
    assert val == pytest.approx(np.pi / 2, abs=1e-8)


def test_even_check_rejects_odd_part():
    with pytest.raises(QuadratureError):
        integrate_even_line(lambda s: s + 1.0 / (1 + s ** 2) ** 2, SPEC)


def test_contour_orientation_is_cauchy():
    # (1/2 pi i) int_l lambda^{-w} (lambda - c)^{-1} = c^{-w}
    for c, w in [(2.0, 1.5), (5.5, 2.25), (1.0 + 0.0j, 3.0)]:
        val = contour_integral(
            lambda lam: principal_power(lam, w) / (lam - c),
            w, SPEC, resolvent_count=1)
        assert val == pytest.approx(complex(c) ** -complex(w), rel=1e-6)


def test_contour_second_order_pole():
    # derivative formula: (1/2 pi i) int lambda^{-w} (lambda-c)^{-2}
    #   = -w c^{-w-1}
    c, w = 3.0, 1.75
    val = contour_integral(
        lambda lam: principal_power(lam, w) / (lam - c) ** 2,
        w, SPEC, resolvent_count=2)
    assert val == pytest.approx(-w * c ** (-w - 1), rel=1e-7)


def test_contour_tail_doubling():
    # slow decay forces the engine to push v_max outward
    spec = QuadratureSpec(v_max=8.0, abs_tol=1e-6)
    c, w = 2.0, 2.5
    val = contour_integral(
        lambda lam: principal_power(lam, w) / (lam - c),
        w, spec, resolvent_count=1)
    assert val == pytest.approx(c ** -w, rel=1e-5)
