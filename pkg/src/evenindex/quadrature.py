"""Quadrature engines for the two integrals that occur everywhere.

Two different shapes of integral appear:

* integrals over the auxiliary parameter s on the real line (or half line),
  with integrands decaying like an inverse power of s.  These are handled
  by the tan substitution s = tan(u) followed by adaptive panel refinement
  on the compact u-interval.  The substitution maps power-law tails to a
  mild endpoint behaviour that the adaptive refinement resolves.

* contour integrals (1/2 pi i) int_l lambda^{-w} F(lambda) d lambda over a
  vertical line l = {a + iv} with 0 < a < 1/2, where F is built from
  resolvents of operators whose spectrum lies in [1, oo), well to the right
  of the line.  The line is traversed downward (v from +oo to -oo), which
  is the orientation that makes (1/2 pi i) int lambda^{-w} (lambda-c)^{-1}
  equal c^{-w} for c to the right of the line.  Numerically this is a
  uniform trapezoid rule in v with Richardson extrapolation, plus an
  analytic bound on the discarded tail |v| > v_max.

All node ladders are deterministic: a fixed refinement sequence, pairwise
numpy summation, no randomness.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import QuadratureError


@dataclass(frozen=True)
class QuadratureSpec:
    """Parameters shared by the contour and s-line quadratures.

    contour_a is the abscissa of the vertical line and must stay in
    (0, 1/2) so the line separates 0 from the spectrum of 1 + s^2 + D^2.
    """

    contour_a: float = 0.25
    v_max: float = 64.0
    abs_tol: float = 1e-8
    max_nodes: int = 2 ** 15

    def __post_init__(self):
        if not 0 < self.contour_a < 0.5:
            raise ValueError("contour abscissa must lie in (0, 1/2)")
        if self.abs_tol <= 0 or self.v_max <= 0 or self.max_nodes < 16:
            raise ValueError("invalid quadrature parameters")


# ----------------------------------------------------------------------
# adaptive panel integration on a finite interval (vectorised Simpson)

def _adaptive_simpson(f: Callable[[np.ndarray], np.ndarray],
                      lo: float, hi: float,
                      abs_tol: float, max_nodes: int) -> complex:
    """Adaptive Simpson with a panel worklist; f maps arrays to arrays."""
    # panels: (a, b, fa, fm, fb, whole)
    a0, b0 = lo, hi
    xs = np.array([a0, (a0 + b0) / 2, b0])
    fs = np.asarray(f(xs), dtype=complex)
    panels = [(a0, b0, fs[0], fs[1], fs[2],
               (b0 - a0) / 6 * (fs[0] + 4 * fs[1] + fs[2]))]
    total = 0.0 + 0.0j
    nodes = 3
    budget_tol = abs_tol
    while panels:
        if nodes > max_nodes:
            raise QuadratureError(
                f"adaptive quadrature exceeded {max_nodes} nodes")
        # refine every pending panel at once
        mids_l = np.array([(p[0] + (p[0] + p[1]) / 2) / 2 for p in panels])
        mids_r = np.array([((p[0] + p[1]) / 2 + p[1]) / 2 for p in panels])
        fl = np.asarray(f(mids_l), dtype=complex)
        fr = np.asarray(f(mids_r), dtype=complex)
        nodes += 2 * len(panels)
        nxt = []
        for i, (a, b, fa, fm, fb, whole) in enumerate(panels):
            m = (a + b) / 2
            left = (m - a) / 6 * (fa + 4 * fl[i] + fm)
            right = (b - m) / 6 * (fm + 4 * fr[i] + fb)
            err = abs(left + right - whole) / 15
            # local tolerance proportional to panel share of the interval
            if err <= budget_tol * max((b - a) / (b0 - a0), 1e-3):
                total += left + right + (left + right - whole) / 15
            else:
                nxt.append((a, m, fa, fl[i], fm, left))
                nxt.append((m, b, fm, fr[i], fb, right))
        panels = nxt
    return total


def integrate_real_line(f: Callable[[np.ndarray], np.ndarray],
                        spec: QuadratureSpec,
                        half_line: bool = False) -> complex:
    """Integrate f over (-oo, oo) (or [0, oo)) via s = tan(u).

    f must accept an array of s values and return an array of values; the
    transformed integrand is forced to zero at the endpoints, which is
    correct whenever f decays faster than 1/s^2.
    """
    eps = 1e-12
    lo = 0.0 if half_line else -np.pi / 2 + eps
    hi = np.pi / 2 - eps

    def g(us: np.ndarray) -> np.ndarray:
        s = np.tan(us)
        jac = 1.0 / np.cos(us) ** 2
        return np.asarray(f(s), dtype=complex) * jac

    return _adaptive_simpson(g, lo, hi, spec.abs_tol, spec.max_nodes)


def integrate_even_line(f: Callable[[np.ndarray], np.ndarray],
                        spec: QuadratureSpec,
                        symmetry_check: bool = True) -> complex:
    """Integrate an even function over the whole line as 2 * int_0^oo.

    Evenness is verified at sample points before being exploited.
    """
    if symmetry_check:
        probe = np.array([0.37, 1.42, 3.9])
        left = np.asarray(f(-probe), dtype=complex)
        right = np.asarray(f(probe), dtype=complex)
        scale = max(float(np.max(np.abs(right))), 1.0)
        if float(np.max(np.abs(left - right))) > 1e-12 * scale:
            raise QuadratureError("integrand failed the evenness check")
    return 2.0 * integrate_real_line(f, spec, half_line=True)


# ----------------------------------------------------------------------
# vertical-line contour integrals

def _trapezoid_ladder(g: Callable[[np.ndarray], np.ndarray],
                      v_max: float, abs_tol: float,
                      max_nodes: int) -> tuple[complex, float]:
    """Trapezoid with node doubling and one-step Richardson on [-V, V]."""
    n = 129
    vs = np.linspace(-v_max, v_max, n)
    vals = np.asarray(g(vs), dtype=complex)
    h = vs[1] - vs[0]
    trap = h * (np.sum(vals) - 0.5 * (vals[0] + vals[-1]))
    prev_rich = None
    while True:
        mids = (vs[:-1] + vs[1:]) / 2
        mvals = np.asarray(g(mids), dtype=complex)
        h = h / 2
        new_trap = trap / 2 + h * np.sum(mvals)
        rich = (4 * new_trap - trap) / 3
        if prev_rich is not None and abs(rich - prev_rich) <= abs_tol / 4:
            return rich, abs(rich - prev_rich)
        # interleave nodes
        both = np.empty(vs.size + mids.size)
        both[0::2] = vs
        both[1::2] = mids
        vs = both
        allvals = np.empty(vals.size + mvals.size, dtype=complex)
        allvals[0::2] = vals
        allvals[1::2] = mvals
        vals = allvals
        trap = new_trap
        prev_rich = rich
        if vs.size > max_nodes:
            raise QuadratureError(
                f"contour quadrature exceeded {max_nodes} nodes "
                f"(last increment {abs(rich - prev_rich):.3e})")


def contour_tail_bound(w_real: float, resolvent_count: int,
                       numerator_norm: float, v_max: float) -> float:
    """Bound |(1/2 pi) int_{|v|>V} lambda^{-w} F dv| for resolvent chains.

    Uses |lambda^{-w}| <= |v|^{-Re w} and a distance-to-spectrum bound
    ||R(lambda)|| <= 1/|v| valid on the line (spectrum >= 1 > a).
    """
    p = w_real + resolvent_count
    if p <= 1:
        return np.inf
    return numerator_norm / np.pi * v_max ** (1 - p) / (p - 1)


def _tail_completion(g, v_max: float, p: float) -> complex:
    """Two-term asymptotic tail: fit g(v) ~ (c1 + c2/|v|) |v|^{-p} at the
    window edge and integrate the model over |v| > v_max analytically.

    On the line lambda = a + iv the integrand has a pure power asymptote
    (no oscillation: arg lambda tends to +-pi/2), so a two-point fit at
    v and 3v/4 captures the tail to relative order 1/V^2.
    """
    total = 0.0 + 0.0j
    for sign in (+1.0, -1.0):
        v1, v2 = sign * v_max, sign * 0.75 * v_max
        f1 = complex(np.asarray(g(np.array([v1])))[0]) * abs(v1) ** p
        f2 = complex(np.asarray(g(np.array([v2])))[0]) * abs(v2) ** p
        c2 = (f2 - f1) / (1.0 / abs(v2) - 1.0 / abs(v1))
        c1 = f1 - c2 / abs(v1)
        total += c1 * v_max ** (1 - p) / (p - 1) + c2 * v_max ** (-p) / p
    return total


def contour_integral(f_lambda: Callable[[np.ndarray], np.ndarray],
                     w: complex, spec: QuadratureSpec,
                     resolvent_count: int,
                     numerator_norm: float = 1.0) -> complex:
    """(1/2 pi i) int_l lambda^{-w} F(lambda) d lambda, line traversed down.

    ``f_lambda`` receives an array of lambda points on the line and must
    return the full scalar integrand lambda^{-w} * F(lambda), typically a
    trace of a resolvent chain.  The finite window [-V, V] is integrated
    by a uniform trapezoid ladder with Richardson extrapolation; the tail
    beyond the window is completed with a two-term power-law model whose
    exponent Re(w) + resolvent_count the caller supplies.  The window is
    doubled until two consecutive window sizes agree within tolerance.
    """
    a = spec.contour_a
    p = float(np.real(w)) + resolvent_count
    if p <= 1:
        raise QuadratureError("contour integrand does not decay")

    def g(vs: np.ndarray) -> np.ndarray:
        lam = a + 1j * vs
        return np.asarray(f_lambda(lam), dtype=complex)

    max_nodes = max(spec.max_nodes, 2 ** 17)
    v_max = spec.v_max
    previous = None
    for _ in range(11):
        core, _ = _trapezoid_ladder(g, v_max, spec.abs_tol / 2, max_nodes)
        value = core + _tail_completion(g, v_max, p)
        # downward orientation: (1/2 pi i) int_l = -(1/2 pi) int dv
        value = -value / (2 * np.pi)
        crude = contour_tail_bound(np.real(w), resolvent_count,
                                   numerator_norm, v_max)
        if previous is not None and abs(value - previous) <= spec.abs_tol / 2:
            return value
        if previous is None and crude <= spec.abs_tol / 8:
            # tail already provably negligible; no doubling needed
            return value
        previous = value
        v_max *= 2
    raise QuadratureError(
        f"contour window grew to {v_max:.3e} without convergence")


def principal_power(lam: np.ndarray, w: complex) -> np.ndarray:
    """lambda^{-w} on the principal branch (cut along the negative reals)."""
    return np.exp(-w * np.log(lam))


# ----------------------------------------------------------------------
# Gauss-Legendre on the tan-compactified line
#
# For the nested cocycle integrals the integrand is smooth and decays
# like an inverse power, so mapping v = scale * tan(u) and applying
# Gauss-Legendre on u converges geometrically with a small, fixed,
# deterministic node count.  Node ladders double until two consecutive
# levels agree within tolerance.

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        _GL_CACHE[n] = (x, w)
    return _GL_CACHE[n]


def gauss_line(f: Callable[[np.ndarray], np.ndarray],
               abs_tol: float, scale: float = 1.0,
               half_line: bool = False, start: int = 64,
               max_n: int = 4096) -> complex:
    """int f over (-oo,oo) (or [0,oo)) via v = scale*tan(u) + GL doubling."""
    lo = 0.0 if half_line else -np.pi / 2
    hi = np.pi / 2
    prev = None
    n = start
    while n <= max_n:
        x, w = _gl_nodes(n)
        u = (hi - lo) / 2 * x + (hi + lo) / 2
        v = scale * np.tan(u)
        jac = scale / np.cos(u) ** 2 * (hi - lo) / 2
        val = complex(np.sum(np.asarray(f(v), dtype=complex) * jac * w))
        if prev is not None and abs(val - prev) <= abs_tol:
            return val
        prev = val
        n *= 2
    raise QuadratureError(
        f"tan-mapped Gauss ladder did not converge by n = {max_n}")


def gauss_contour(f_lambda: Callable[[np.ndarray], np.ndarray],
                  abs_tol: float, contour_a: float = 0.25,
                  scale: float = 1.0, start: int = 64,
                  max_n: int = 4096) -> complex:
    """(1/2 pi i) int_l lambda^{-w} F d lambda with the downward line,
    computed as -(1/2 pi) int g(v) dv by the tan-mapped Gauss ladder.

    ``f_lambda`` maps an array of lambda = a + iv to the scalar integrand.
    """
    def g(vs: np.ndarray) -> np.ndarray:
        return np.asarray(f_lambda(contour_a + 1j * vs), dtype=complex)

    val = gauss_line(g, abs_tol * 2 * np.pi, scale=scale,
                     start=start, max_n=max_n)
    return -val / (2 * np.pi)
