"""Spectral zeta functions and their numerical analytic continuation.

A zeta datum is a weight vector omega over the spectrum of D^2:

    Z(z) = sum_i omega_i (1 + E_i)^{-z - offset},

the weighted trace of b (1+D^2)^{-z-offset} in a basis diagonalising
D^2.  On a finite model Z is entire; geometric models at a cutoff
develop the poles of the infinite geometry only after continuation.

The continuation splits the Mellin integral at t = split:

    Z(z) = (1/Gamma(w)) [ int_0^split + int_split^oo ] t^{w-1} H(t) dt,
    w = z + offset,  H(t) = sum_i omega_i e^{-t (1 + E_i)},

fits the small-t piece against a declared exponent menu
H(t) ~ sum_a c_a t^a (least squares on a log grid), which integrates in
closed form to sum_a c_a split^{w+a} / (w + a), and integrates the
large-t piece numerically (entire in w).  Laurent coefficients at z = 0
come out of Taylor series of 1/Gamma and of the entire part; the menu
produces at most simple poles here since its exponents are distinct.
tau_j is the coefficient of z^{-1-j}:

    tau_j = res_{z=0} z^j Z(z),

so tau_{-1} is the constant term and tau_0 the plain residue.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import factorial
from pathlib import Path

import numpy as np
from scipy.special import gammaln, polygamma

from .errors import ContinuationError

DEFAULT_SPLIT = 1.0
DEFAULT_T_MAX = 60.0


@dataclass(frozen=True)
class ZetaSpec:
    """Eigendata for one zeta function: spectrum, weights, exponent shift."""

    energies: np.ndarray
    omega: np.ndarray
    power_offset: float
    descriptor: str = ""

    def __post_init__(self):
        if self.energies.shape != self.omega.shape:
            raise ValueError("energies and omega must align")
        if self.power_offset < 0:
            raise ValueError("power offset must be >= 0")


def zeta_eval(spec: ZetaSpec, z: complex) -> complex:
    """Exact finite eigensum; entire in z."""
    base = 1.0 + spec.energies
    return complex(np.sum(spec.omega * base ** (-(z + spec.power_offset))))


def heat_trace(spec: ZetaSpec, t) -> np.ndarray:
    """H(t) = sum omega_i exp(-t (1 + E_i)) for scalar or array t."""
    t = np.asarray(t, dtype=float)
    return np.exp(-np.multiply.outer(t, 1.0 + spec.energies)) @ spec.omega


@dataclass(frozen=True)
class LaurentData:
    """Laurent coefficients of Z around its critical point.

    coefficients[i] multiplies (z - critical)^(min_power + i); the
    default min_power = -1 stores a simple-pole expansion
    c_{-1}, c_0, c_1, ...  Deeper poles use min_power = -2 and below.
    """

    critical_point: complex
    coefficients: np.ndarray
    min_power: int = -1
    residual: float = 0.0
    condition: float = 1.0
    descriptor: str = ""
    menu: tuple[float, ...] = ()

    def coefficient(self, power: int) -> complex:
        idx = power - self.min_power
        if idx < 0:
            return 0.0 + 0.0j  # below the known pole order
        if idx >= len(self.coefficients):
            raise ContinuationError(
                f"coefficient of order {power} beyond fitted depth")
        return complex(self.coefficients[idx])

    def is_pole_free(self, tol: float = 1e-9) -> bool:
        return all(abs(self.coefficient(p)) <= tol
                   for p in range(self.min_power, 0))


def tau_j(data: LaurentData, j: int) -> complex:
    """Twisted residue tau_j = res (z-c)^j Z = coefficient of (z-c)^{-1-j}.

    j = -1 is the constant-term functional, j = 0 the plain residue,
    j = 1 the double-pole coefficient, and so on.
    """
    if j < -1:
        raise ValueError("tau_j defined for j >= -1")
    return data.coefficient(-1 - j)


def laurent_from_finite(spec: ZetaSpec, depth: int = 2) -> LaurentData:
    """Exact Taylor data of an entire (finite-model) zeta at z = 0."""
    base = 1.0 + spec.energies
    logs = np.log(base)
    head = spec.omega * base ** (-spec.power_offset)
    coeffs = [0.0]  # residue slot: entire, hence pole-free
    for l in range(depth + 1):
        coeffs.append(complex(np.sum(head * (-logs) ** l)) / factorial(l))
    return LaurentData(0.0, np.asarray(coeffs, dtype=complex),
                       descriptor=spec.descriptor)


# ----------------------------------------------------------------------
# series helpers for the Laurent assembly


def _series_mul(a: np.ndarray, b: np.ndarray, depth: int) -> np.ndarray:
    return np.convolve(a, b)[:depth + 1]


def _exp_log_series(x: float, depth: int) -> np.ndarray:
    """Taylor coefficients of s^z = exp(z log s) in z."""
    return np.array([np.log(x) ** l / factorial(l)
                     for l in range(depth + 1)])


def invgamma_taylor(center: float, depth: int) -> np.ndarray:
    """Taylor coefficients of 1/Gamma(center + x) up to x^depth.

    At center = 0 the identity 1/Gamma(x) = x / Gamma(1 + x) shifts the
    series of 1/Gamma(1+x) by one power.
    """
    if center < 0:
        raise ValueError("negative centers are not needed here")
    if center < 1e-12:
        inner = invgamma_taylor(1.0, depth)
        return np.concatenate([[0.0], inner[:depth]])
    logs = np.zeros(depth + 1)
    logs[0] = gammaln(center)
    for k in range(1, depth + 1):
        logs[k] = polygamma(k - 1, center) / factorial(k)
    neg = -logs
    out = np.zeros(depth + 1)
    out[0] = np.exp(neg[0])
    for n in range(1, depth + 1):
        out[n] = sum(k * neg[k] * out[n - k] for k in range(1, n + 1)) / n
    return out


# ----------------------------------------------------------------------
# Mellin continuation


def _fit_small_t(spec_heat, window: tuple[float, float],
                 menu: np.ndarray, npts: int):
    """Least squares of H against sum c_a t^a on a log grid."""
    t = np.geomspace(window[0], window[1], npts)
    h = np.asarray(spec_heat(t), dtype=complex)
    design = t[:, None] ** menu[None, :]
    scales = np.linalg.norm(design, axis=0)
    scales[scales == 0] = 1.0
    coef, *_ = np.linalg.lstsq(design / scales, h, rcond=None)
    coef = coef / scales
    fit = design @ coef
    hscale = float(np.max(np.abs(h)))
    residual = float(np.max(np.abs(h - fit)))
    residual = residual / hscale if hscale > 0 else residual
    condition = float(np.linalg.cond(design / scales))
    return coef, residual, condition, hscale


def _entire_part_taylor(spec_heat, offset: float, depth: int,
                        split: float, t_max: float) -> np.ndarray:
    """Taylor coefficients at z=0 of int_split^{t_max} t^{z+offset-1} H dt.

    Beyond t_max the integrand is below e^{-t_max} relative and ignored.
    """
    x, w = np.polynomial.legendre.leggauss(240)
    umax = np.log(t_max / split)
    u = (x + 1) / 2 * umax
    t = split * np.exp(u)
    h = np.asarray(spec_heat(t), dtype=complex)
    base = h * t ** offset * (umax / 2) * w  # includes dt = t du
    logs = np.log(t)
    out = np.empty(depth + 1, dtype=complex)
    for l in range(depth + 1):
        out[l] = np.sum(base * logs ** l) / factorial(l)
    return out


def mellin_continuation(spec: ZetaSpec, menu, depth: int | None = None,
                        window: tuple[float, float] = (0.08, 1.0),
                        split: float = DEFAULT_SPLIT,
                        t_max: float = DEFAULT_T_MAX,
                        npts: int = 120,
                        heat_fn=None,
                        residual_tol: float = 1e-6) -> LaurentData:
    """Assemble Laurent data of Z at z = 0 from the heat-trace split.

    menu lists the small-t exponents declared for this model and b-word;
    it must be declared, never auto-discovered, since recovering unknown
    asymptotic exponents from data is ill-posed at this precision.
    heat_fn optionally replaces the raw eigensum with an accelerated
    evaluator (Poisson-resummed theta functions for flat geometries).
    """
    menu = np.asarray(sorted(menu), dtype=float)
    if menu.size == 0:
        raise ContinuationError("empty exponent menu")
    offset = float(spec.power_offset)
    if depth is None:
        depth = max(1, int(np.ceil(offset)))
    spec_heat = heat_fn if heat_fn is not None else (
        lambda t: heat_trace(spec, t))
    if window[1] > split:
        raise ContinuationError("fit window must not pass the split point")

    coef, residual, condition, hscale = _fit_small_t(
        spec_heat, window, menu, npts)
    if hscale > 1e-13 and residual > residual_tol:
        raise ContinuationError(
            f"heat fit residual {residual:.2e} above {residual_tol:.0e}; "
            "exponent menu likely incomplete")

    inv_gamma = invgamma_taylor(offset, depth + 1)
    laurent = np.zeros(depth + 2, dtype=complex)  # z^{-1} .. z^{depth}
    split_series = _exp_log_series(split, depth + 1)

    for c_a, a in zip(coef, menu):
        pole_at = offset + a
        if abs(pole_at) < 1e-10:
            # c_a split^z / (z Gamma(w)): a genuine simple pole at z = 0
            series = _series_mul(inv_gamma, split_series, depth + 1)
            laurent += c_a * series[:depth + 2]
        else:
            # regular at z = 0: c_a split^{pole_at} split^z / ((z+p) Gamma)
            geom = np.array([(-1.0) ** l / pole_at ** (l + 1)
                             for l in range(depth + 2)])
            reg = _series_mul(geom, split_series, depth + 1) \
                * split ** pole_at
            series = _series_mul(inv_gamma, reg, depth + 1)
            laurent[1:] += c_a * series[:depth + 1]

    entire = _entire_part_taylor(spec_heat, offset, depth + 1, split, t_max)
    series = _series_mul(inv_gamma, entire, depth + 1)
    laurent[1:] += series[:depth + 1]

    return LaurentData(0.0, laurent, min_power=-1, residual=residual,
                       condition=condition, descriptor=spec.descriptor,
                       menu=tuple(float(a) for a in menu))


def continued_value(data: LaurentData, z: complex) -> complex:
    """Evaluate the Laurent model at a point away from the critical point."""
    dz = z - data.critical_point
    return complex(sum(
        c * dz ** (data.min_power + i)
        for i, c in enumerate(data.coefficients)))


# ----------------------------------------------------------------------
# persistence (structured text so harness runs are resumable)


def save_laurent(data: LaurentData, model_id: str, path: Path):
    record = {
        "model": model_id,
        "descriptor": data.descriptor,
        "menu": list(data.menu),
        "critical_point": [float(np.real(data.critical_point)),
                           float(np.imag(data.critical_point))],
        "min_power": data.min_power,
        "coefficients": [[float(c.real), float(c.imag)]
                         for c in data.coefficients],
        "residual": data.residual,
        "condition": data.condition,
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(record, indent=1))


def load_laurent(path: Path) -> tuple[str, LaurentData]:
    record = json.loads(Path(path).read_text())
    coeffs = np.array([complex(re, im)
                       for re, im in record["coefficients"]])
    cp = complex(*record["critical_point"])
    return record["model"], LaurentData(
        cp, coeffs, record["min_power"], record["residual"],
        record["condition"], record["descriptor"], tuple(record["menu"]))
