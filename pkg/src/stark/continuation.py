"""Meromorphic continuation across the real axis within each ladder strip.

The resolvent quadratic forms are ladder sums of Cauchy-type integrals with
polynomial densities, so each integral splits exactly into a polynomial part
(integrated in closed form) plus the density value at the complex pole times
the branch-fixed band logarithm.  Crossing the band interval inside strip m
adds the 2*pi*i/(eps a) density term; the resulting functions are analytic
across the band, and the continued Krein determinant inherits the same
correction weighted by J_m(theta)^2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import BranchPointError, PoleError, SingularKreinError, StripError
from .fields import AnalyticVector, ExtendedVector
from .numerics import ModelParams, band_log, mode_index

EDGE_EXCLUSION = 1e-6
_SINGULAR_Q_TOL = 1e-14


class Direction(enum.Enum):
    """Continuation direction through the band interval of a strip."""

    FROM_ABOVE = "from-above-to-below"
    FROM_BELOW = "from-below-to-above"


@dataclass(frozen=True)
class Strip:
    """Vertical strip S_m between consecutive band edges."""

    m: int
    lower_edge: float
    upper_edge: float

    @property
    def width(self) -> float:
        return self.upper_edge - self.lower_edge


def strip(m: int, params: ModelParams) -> Strip:
    lo, hi = params.band_edges(m)
    return Strip(m=m, lower_edge=lo, upper_edge=hi)


@dataclass(frozen=True)
class ContinuedValue:
    z: complex
    strip: Strip
    direction: Direction
    value: complex


def require_in_strip(m: int, z: complex, params: ModelParams) -> None:
    lo, hi = params.band_edges(m)
    excl = EDGE_EXCLUSION * params.spacing
    if not (lo < z.real < hi):
        raise StripError(f"Re z = {z.real} outside strip S_{m} = ({lo}, {hi})")
    if min(abs(z.real - lo), abs(z.real - hi)) <= excl:
        raise StripError(
            f"Re z = {z.real} within edge exclusion zone ({excl:g}) of strip S_{m}")


def _correction_active(direction: Direction, z: complex) -> int:
    """+1 when the from-above correction applies, -1 for from-below, else 0."""
    if z.imag == 0.0:
        raise BranchPointError("continued forms are evaluated off the real axis")
    if direction is Direction.FROM_ABOVE and z.imag < 0:
        return +1
    if direction is Direction.FROM_BELOW and z.imag > 0:
        return -1
    return 0


# ---------------------------------------------------------------------------
# Cauchy-type integrals with polynomial densities
# ---------------------------------------------------------------------------

def _density_coeffs(n: int, n_prime: int, u1: AnalyticVector,
                    v1: AnalyticVector) -> np.ndarray:
    """Coefficients of h_{nn'}(y) = (u1(y))_{n'} * conj(v1(y))_n."""
    cu = u1.coeffs(n_prime)
    cv = np.conjugate(v1.coeffs(n))
    if not np.any(cu != 0) or not np.any(cv != 0):
        return np.zeros(1)
    return np.convolve(cu, cv)


def _poly_divide_at(coeffs: np.ndarray, w: complex):
    """Split h(y) = q(y)(y - w) + h(w); returns (q ascending, h(w))."""
    deg = len(coeffs) - 1
    q = np.zeros(max(deg, 1), dtype=complex)
    rem = complex(coeffs[-1])
    for k in range(deg - 1, -1, -1):
        q[k] = rem
        rem = coeffs[k] + rem * w
    return q[:deg] if deg > 0 else q[:0], rem


def _poly_integral_sym(coeffs: np.ndarray) -> complex:
    """Integral over (-pi, pi)."""
    if len(coeffs) == 0:
        return 0.0
    k = np.arange(len(coeffs))
    mono = (np.pi ** (k + 1) - (-np.pi) ** (k + 1)) / (k + 1)
    return complex(np.dot(coeffs, mono))


def cauchy_form(m: int, n: int, n_prime: int, z: complex, u1: AnalyticVector,
                v1: AnalyticVector, params: ModelParams) -> complex:
    """phi_m^{nn'}(z) = int_{-pi}^{pi} h_{nn'}(y) / (lambda_m + eps a y - z) dy.

    Closed form by polynomial division: the quotient integrates exactly, the
    remainder h(w) multiplies the band logarithm, w = (z - lambda_m)/(eps a).
    """
    z = complex(z)
    h = _density_coeffs(n, n_prime, u1, v1)
    if not np.any(h != 0):
        return 0.0 + 0.0j
    w = (z - params.lam(m)) / params.ea
    q, h_at_w = _poly_divide_at(h.astype(complex), w)
    log_term = band_log(m, z, params)
    return (_poly_integral_sym(q) + h_at_w * log_term) / params.ea


def density_at(m: int, n: int, n_prime: int, z: complex, u1: AnalyticVector,
               v1: AnalyticVector, params: ModelParams) -> complex:
    """h_{nn'}((z - lambda_m)/(eps a)), the analytically continued density."""
    w = (z - params.lam(m)) / params.ea
    return u1.evaluate(n_prime, w) * v1.evaluate_conj(n, w)


def continued_cauchy_form(m: int, n: int, n_prime: int, z: complex,
                          direction: Direction, u1: AnalyticVector,
                          v1: AnalyticVector, params: ModelParams) -> ContinuedValue:
    """Continuation of the Cauchy integral through the band of strip m."""
    z = complex(z)
    require_in_strip(m, z, params)
    sign = _correction_active(direction, z)
    value = cauchy_form(m, n, n_prime, z, u1, v1, params)
    if sign:
        value = value + sign * (2j * np.pi / params.ea) * density_at(
            m, n, n_prime, z, u1, v1, params)
    return ContinuedValue(z=z, strip=strip(m, params), direction=direction, value=value)


# ---------------------------------------------------------------------------
# Resolvent quadratic forms
# ---------------------------------------------------------------------------

def resolvent_form(u1: AnalyticVector, v1: AnalyticVector, z: complex,
                   params: ModelParams) -> complex:
    """<R(z) u1, v1> = sum_{l n n'} J_{n-l} J_{n'-l} phi_l^{nn'}(z)."""
    z = complex(z)
    P = params.cutoff
    total = 0.0 + 0.0j
    for n in v1.sites:
        for n_prime in u1.sites:
            l_lo, l_hi = max(n, n_prime) - P, min(n, n_prime) + P
            for l in range(l_lo, l_hi + 1):
                jj = params.bessel(n - l) * params.bessel(n_prime - l)
                if jj != 0.0:
                    total += jj * cauchy_form(l, n, n_prime, z, u1, v1, params)
    return total


def _band_m_density_sum(m: int, z: complex, u1: AnalyticVector, v1: AnalyticVector,
                        params: ModelParams) -> complex:
    total = 0.0 + 0.0j
    for n in v1.sites:
        jn = params.bessel(n - m)
        if jn == 0.0:
            continue
        for n_prime in u1.sites:
            jn2 = params.bessel(n_prime - m)
            if jn2 != 0.0:
                total += jn * jn2 * density_at(m, n, n_prime, z, u1, v1, params)
    return total


def continued_resolvent_form(m: int, z: complex, direction: Direction,
                             u1: AnalyticVector, v1: AnalyticVector,
                             params: ModelParams) -> complex:
    """Continuation of <R(z) u1, v1> through the band interval of strip m."""
    z = complex(z)
    require_in_strip(m, z, params)
    sign = _correction_active(direction, z)
    value = resolvent_form(u1, v1, z, params)
    if sign:
        value = value + sign * (2j * np.pi / params.ea) * _band_m_density_sum(
            m, z, u1, v1, params)
    return value


def continued_g_continuum(m: int, z: complex, direction: Direction,
                          params: ModelParams) -> complex:
    """Continuation of <R(z) chi_hat, chi_hat> through the band of strip m."""
    from .impurity import g_continuum

    z = complex(z)
    require_in_strip(m, z, params)
    sign = _correction_active(direction, z)
    value = g_continuum(z, params)
    if sign:
        value = value + sign * (2j * np.pi / params.ea) * params.bessel(m) ** 2
    return value


def continued_krein(m: int, z: complex, direction: Direction, params: ModelParams,
                    imp) -> "KreinEvaluation":
    """Q_m^-+ (z): continued Krein determinant in strip S_m."""
    from .impurity import KreinEvaluation, g_discrete, krein_tail_bound

    z = complex(z)
    require_in_strip(m, z, params)
    gd = g_discrete(z, params, imp)
    gc_cont = continued_g_continuum(m, z, direction, params)
    value = 1.0 - imp.beta**2 * gc_cont * gd
    tag = ("continued-into-lower(%d)" % m if direction is Direction.FROM_ABOVE
           else "continued-into-upper(%d)" % m)
    return KreinEvaluation(z=z, value=value, branch=tag,
                           truncation_order=params.cutoff,
                           tail_bound=krein_tail_bound(z, params, imp))


# ---------------------------------------------------------------------------
# The quadratic form tau(z) of the perturbed resolvent
# ---------------------------------------------------------------------------

def _second_channel_sums(u2, v2, z: complex, params: ModelParams, imp, exclude: int):
    """Ladder sums for the impurity channel with the `exclude` pole split off.

    Returns (P_u, P_v at the excluded index, and the regular parts of
    g_discrete, <R_d u2, chi>, <R_d chi, v2>, <R_d u2, v2>).
    """
    P = params.cutoff
    sites = sorted(set(u2) | set(v2))
    q_lo = min(-P, (min(sites) - P) if sites else -P)
    q_hi = max(P, (max(sites) + P) if sites else P)
    q_lo = min(q_lo, exclude)
    q_hi = max(q_hi, exclude)
    g_reg = 0.0 + 0.0j
    e1_reg = 0.0 + 0.0j
    e2_reg = 0.0 + 0.0j
    d_reg = 0.0 + 0.0j
    pu_star = pv_star = 0.0 + 0.0j
    for q in range(q_lo, q_hi + 1):
        jq0 = params.bessel(-q)
        pu = sum(val * params.bessel(n - q) for n, val in u2.items()) if u2 else 0.0
        pv = sum(np.conjugate(val) * params.bessel(n - q) for n, val in v2.items()) if v2 else 0.0
        if q == exclude:
            pu_star, pv_star = pu, pv
            continue
        denom = params.lam(q) - z + imp.mu
        g_reg += jq0 * jq0 / denom
        e1_reg += pu * jq0 / denom
        e2_reg += jq0 * pv / denom
        d_reg += pu * pv / denom
    return pu_star, pv_star, g_reg, e1_reg, e2_reg, d_reg


def _tau_value(z: complex, u: ExtendedVector, v: ExtendedVector,
               params: ModelParams, imp, m: int | None,
               direction: Direction | None) -> complex:
    """Shared kernel for tau and its continuations, in pole-factored form.

    The ladder pole nearest Re z is split off analytically so that the exact
    cancellation between the channel resolvent and the Krein denominator is
    performed in the algebra, not numerically.
    """
    from .impurity import g_continuum

    z = complex(z)
    beta = imp.beta
    chi_hat = AnalyticVector.chi_hat()
    if direction is None:
        A = resolvent_form(u.first, v.first, z, params)
        B1 = resolvent_form(u.first, chi_hat, z, params)
        B2 = resolvent_form(chi_hat, v.first, z, params)
        G = g_continuum(z, params)
    else:
        A = continued_resolvent_form(m, z, direction, u.first, v.first, params)
        B1 = continued_resolvent_form(m, z, direction, u.first, chi_hat, params)
        B2 = continued_resolvent_form(m, z, direction, chi_hat, v.first, params)
        G = continued_g_continuum(m, z, direction, params)

    p_star = mode_index(z.real - imp.mu, params)
    z0 = params.lam(p_star) + imp.mu
    delta = z0 - z
    if beta == 0.0 and abs(delta) < 1e-12 * params.spacing:
        raise PoleError(
            f"z={z} at embedded level lambda_{p_star}+mu of the decoupled operator",
            index=p_star)
    j_star = params.bessel(-p_star)
    pu, pv, g_reg, e1_reg, e2_reg, d_reg = _second_channel_sums(
        u.second, v.second, z, params, imp, exclude=p_star)

    b2g = beta * beta * G
    K = delta * (1.0 - beta * beta * g_reg * G) - b2g * j_star * j_star
    scale = abs(delta) * max(1.0, abs(b2g) * abs(g_reg)) + abs(b2g) * j_star * j_star
    if abs(K) < _SINGULAR_Q_TOL * max(scale, 1e-3):
        raise SingularKreinError(
            f"continued Krein determinant vanishes near z={z} (K={K})")

    numer = (beta * beta * (j_star * j_star + delta * g_reg) * B1 * B2
             - beta * (j_star * pu + delta * e1_reg) * B2
             - beta * B1 * (j_star * pv + delta * e2_reg)
             + b2g * j_star * (pu * e2_reg + pv * e1_reg)
             + delta * b2g * e1_reg * e2_reg
             + pu * pv * (1.0 - beta * beta * g_reg * G))
    return A + d_reg + numer / K


def tau_form(z: complex, u: ExtendedVector, v: ExtendedVector,
             params: ModelParams, imp) -> complex:
    """<R_B(z) u, v> on the physical branch."""
    return _tau_value(z, u, v, params, imp, m=None, direction=None)


def continued_tau(m: int, z: complex, direction: Direction, u: ExtendedVector,
                  v: ExtendedVector, params: ModelParams, imp) -> complex:
    """Meromorphic continuation of tau through the band of strip m; its poles
    are exactly the zeros of the continued Krein determinant."""
    require_in_strip(m, complex(z), params)
    return _tau_value(z, u, v, params, imp, m=m, direction=direction)
