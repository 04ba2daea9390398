"""Exact spectral data of the unperturbed operator H = H_d x I + I x (eps*a*y).

Everything here is closed-form: the discrete ladder eigenvectors are Bessel
rows, the resolvent is an explicit ladder sum, and the spectral family acts
band by band through a step cutoff in y.  Profiles are piecewise polynomials,
so spectral-measure values and projections are exact up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict

import numpy as np

from .errors import ContinuousSpectrumError, DomainError, PoleError
from .fields import LatticeFieldVector, PiecewisePoly
from .numerics import ModelParams, mode_index


@dataclass(frozen=True)
class StarkEigenvector:
    """l2 eigenvector of H_d for ladder level m: components J_{n-m}(theta)."""

    m: int
    window: int
    components: Dict[int, float]

    def norm(self) -> float:
        return math.sqrt(sum(v * v for v in self.components.values()))


def stark_eigenvector(m: int, params: ModelParams, window: int | None = None) -> StarkEigenvector:
    if window is None:
        window = params.eigenvector_window
    comps = {n: params.bessel(n - m) for n in range(m - window, m + window + 1)}
    return StarkEigenvector(m=m, window=window, components=comps)


@dataclass(frozen=True)
class GeneralizedEigenfunction:
    """Distributional eigenfunction data at energy lambda: the band index,
    the delta location y* in [-pi, pi), and the Bessel amplitudes."""

    lam: float
    m: int
    delta_location: float
    amplitudes: Dict[int, float]


def eigenfunction(lam: float, params: ModelParams) -> GeneralizedEigenfunction:
    if not math.isfinite(lam):
        raise DomainError(f"lambda must be finite, got {lam}")
    m = mode_index(lam, params)
    y_star = (lam - params.lam(m)) / params.ea
    window = params.eigenvector_window
    amps = {n: params.bessel(n - m) for n in range(m - window, m + window + 1)}
    return GeneralizedEigenfunction(lam=lam, m=m, delta_location=y_star, amplitudes=amps)


def discrete_resolvent_entry(n: int, n_prime: int, z: complex,
                             params: ModelParams) -> complex:
    """(R_d(z))_{nn'} = sum_m J_{n-m} J_{n'-m} / (lambda_m - z)."""
    z = complex(z)
    m_near = mode_index(z.real, params)
    if abs(params.lam(m_near) - z) < 1e-12 * params.spacing:
        raise PoleError(f"z={z} within 1e-12 of ladder level lambda_{m_near}", index=m_near)
    P = params.cutoff
    m_lo, m_hi = max(n, n_prime) - P, min(n, n_prime) + P
    total = 0.0 + 0.0j
    for m in range(m_lo, m_hi + 1):
        total += params.bessel(n - m) * params.bessel(n_prime - m) / (params.lam(m) - z)
    return total


def full_resolvent_entry(n: int, n_prime: int, y: float, z: complex,
                         params: ModelParams) -> complex:
    """Resolvent kernel of H at fixed y: reduces to the discrete resolvent at
    the shifted energy z - eps*a*y."""
    z = complex(z)
    if z.imag == 0.0:
        raise ContinuousSpectrumError(
            f"full resolvent needs Im z != 0 on the physical branch, got z={z}")
    if not (-math.pi < y < math.pi):
        raise DomainError(f"y must lie in (-pi, pi), got {y}")
    return discrete_resolvent_entry(n, n_prime, z - params.ea * y, params)


def _band_range(phi: LatticeFieldVector, params: ModelParams):
    sites = phi.sites
    if not sites:
        return range(0)
    P = params.cutoff
    return range(min(sites) - P, max(sites) + P + 1)


def spectral_measure_eta(lam: float, phi: LatticeFieldVector,
                         params: ModelParams) -> float:
    """eta(lambda) = <E_lambda phi, phi>, evaluated band by band.

    For each band p the y-integral of |<phi(y,.), J^(p)>|^2 runs up to the
    step location y* = (lambda - lambda_p)/(eps a), clipped to (-pi, pi).
    """
    total = 0.0
    for p in _band_range(phi, params):
        lo, hi = params.band_edges(p)
        if lam <= lo:
            continue
        c_p = phi.band_coefficient(p, params)
        if c_p.is_zero:
            continue
        density = c_p.multiply(c_p.conjugate())
        if lam >= hi:
            total += np.real(density.integrate())
        else:
            y_star = (lam - params.lam(p)) / params.ea
            total += np.real(density.integrate_upto(y_star))
    return float(total)


def apply_spectral_projection(lam: float, phi: LatticeFieldVector,
                              params: ModelParams) -> LatticeFieldVector:
    """E_lambda phi = sum_m <phi, J^(m)> J^(m) theta(lambda - lambda_m - eps a y)."""
    P = params.cutoff
    bands = list(_band_range(phi, params))
    clipped = {}
    for p in bands:
        lo, hi = params.band_edges(p)
        if lam <= lo:
            continue
        c_p = phi.band_coefficient(p, params)
        if c_p.is_zero:
            continue
        if lam >= hi:
            clipped[p] = c_p
        else:
            clipped[p] = c_p.truncate_above((lam - params.lam(p)) / params.ea)
    profiles: Dict[int, PiecewisePoly] = {}
    if clipped:
        n_lo = min(clipped) - P
        n_hi = max(clipped) + P
        for n in range(n_lo, n_hi + 1):
            acc = PiecewisePoly.zero()
            for p, c in clipped.items():
                j = params.bessel(n - p)
                if j != 0.0:
                    acc = acc + c.scale(j)
            if not acc.is_zero:
                profiles[n] = acc
    return LatticeFieldVector(profiles)
