"""Lee-Friedrichs representation of the perturbed Hamiltonian.

The discrete channel supplies levels 2*pi*eps*a*s + mu carried by the ladder
vectors, the field channel supplies one continuum state per energy, and the
coupling density between them is v_s(omega) = beta J_{-M(omega)} J_{-s}:
band-wise constant in omega and discontinuous at every band edge, which is
what obstructs analytic continuation of the density itself.  The form check
below evaluates <H_B psi, phi> both from the defining operator blocks and
from this representation; the omega-integrals are taken per band with the
level-to-band Jacobian absorbed, which is the normalization that makes the
decoupled diagonal terms match identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .fields import LatticeFieldVector, PiecewisePoly
from .impurity import ImpurityParams
from .numerics import ModelParams, mode_index


def spectral_density(s: int, omega: float, params: ModelParams,
                     imp: ImpurityParams) -> float:
    """v_s(omega) = beta * J_{-M(omega)}(theta) * J_{-s}(theta)."""
    m = mode_index(omega, params)
    return imp.beta * params.bessel(-m) * params.bessel(-s)


@dataclass(frozen=True)
class FriedrichsDensity:
    s: int
    omega: float
    value: float


def density_samples(s_values: Sequence[int], omegas: Sequence[float],
                    params: ModelParams, imp: ImpurityParams) -> List[FriedrichsDensity]:
    out = []
    for s in s_values:
        for w in omegas:
            out.append(FriedrichsDensity(s=int(s), omega=float(w),
                                         value=spectral_density(s, w, params, imp)))
    return out


# ---------------------------------------------------------------------------
# Test states and the two-way form evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FriedrichsState:
    """Finite test state: field component plus impurity-channel l2 component."""

    field: LatticeFieldVector
    channel: Dict[int, float]


def band_packet(p: int, profile_coeffs: Sequence[float],
                params: ModelParams) -> LatticeFieldVector:
    """Wave packet confined to band p: psi_n(y) = J_{n-p}(theta) * profile(y)."""
    window = params.cutoff + 4
    profiles = {}
    base = np.asarray(profile_coeffs, dtype=float)
    for n in range(p - window, p + window + 1):
        j = params.bessel(n - p)
        if j != 0.0:
            profiles[n] = PiecewisePoly.from_coeffs(base * j)
    return LatticeFieldVector(profiles)


def discrete_state(s: int, params: ModelParams) -> Dict[int, float]:
    """The ladder vector J^(s) truncated at the adaptive Bessel window."""
    window = params.cutoff + 4
    return {n: params.bessel(n - s) for n in range(s - window, s + window + 1)}


def mixed_state(packets: Sequence[Tuple[int, Sequence[float]]],
                channel_weights: Sequence[Tuple[int, float]],
                params: ModelParams) -> FriedrichsState:
    field = LatticeFieldVector({})
    for p, coeffs in packets:
        field = field.add_scaled(band_packet(p, coeffs, params), 1.0)
    channel: Dict[int, float] = {}
    for s, w in channel_weights:
        for n, v in discrete_state(s, params).items():
            channel[n] = channel.get(n, 0.0) + w * v
    return FriedrichsState(field=field, channel=channel)


def apply_hamiltonian_field(phi: LatticeFieldVector,
                            params: ModelParams) -> LatticeFieldVector:
    """(H phi)_n = hop (phi_{n-1} + phi_{n+1}) + (spacing n + eps a y) phi_n."""
    hop = -1.0 / (2.0 * math.pi * params.a) ** 2
    y_poly = PiecewisePoly.from_coeffs([0.0, params.ea])
    sites = phi.sites
    if not sites:
        return LatticeFieldVector({})
    out: Dict[int, PiecewisePoly] = {}
    for n in range(min(sites) - 1, max(sites) + 2):
        acc = PiecewisePoly.zero()
        prof = phi.profile(n)
        if not prof.is_zero:
            acc = acc + prof.scale(params.spacing * n) + prof.multiply(y_poly)
        for nb in (n - 1, n + 1):
            nb_prof = phi.profile(nb)
            if not nb_prof.is_zero:
                acc = acc + nb_prof.scale(hop)
        if not acc.is_zero:
            out[n] = acc
    return LatticeFieldVector(out)


def _apply_channel(channel: Dict[int, float], params: ModelParams,
                   mu: float) -> Dict[int, float]:
    hop = -1.0 / (2.0 * math.pi * params.a) ** 2
    out: Dict[int, float] = {}
    sites = sorted(channel)
    if not sites:
        return out
    for n in range(min(sites) - 1, max(sites) + 2):
        val = (params.spacing * n + mu) * channel.get(n, 0.0)
        val += hop * (channel.get(n - 1, 0.0) + channel.get(n + 1, 0.0))
        if val != 0.0:
            out[n] = val
    return out


def direct_form(psi: FriedrichsState, phi: FriedrichsState, params: ModelParams,
                imp: ImpurityParams) -> float:
    """<H_B psi, phi> from the defining blocks: H, H_d + mu, and the rank-one
    coupling through site 0."""
    value = apply_hamiltonian_field(psi.field, params).inner(phi.field)
    h_chan = _apply_channel(psi.channel, params, imp.mu)
    value += sum(v * phi.channel.get(n, 0.0) for n, v in h_chan.items())
    int_phi0 = phi.field.profile(0).integrate()
    int_psi0 = psi.field.profile(0).integrate()
    value += imp.beta * (psi.channel.get(0, 0.0) * np.conjugate(int_phi0)
                         + int_psi0 * phi.channel.get(0, 0.0))
    return float(np.real_if_close(value))


def _channel_overlap(channel: Dict[int, float], s: int, params: ModelParams) -> float:
    return sum(v * params.bessel(n - s) for n, v in channel.items())


def expansion_form(psi: FriedrichsState, phi: FriedrichsState, params: ModelParams,
                   imp: ImpurityParams, extra_bands: int = 2) -> float:
    """<H_B psi, phi> from the Lee-Friedrichs expansion: discrete levels,
    continuum energy integral, and the coupling density, band by band."""
    P = params.cutoff
    chan_sites = sorted(set(psi.channel) | set(phi.channel))
    s_lo = (min(chan_sites) - P - 2) if chan_sites else 0
    s_hi = (max(chan_sites) + P + 2) if chan_sites else -1
    value = 0.0

    overlaps_psi = {}
    overlaps_phi = {}
    for s in range(s_lo, s_hi + 1):
        overlaps_psi[s] = _channel_overlap(psi.channel, s, params)
        overlaps_phi[s] = _channel_overlap(phi.channel, s, params)
        value += (params.spacing * s + imp.mu) * overlaps_psi[s] * overlaps_phi[s]

    field_sites = sorted(set(psi.field.sites) | set(phi.field.sites))
    if field_sites:
        p_lo, p_hi = min(field_sites) - P - extra_bands, max(field_sites) + P + extra_bands
    else:
        p_lo, p_hi = 0, -1
    for p in range(p_lo, p_hi + 1):
        c_psi = psi.field.band_coefficient(p, params)
        c_phi_conj = phi.field.band_coefficient(p, params).conjugate()
        if c_psi.is_zero and c_phi_conj.is_zero:
            continue
        energy_poly = PiecewisePoly.from_coeffs([params.lam(p), params.ea])
        value += np.real(c_psi.multiply(c_phi_conj).multiply(energy_poly).integrate())
        if s_hi >= s_lo:
            int_psi = np.real(c_psi.integrate())
            int_phi = np.real(c_phi_conj.integrate())
            j_mp = params.bessel(-p)
            for s in range(s_lo, s_hi + 1):
                v_s = imp.beta * j_mp * params.bessel(-s)
                if v_s != 0.0:
                    value += v_s * (int_psi * overlaps_phi[s]
                                    + overlaps_psi[s] * int_phi)
    return float(value)


@dataclass(frozen=True)
class FriedrichsFormReport:
    direct: float
    expansion: float
    discrepancy: float
    tolerance: float
    passed: bool


def friedrichs_form_check(psi: FriedrichsState, phi: FriedrichsState,
                          params: ModelParams, imp: ImpurityParams,
                          tol: float = 1e-9) -> FriedrichsFormReport:
    d = direct_form(psi, phi, params, imp)
    e = expansion_form(psi, phi, params, imp)
    disc = abs(d - e)
    return FriedrichsFormReport(direct=d, expansion=e, discrepancy=disc,
                                tolerance=tol, passed=disc <= tol)
