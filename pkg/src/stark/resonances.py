"""Resonances as zeros of the continued Krein determinant.

Each strip S_m carries one weak-coupling resonance near the embedded
eigenvalue lambda_{m'} + mu, m' = M(lambda_m - mu).  Root polishing runs on
the pole-factored determinant K(z) = (lambda_{m'} + mu - z) * Q_m(z), which
is analytic near the embedded level, so Newton stays stable arbitrarily
close to the ladder pole.  The weak-coupling seed is the first-order root of
the dispersion relation; the continued bracket evaluated at the embedded
level carries the half-residue i*pi*J_m^2 on top of the principal-value log
sum, giving the resonance width pi * (beta^2/(eps a)) J_{m'}^2 J_m^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np

from .continuation import Direction, continued_g_continuum, continued_krein, require_in_strip
from .errors import (ConvergenceError, DegenerateMuError, PoleError,
                     StripEscapeError)
from .impurity import ImpurityParams, g_discrete
from .numerics import ModelParams, band_log, mode_index

MU_EDGE_GUARD = 1e-3
BETA_NEWTON_DIRECT = 0.15
NEWTON_MAX_ITER = 50
NEWTON_Q_TOL = 1e-12


@dataclass(frozen=True)
class Resonance:
    """A located zero of a continued Krein branch, with its diagnostics."""

    m: int
    location: complex
    direction: Direction
    residual: float
    seed: complex
    order_gap: float
    iterations: int

    @property
    def width(self) -> float:
        return -2.0 * self.location.imag


def check_mu_degeneracy(params: ModelParams, imp: ImpurityParams) -> None:
    """mu may not align an embedded level with a band edge."""
    frac = (imp.mu / params.spacing + 0.5) % 1.0
    if min(frac, 1.0 - frac) <= MU_EDGE_GUARD:
        raise DegenerateMuError(
            f"mu={imp.mu} places the embedded level within {MU_EDGE_GUARD} "
            f"of a band edge (offset {frac:g} of a spacing)")


def dispersion_lhs(z: complex, m: int, params: ModelParams,
                   imp: ImpurityParams) -> complex:
    """Left side of the resonance condition in strip m:
    (beta^2/eps a) * g_discrete(z) * (sum_p J_p^2 band_log(p, z) + 2 i pi J_m^2);
    equals 1 exactly at zeros of the from-above continued determinant."""
    z = complex(z)
    require_in_strip(m, z, params)
    gd = g_discrete(z, params, imp)
    P = params.cutoff
    s_log = 0.0 + 0.0j
    for p in range(-P, P + 1):
        jp = params.bessel(p)
        if jp != 0.0:
            s_log += jp * jp * band_log(p, z, params)
    bracket = s_log + 2j * np.pi * params.bessel(m) ** 2
    return (imp.beta**2 / params.ea) * gd * bracket


def perturbative_resonance(m: int, params: ModelParams, imp: ImpurityParams) -> complex:
    """First-order (beta^2) resonance location in strip m, from above.

    Real shift: -(beta^2/eps a) J_{m'}^2 sum_p J_p^2 ln|(lam_p^+ - z0)/(lam_p^- - z0)|.
    Imaginary part: -pi (beta^2/eps a) J_{m'}^2 J_m^2, the half-residue of the
    continued bracket at the embedded level z0 = lambda_{m'} + mu.
    """
    check_mu_degeneracy(params, imp)
    m_prime = mode_index(params.lam(m) - imp.mu, params)
    z0 = params.lam(m_prime) + imp.mu
    P = params.cutoff
    log_sum = 0.0
    for p in range(-P, P + 1):
        jp = params.bessel(p)
        if jp == 0.0:
            continue
        lo, hi = params.band_edges(p)
        log_sum += jp * jp * math.log(abs((hi - z0) / (lo - z0)))
    j_mp = params.bessel(m_prime) ** 2
    j_m = params.bessel(m) ** 2
    shift = (imp.beta**2 / params.ea) * j_mp
    return z0 - shift * log_sum - 1j * math.pi * shift * j_m


def perturbative_resonance_via_complex_log(m: int, params: ModelParams,
                                           imp: ImpurityParams) -> complex:
    """Same first-order root, assembled from the complex continued bracket at
    the embedded level: the from-below boundary value of the band logarithm
    (-i pi + ln|.|) for the resident band plus the 2 i pi J_m^2 continuation
    term.  Must agree with perturbative_resonance to rounding."""
    check_mu_degeneracy(params, imp)
    m_prime = mode_index(params.lam(m) - imp.mu, params)
    z0 = params.lam(m_prime) + imp.mu
    P = params.cutoff
    bracket = 0.0 + 0.0j
    for p in range(-P, P + 1):
        jp = params.bessel(p)
        if jp == 0.0:
            continue
        lo, hi = params.band_edges(p)
        if p == m:
            bracket += jp * jp * (math.log(abs((hi - z0) / (lo - z0))) - 1j * math.pi)
        else:
            bracket += jp * jp * band_log(p, complex(z0), params)
    bracket += 2j * math.pi * params.bessel(m) ** 2
    j_mp = params.bessel(m_prime) ** 2
    return z0 - (imp.beta**2 / params.ea) * j_mp * bracket


# ---------------------------------------------------------------------------
# Newton search on the pole-factored determinant
# ---------------------------------------------------------------------------

def _factored_determinant(m: int, params: ModelParams, imp: ImpurityParams,
                          direction: Direction) -> Tuple[Callable[[complex], complex], complex]:
    """K(z) = (z0 - z) * Q_m(z) with the ladder pole at z0 factored out."""
    m_prime = mode_index(params.lam(m) - imp.mu, params)
    z0 = params.lam(m_prime) + imp.mu
    j_star_sq = params.bessel(m_prime) ** 2
    beta_sq = imp.beta**2

    def K(z: complex) -> complex:
        g_reg = g_discrete(z, params, imp, exclude=m_prime)
        G = continued_g_continuum(m, z, direction, params)
        return (z0 - z) * (1.0 - beta_sq * g_reg * G) - beta_sq * j_star_sq * G

    return K, z0


def find_resonance(m: int, params: ModelParams, imp: ImpurityParams,
                   seed: complex | None = None,
                   direction: Direction = Direction.FROM_ABOVE,
                   tol: float = NEWTON_Q_TOL,
                   max_iter: int = NEWTON_MAX_ITER) -> Resonance:
    """Newton iteration on the continued Krein determinant in strip m.

    The derivative is a central difference with step 1e-7 * spacing.  Beyond
    beta = 0.15 the seed is continued in beta from the weak-coupling regime
    (predictor-corrector in 0.05 steps).
    """
    check_mu_degeneracy(params, imp)
    pert_seed = perturbative_resonance(m, params, imp)
    if seed is None:
        if imp.beta > BETA_NEWTON_DIRECT:
            seed = _beta_continued_seed(m, params, imp, direction, tol, max_iter)
        else:
            seed = pert_seed
    K, z0 = _factored_determinant(m, params, imp, direction)
    h = 1e-7 * params.spacing
    z = complex(seed)
    trace: List[complex] = [z]
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        k = K(z)
        dk = (K(z + h) - K(z - h)) / (2.0 * h)
        if dk == 0:
            raise ConvergenceError(f"vanishing derivative at {z}", trace=trace)
        step = k / dk
        z = z - step
        trace.append(z)
        denom = z0 - z
        if denom != 0 and abs(K(z) / denom) <= tol:
            z_try = z - K(z) / dk  # one polishing step, kept only if it helps
            if abs(K(z_try) / (z0 - z_try)) < abs(K(z) / denom):
                z = z_try
                trace.append(z)
            converged = True
            break
    if not converged:
        raise ConvergenceError(
            f"Newton failed to reach |Q| <= {tol:g} in {max_iter} iterations "
            f"for strip {m}", trace=trace)

    lo, hi = params.band_edges(m)
    half_ok = z.imag < 0 if direction is Direction.FROM_ABOVE else z.imag > 0
    if not (lo < z.real < hi and half_ok):
        raise StripEscapeError(
            f"root {z} escaped the open half-strip of S_{m} ({direction.value})")

    q_final = continued_krein(m, z, direction, params, imp).value
    if abs(q_final) > tol:
        raise ConvergenceError(
            f"polished root {z} has |Q| = {abs(q_final):g} > {tol:g}", trace=trace)
    residual = abs(dispersion_lhs(z, m, params, imp) - 1.0)
    if residual > 1e-10:
        raise ConvergenceError(
            f"dispersion residual {residual:g} above 1e-10 at {z}", trace=trace)
    return Resonance(m=m, location=z, direction=direction, residual=residual,
                     seed=complex(pert_seed), order_gap=abs(z - pert_seed),
                     iterations=iterations)


def _beta_continued_seed(m: int, params: ModelParams, imp: ImpurityParams,
                         direction: Direction, tol: float, max_iter: int) -> complex:
    """Predictor-corrector continuation in beta from the weak-coupling regime."""
    betas = list(np.arange(0.1, imp.beta, 0.05)) + [imp.beta]
    root = None
    prev_pert = None
    for b in betas[:-1]:
        sub = imp.with_beta(float(b))
        pert = perturbative_resonance(m, params, sub)
        if root is None:
            guess = pert
        else:
            guess = root + (pert - prev_pert)
        res = find_resonance(m, params, sub, seed=guess, direction=direction,
                             tol=tol, max_iter=max_iter)
        root, prev_pert = res.location, pert
    return root + (perturbative_resonance(m, params, imp) - prev_pert)


@dataclass(frozen=True)
class LadderResult:
    resonances: List[Resonance]
    failures: List[Tuple[int, str]]


def resonance_ladder(m_range: Sequence[int], params: ModelParams,
                     imp: ImpurityParams,
                     direction: Direction = Direction.FROM_ABOVE) -> LadderResult:
    """One resonance per strip; per-strip failures are collected, not raised."""
    found: List[Resonance] = []
    failures: List[Tuple[int, str]] = []
    for m in m_range:
        try:
            found.append(find_resonance(m, params, imp, direction=direction))
        except Exception as exc:  # noqa: BLE001 - failures reported individually
            failures.append((m, f"{type(exc).__name__}: {exc}"))
    found.sort(key=lambda r: r.location.real)
    return LadderResult(resonances=found, failures=failures)


# ---------------------------------------------------------------------------
# Argument-principle audit
# ---------------------------------------------------------------------------

def winding_number(func: Callable[[complex], complex], corners: Sequence[complex],
                   samples_per_edge: int = 256, max_doublings: int = 10) -> int:
    """Winding of func along the closed polygon through corners.

    Phase increments are accumulated edgewise; sampling doubles until every
    increment is below pi/2.
    """
    n = samples_per_edge
    for _ in range(max_doublings + 1):
        pts: List[complex] = []
        for i in range(len(corners)):
            z1 = corners[i]
            z2 = corners[(i + 1) % len(corners)]
            for t in np.linspace(0.0, 1.0, n, endpoint=False):
                pts.append(z1 + t * (z2 - z1))
        pts.append(pts[0])
        vals = np.array([func(z) for z in pts])
        if np.any(vals == 0):
            raise ConvergenceError("winding contour hit an exact zero")
        dphi = np.angle(vals[1:] / vals[:-1])
        if np.max(np.abs(dphi)) < 0.5 * np.pi:
            total = float(np.sum(dphi)) / (2.0 * np.pi)
            result = round(total)
            if abs(total - result) > 0.25:
                raise ConvergenceError(
                    f"winding sum {total} too far from an integer")
            return int(result)
        n *= 2
    raise ConvergenceError("winding sampling did not stabilize")


def lower_halfstrip_rectangle(m: int, params: ModelParams, inset: float = 1e-3,
                              depth: float = 0.5) -> List[complex]:
    """Counterclockwise rectangle spanning the lower half-strip of S_m,
    inset from the strip edges and the real axis; depths in spacing units."""
    lo, hi = params.band_edges(m)
    dx = inset * params.spacing
    top = -inset * params.spacing
    bottom = -depth * params.spacing
    return [complex(lo + dx, bottom), complex(hi - dx, bottom),
            complex(hi - dx, top), complex(lo + dx, top)]


def count_zeros_lower_halfstrip(m: int, params: ModelParams, imp: ImpurityParams,
                                inset: float = 1e-3, depth: float = 0.5) -> int:
    """Argument-principle count of continued-determinant zeros in the
    rectangle spanning the lower half-strip of S_m."""
    corners = lower_halfstrip_rectangle(m, params, inset=inset, depth=depth)

    def q_cont(z: complex) -> complex:
        return continued_krein(m, z, Direction.FROM_ABOVE, params, imp).value

    return winding_number(q_cont, corners)


def point_in_rectangle(z: complex, corners: Sequence[complex]) -> bool:
    res = [c.real for c in corners]
    ims = [c.imag for c in corners]
    return min(res) < z.real < max(res) and min(ims) < z.imag < max(ims)
