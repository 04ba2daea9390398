"""Scalar special-function and complex-branch primitives.

Bessel functions of integer order are evaluated by Miller-style backward
recurrence with a final normalization through the linear completeness sum
J_0(x) + 2*sum_k J_{2k}(x) = 1, falling back to the power series for
|arg| < 1.  The quadratic completeness sum_p J_p(x)^2 = 1 is deliberately
left out of the normalization so it remains an independent invariant check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import BranchPointError, DomainError, ModelInconsistencyError

DEFAULT_ORDER_MAX = 512
DEFAULT_TAIL_TOL = 1e-14


# ---------------------------------------------------------------------------
# Bessel J of integer order, real argument
# ---------------------------------------------------------------------------

def _bessel_series(order: int, x: float, terms: int = 30) -> float:
    """Power series sum_{j} (-1)^j (x/2)^(order+2j) / (j! (order+j)!), order >= 0."""
    if x == 0.0:
        return 1.0 if order == 0 else 0.0
    half = 0.5 * x
    log_first = order * math.log(abs(half)) - math.lgamma(order + 1)
    if log_first < -340.0:  # underflows double precision entirely
        return 0.0
    term = math.exp(log_first)
    if half < 0 and order % 2:
        term = -term
    total = term
    for j in range(1, terms):
        term *= -(half * half) / (j * (order + j))
        total += term
    return total


@lru_cache(maxsize=128)
def _bessel_row(kmax: int, x: float) -> np.ndarray:
    """J_0(x)..J_kmax(x) for x > 0 by backward recurrence, read-only array."""
    m0 = max(kmax, int(math.ceil(x)))
    start = m0 + 20 + int(math.ceil(12.0 * math.sqrt(m0 + 1)))
    if start % 2:
        start += 1
    out = np.zeros(start + 1)
    jp1 = 0.0
    j = 1e-300
    out[start] = j
    for k in range(start, 0, -1):
        jm1 = (2.0 * k / x) * j - jp1
        jp1 = j
        j = jm1
        out[k - 1] = j
        if abs(j) > 1e250:
            out[k - 1:] /= 1e250
            j /= 1e250
            jp1 /= 1e250
    norm = out[0] + 2.0 * np.sum(out[2::2])
    row = out[: kmax + 1] / norm
    row.flags.writeable = False
    return row


def bessel_j(order: int, arg: float, order_max: int = DEFAULT_ORDER_MAX) -> float:
    """J_order(arg) for integer order, real argument.

    Absolute error <= 1e-14 for |arg| <= 50.  Satisfies
    J_{-n}(x) = (-1)^n J_n(x) exactly by construction.
    """
    order = int(order)
    if abs(order) > order_max:
        raise DomainError(
            f"Bessel order {order} beyond order_max={order_max}")
    if not math.isfinite(arg):
        raise DomainError(f"Bessel argument must be finite, got {arg}")
    sign = 1.0
    if order < 0:
        order = -order
        if order % 2:
            sign = -sign
    if arg < 0:
        arg = -arg
        if order % 2:
            sign = -sign
    if arg < 1.0:
        return sign * _bessel_series(order, arg)
    return sign * float(_bessel_row(order, arg)[order])


@lru_cache(maxsize=32)
def bessel_cutoff(theta: float, tail_tol: float = DEFAULT_TAIL_TOL) -> int:
    """Smallest P with |J_P(theta)|*(1 + |J_P(theta)|) < tail_tol."""
    P = int(abs(theta)) + 1
    while True:
        j = abs(bessel_j(P, theta, order_max=max(DEFAULT_ORDER_MAX, P + 1)))
        if j * (1.0 + j) < tail_tol:
            return P
        P += 1
        if P > 4 * DEFAULT_ORDER_MAX:
            raise DomainError("Bessel tail cutoff did not terminate")


# ---------------------------------------------------------------------------
# Model parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelParams:
    """Lattice/field parameters and derived scalars.

    a: lattice parameter (intersite distance is 2*pi*a), a > 0.
    epsilon: electric field parameter, > 0.
    theta: signed Bessel argument, |theta| = 1/(4 pi^3 a^3 epsilon); the sign
        is fixed at construction by the eigen-residual test.
    spacing: ladder level spacing 2*pi*epsilon*a.
    band_halfwidth: pi*epsilon*a; one band exactly tiles the gap.
    """

    a: float
    epsilon: float
    theta: float
    spacing: float
    band_halfwidth: float
    tail_tol: float = DEFAULT_TAIL_TOL
    order_max: int = DEFAULT_ORDER_MAX

    @classmethod
    def create(cls, a: float, epsilon: float, theta_sign: str = "auto",
               tail_tol: float = DEFAULT_TAIL_TOL) -> "ModelParams":
        if not (a > 0 and math.isfinite(a)):
            raise DomainError(f"lattice parameter a must be positive, got {a}")
        if not (epsilon > 0 and math.isfinite(epsilon)):
            raise DomainError(f"field parameter epsilon must be positive, got {epsilon}")
        magnitude = 1.0 / (4.0 * math.pi**3 * a**3 * epsilon)
        if theta_sign == "auto":
            sign = resolve_theta_sign(a, epsilon)
        elif theta_sign in ("+", "positive", "+1"):
            sign = 1.0
        elif theta_sign in ("-", "negative", "-1"):
            sign = -1.0
        else:
            raise DomainError(f"theta_sign must be auto/positive/negative, got {theta_sign!r}")
        return cls(
            a=a,
            epsilon=epsilon,
            theta=sign * magnitude,
            spacing=2.0 * math.pi * epsilon * a,
            band_halfwidth=math.pi * epsilon * a,
        )

    @property
    def ea(self) -> float:
        return self.epsilon * self.a

    def lam(self, m: int) -> float:
        """Ladder level lambda_m = 2*pi*epsilon*a*m."""
        return self.spacing * m

    def band_edges(self, p: int):
        """(lambda_p^-, lambda_p^+) = pi*eps*a*(2p -+ 1)."""
        return self.lam(p) - self.band_halfwidth, self.lam(p) + self.band_halfwidth

    def bessel(self, k: int) -> float:
        return bessel_j(k, self.theta, order_max=self.order_max)

    @property
    def cutoff(self) -> int:
        return bessel_cutoff(self.theta, self.tail_tol)

    def bessel_orders(self):
        """Orders -P..P with P the adaptive cutoff."""
        P = self.cutoff
        return np.arange(-P, P + 1)

    def bessel_values(self, orders) -> np.ndarray:
        orders = np.asarray(orders, dtype=int)
        vals = np.empty(orders.shape)
        for i, k in np.ndenumerate(orders):
            vals[i] = self.bessel(int(k))
        return vals

    @property
    def eigenvector_window(self) -> int:
        return int(max(40, abs(self.theta) + 30))

    def tail_mass(self) -> float:
        """Upper bound on sum_{|p|>P} J_p(theta)^2 via completeness."""
        orders = self.bessel_orders()
        inside = float(np.sum(self.bessel_values(orders) ** 2))
        return max(0.0, 1.0 - inside)

    def with_theta_sign(self, sign: float) -> "ModelParams":
        return replace(self, theta=math.copysign(abs(self.theta), sign))


def mode_index(lam: float, params: ModelParams) -> int:
    """M(lambda) = floor(lambda / (2 pi a eps) + 1/2); the band containing lambda."""
    return int(math.floor(lam / params.spacing + 0.5))


def band_log(p: int, z: complex, params: ModelParams) -> complex:
    """ln((lambda_p^+ - z)/(lambda_p^- - z)) on the branch with limits +-i*pi
    from above/below inside the band.

    The Moebius map sends C minus the closed band onto C minus the negative
    real axis, so the principal complex logarithm realizes exactly this branch.
    """
    lo, hi = params.band_edges(p)
    z = complex(z)
    if z.imag == 0.0 and lo <= z.real <= hi:
        raise BranchPointError(
            f"band_log({p}, z={z}): z on the branch interval [{lo}, {hi}]")
    return complex(np.log((hi - z) / (lo - z)))


# ---------------------------------------------------------------------------
# Theta sign resolution
# ---------------------------------------------------------------------------

def eigen_residual(theta: float, a: float, epsilon: float, m: int = 0,
                   window: int = 40) -> float:
    """l2 norm of ((H_d - lambda_m) J^(m)) over sites |n - m| <= window."""
    spacing = 2.0 * math.pi * epsilon * a
    hop = -1.0 / (2.0 * math.pi * a) ** 2
    ks = np.arange(-window - 1, window + 2)
    order_max = max(DEFAULT_ORDER_MAX, window + 2)
    J = np.array([bessel_j(int(k), theta, order_max=order_max) for k in ks])
    # residual at n-m = k needs J_{k-1}, J_k, J_{k+1}
    core = slice(1, len(ks) - 1)
    k_core = ks[core]
    resid = hop * (J[:-2] + J[2:]) + (spacing * k_core) * J[core]
    return float(np.linalg.norm(resid))


def resolve_theta_sign(a: float, epsilon: float, window: int = 40,
                       accept_tol: float = 1e-10, reject_floor: float = 0.1) -> float:
    """Pick the sign s for which theta = s/(4 pi^3 a^3 eps) satisfies the
    eigen-equation; exactly one sign must pass."""
    magnitude = 1.0 / (4.0 * math.pi**3 * a**3 * epsilon)
    scale = max(1.0, 2.0 * math.pi * epsilon * a)
    results = {}
    for sign in (1.0, -1.0):
        results[sign] = eigen_residual(sign * magnitude, a, epsilon, m=0, window=window)
    passing = [s for s, r in results.items() if r < accept_tol * scale]
    if len(passing) != 1:
        raise ModelInconsistencyError(
            f"theta sign resolution failed: residuals {results} "
            f"(accept < {accept_tol * scale:g}); expected exactly one passing sign")
    other = -passing[0]
    if results[other] < reject_floor * scale:
        raise ModelInconsistencyError(
            f"rejected theta sign has suspiciously small residual {results[other]:g}")
    return passing[0]
