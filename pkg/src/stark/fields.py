"""Lattice vectors with y-profiles on (-pi, pi).

Profiles are stored as piecewise polynomials in y, which keeps every
operation the spectral machinery needs (products, inner products, clipping
at a step location) exact to rounding.  Plain polynomial profiles
(AnalyticVector) are the dense subset that admits analytic continuation in
y and are the only profiles continuation routines accept.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Tuple

import numpy as np

Y_LO = -np.pi
Y_HI = np.pi

_EDGE_TOL = 1e-15


def _poly_eval(coeffs: np.ndarray, y):
    """Evaluate ascending-order coefficients at y (scalar or array, may be complex)."""
    result = 0.0 * y + 0.0j if np.iscomplexobj(coeffs) or np.iscomplexobj(y) else 0.0 * y
    for c in coeffs[::-1]:
        result = result * y + c
    return result


def _poly_integral(coeffs: np.ndarray, lo: float, hi: float):
    """Exact integral of the polynomial over [lo, hi]."""
    k = np.arange(len(coeffs))
    mono = (hi ** (k + 1) - lo ** (k + 1)) / (k + 1)
    return np.dot(coeffs, mono)


def _poly_add(c1: np.ndarray, c2: np.ndarray) -> np.ndarray:
    n = max(len(c1), len(c2))
    out = np.zeros(n, dtype=np.result_type(c1.dtype, c2.dtype))
    out[: len(c1)] += c1
    out[: len(c2)] += c2
    return out


class PiecewisePoly:
    """Piecewise polynomial on (-pi, pi); pieces are (lo, hi, ascending coeffs)."""

    __slots__ = ("pieces",)

    def __init__(self, pieces: Iterable[Tuple[float, float, np.ndarray]] = ()):
        cleaned: List[Tuple[float, float, np.ndarray]] = []
        for lo, hi, coeffs in pieces:
            coeffs = np.atleast_1d(np.asarray(coeffs))
            if hi - lo > _EDGE_TOL and np.any(coeffs != 0):
                cleaned.append((float(lo), float(hi), coeffs))
        cleaned.sort(key=lambda p: p[0])
        self.pieces = cleaned

    @classmethod
    def zero(cls) -> "PiecewisePoly":
        return cls()

    @classmethod
    def from_coeffs(cls, coeffs, lo: float = Y_LO, hi: float = Y_HI) -> "PiecewisePoly":
        return cls([(lo, hi, np.atleast_1d(np.asarray(coeffs, dtype=float)
                     if not np.iscomplexobj(coeffs) else np.asarray(coeffs)))])

    @property
    def is_zero(self) -> bool:
        return not self.pieces

    def __call__(self, y: float):
        for lo, hi, coeffs in self.pieces:
            if lo - _EDGE_TOL <= y <= hi + _EDGE_TOL:
                return _poly_eval(coeffs, y)
        return 0.0

    def scale(self, factor) -> "PiecewisePoly":
        if factor == 0:
            return PiecewisePoly.zero()
        return PiecewisePoly([(lo, hi, coeffs * factor) for lo, hi, coeffs in self.pieces])

    def conjugate(self) -> "PiecewisePoly":
        return PiecewisePoly([(lo, hi, np.conjugate(coeffs)) for lo, hi, coeffs in self.pieces])

    def _breakpoints(self, other: "PiecewisePoly") -> List[float]:
        pts = {Y_LO, Y_HI}
        for lo, hi, _ in self.pieces + other.pieces:
            pts.add(lo)
            pts.add(hi)
        return sorted(pts)

    def _coeffs_on(self, lo: float, hi: float) -> np.ndarray:
        mid = 0.5 * (lo + hi)
        for plo, phi, coeffs in self.pieces:
            if plo - _EDGE_TOL <= mid <= phi + _EDGE_TOL:
                return coeffs
        return np.zeros(1)

    def __add__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        pts = self._breakpoints(other)
        pieces = []
        for lo, hi in zip(pts[:-1], pts[1:]):
            pieces.append((lo, hi, _poly_add(self._coeffs_on(lo, hi),
                                             other._coeffs_on(lo, hi))))
        return PiecewisePoly(pieces)

    def multiply(self, other: "PiecewisePoly") -> "PiecewisePoly":
        if self.is_zero or other.is_zero:
            return PiecewisePoly.zero()
        pts = self._breakpoints(other)
        pieces = []
        for lo, hi in zip(pts[:-1], pts[1:]):
            c1 = self._coeffs_on(lo, hi)
            c2 = other._coeffs_on(lo, hi)
            if np.any(c1 != 0) and np.any(c2 != 0):
                pieces.append((lo, hi, np.convolve(c1, c2)))
        return PiecewisePoly(pieces)

    def integrate(self) -> complex:
        return sum(_poly_integral(c, lo, hi) for lo, hi, c in self.pieces) if self.pieces else 0.0

    def integrate_upto(self, y_star: float) -> complex:
        total = 0.0
        for lo, hi, coeffs in self.pieces:
            if y_star <= lo:
                break
            total += _poly_integral(coeffs, lo, min(hi, y_star))
        return total

    def truncate_above(self, y_star: float) -> "PiecewisePoly":
        """Restriction to y <= y_star (right-continuous step convention)."""
        pieces = []
        for lo, hi, coeffs in self.pieces:
            if y_star <= lo + _EDGE_TOL:
                continue
            pieces.append((lo, min(hi, y_star), coeffs))
        return PiecewisePoly(pieces)

    def norm_sq(self) -> float:
        return float(np.real(self.multiply(self.conjugate()).integrate()))


@dataclass
class LatticeFieldVector:
    """Finite-support element of l2(Z; L2(-pi, pi)) with piecewise-poly profiles."""

    profiles: Dict[int, PiecewisePoly] = field(default_factory=dict)

    @classmethod
    def from_site_polys(cls, site_coeffs: Dict[int, Iterable[float]]) -> "LatticeFieldVector":
        return cls({int(n): PiecewisePoly.from_coeffs(np.asarray(c, dtype=complex)
                                                      if np.iscomplexobj(np.asarray(c))
                                                      else np.asarray(c, dtype=float))
                    for n, c in site_coeffs.items()})

    @classmethod
    def chi_hat(cls) -> "LatticeFieldVector":
        """chi * 1(y): unit mass at site 0 with constant profile 1."""
        return cls.from_site_polys({0: [1.0]})

    @property
    def sites(self) -> List[int]:
        return sorted(n for n, p in self.profiles.items() if not p.is_zero)

    def profile(self, n: int) -> PiecewisePoly:
        return self.profiles.get(n, PiecewisePoly.zero())

    def inner(self, other: "LatticeFieldVector") -> complex:
        """<self, other> = sum_n int self_n(y) conj(other_n(y)) dy."""
        total = 0.0
        for n, prof in self.profiles.items():
            oprof = other.profiles.get(n)
            if oprof is not None and not oprof.is_zero:
                total += prof.multiply(oprof.conjugate()).integrate()
        return total

    def norm_sq(self) -> float:
        return float(np.real(self.inner(self)))

    def band_coefficient(self, p: int, params) -> PiecewisePoly:
        """<Phi(y, .), J^(p)> as a function of y."""
        out = PiecewisePoly.zero()
        for n, prof in self.profiles.items():
            j = params.bessel(n - p)
            if j != 0.0:
                out = out + prof.scale(j)
        return out

    def add_scaled(self, other: "LatticeFieldVector", factor) -> "LatticeFieldVector":
        out = dict(self.profiles)
        for n, prof in other.profiles.items():
            out[n] = out.get(n, PiecewisePoly.zero()) + prof.scale(factor)
        return LatticeFieldVector(out)


@dataclass(frozen=True)
class AnalyticVector:
    """Finite-support lattice vector with plain polynomial y-profiles.

    These extend analytically in y, so they are the admissible test vectors
    for resolvent-form continuation.  Degree is capped to keep the Cauchy
    closed forms small.
    """

    site_coeffs: Dict[int, np.ndarray]
    max_degree: int = 8

    def __post_init__(self):
        clean = {}
        for n, c in self.site_coeffs.items():
            arr = np.atleast_1d(np.asarray(c))
            if len(arr) > self.max_degree + 1:
                raise ValueError(
                    f"profile degree {len(arr) - 1} exceeds max_degree={self.max_degree}")
            if np.any(arr != 0):
                clean[int(n)] = arr
        object.__setattr__(self, "site_coeffs", clean)

    @classmethod
    def chi_hat(cls) -> "AnalyticVector":
        return cls({0: np.array([1.0])})

    @property
    def sites(self) -> List[int]:
        return sorted(self.site_coeffs)

    def coeffs(self, n: int) -> np.ndarray:
        return self.site_coeffs.get(n, np.zeros(1))

    def evaluate(self, n: int, w) :
        """Profile at site n evaluated at (possibly complex) y = w."""
        return _poly_eval(self.coeffs(n), w)

    def evaluate_conj(self, n: int, w):
        """Analytic continuation of conj(profile): conjugate coefficients, then evaluate."""
        return _poly_eval(np.conjugate(self.coeffs(n)), w)

    def as_field(self) -> "LatticeFieldVector":
        return LatticeFieldVector({n: PiecewisePoly.from_coeffs(c)
                                   for n, c in self.site_coeffs.items()})


@dataclass(frozen=True)
class ExtendedVector:
    """Element of the extended space H + l2: (field component, impurity component)."""

    first: AnalyticVector
    second: Dict[int, complex]

    @classmethod
    def from_parts(cls, first: AnalyticVector | None = None,
                   second: Dict[int, complex] | None = None) -> "ExtendedVector":
        return cls(first if first is not None else AnalyticVector({}),
                   dict(second) if second else {})

    @property
    def second_sites(self) -> List[int]:
        return sorted(n for n, v in self.second.items() if v != 0)
