"""Independent brute-force references: truncated dense matrices and a sparse
discretization of the full extended operator.

These back every derived expected value.  They share no code path with the
closed forms: resolvent entries come from dense LU solves, the ladder from a
dense symmetric eigensolver, and the perturbed blocks from one sparse solve
on the joint (lattice x y-quadrature) + lattice space.  The impurity channel
is y-independent, so it enters the joint discretization once, coupled to the
field channel through the quadrature weights; solving a y-fixed extended
matrix per node and integrating afterwards would misrepresent that channel
beyond second order in beta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from numpy.polynomial.legendre import leggauss

from .errors import DomainError
from .fields import ExtendedVector
from .impurity import ImpurityParams
from .numerics import ModelParams


def hd_matrix(N: int, params: ModelParams, diag_shift: float = 0.0,
              y: float | None = None) -> np.ndarray:
    """Dense truncation of H_d (+ shift, + eps*a*y) on sites -N..N."""
    ns = np.arange(-N, N + 1)
    hop = -1.0 / (2.0 * math.pi * params.a) ** 2
    diag = params.spacing * ns + diag_shift
    if y is not None:
        diag = diag + params.ea * y
    mat = np.diag(diag.astype(float))
    off = np.full(2 * N, hop)
    mat += np.diag(off, 1) + np.diag(off, -1)
    return mat


def oracle_resolvent_entry(N: int, n: int, n_prime: int, y: float, z: complex,
                           params: ModelParams) -> complex:
    """x_n of (H_trunc(y) - z) x = e_{n'}, by dense LU."""
    if max(abs(n), abs(n_prime)) > N // 2:
        raise DomainError(f"|n|, |n'| must be <= N/2 = {N // 2} for edge safety")
    mat = hd_matrix(N, params, y=y).astype(complex)
    mat -= z * np.eye(2 * N + 1)
    rhs = np.zeros(2 * N + 1, dtype=complex)
    rhs[N + n_prime] = 1.0
    x = np.linalg.solve(mat, rhs)
    return complex(x[N + n])


def oracle_eigen(N: int, params: ModelParams) -> Tuple[np.ndarray, np.ndarray]:
    """Dense eigendecomposition of the truncated H_d; eigenvalues ascending."""
    w, v = np.linalg.eigh(hd_matrix(N, params))
    return w, v


def ladder_errors(N: int, params: ModelParams, bulk: int | None = None):
    """Bulk eigenvalue errors |lam_hat_m - lam_m| and eigenvector overlaps
    |<v_hat, J^(m)>| for |m| <= bulk (default N//4)."""
    if bulk is None:
        bulk = N // 4
    w, v = oracle_eigen(N, params)
    ns = np.arange(-N, N + 1)
    errors = {}
    overlaps = {}
    for m in range(-bulk, bulk + 1):
        target = params.lam(m)
        idx = int(np.argmin(np.abs(w - target)))
        errors[m] = abs(w[idx] - target)
        jm = np.array([params.bessel(int(n) - m) for n in ns])
        overlaps[m] = abs(float(np.dot(v[:, idx], jm)))
    return errors, overlaps


def first_resolvent_identity_defect(N: int, y: float, z: complex, w: complex,
                                    params: ModelParams) -> float:
    """Entrywise max of R(z) - R(w) - (z - w) R(z) R(w) on the truncation."""
    mat = hd_matrix(N, params, y=y).astype(complex)
    eye = np.eye(2 * N + 1)
    rz = np.linalg.inv(mat - z * eye)
    rw = np.linalg.inv(mat - w * eye)
    defect = rz - rw - (z - w) * (rz @ rw)
    return float(np.max(np.abs(defect)))


# ---------------------------------------------------------------------------
# Extended operator: sparse solve on (lattice x y-nodes) + lattice
# ---------------------------------------------------------------------------

@dataclass
class ExtendedOracle:
    """One factorized resolvent of the truncated extended operator at fixed z."""

    N: int
    n_nodes: int
    z: complex
    params: ModelParams
    imp: ImpurityParams

    def __post_init__(self):
        N, K = self.N, self.n_nodes
        params, imp, z = self.params, self.imp, self.z
        xg, wg = leggauss(K)
        self.y_nodes = xg * math.pi
        self.weights = wg * math.pi
        ns = np.arange(-N, N + 1)
        hop = -1.0 / (2.0 * math.pi * params.a) ** 2
        dim1 = (2 * N + 1) * K
        dim2 = 2 * N + 1
        rows, cols, vals = [], [], []

        def idx1(i_site: int, k: int) -> int:
            return i_site * K + k

        for i, n in enumerate(ns):
            site_e = params.spacing * n - z
            for k in range(K):
                rows.append(idx1(i, k)); cols.append(idx1(i, k))
                vals.append(site_e + params.ea * self.y_nodes[k])
                if i > 0:
                    rows.append(idx1(i, k)); cols.append(idx1(i - 1, k)); vals.append(hop)
                if i < 2 * N:
                    rows.append(idx1(i, k)); cols.append(idx1(i + 1, k)); vals.append(hop)
        for i, n in enumerate(ns):
            r = dim1 + i
            rows.append(r); cols.append(r)
            vals.append(params.spacing * n + imp.mu - z)
            if i > 0:
                rows.append(r); cols.append(dim1 + i - 1); vals.append(hop)
            if i < 2 * N:
                rows.append(r); cols.append(dim1 + i + 1); vals.append(hop)
        i0 = N  # index of lattice site 0
        for k in range(K):
            rows.append(idx1(i0, k)); cols.append(dim1 + i0); vals.append(imp.beta)
            rows.append(dim1 + i0); cols.append(idx1(i0, k))
            vals.append(imp.beta * self.weights[k])
        matrix = sp.csc_matrix(
            (np.asarray(vals, dtype=complex), (rows, cols)),
            shape=(dim1 + dim2, dim1 + dim2))
        self._dim1 = dim1
        self._lu = spla.splu(matrix)

    def _rhs(self, u: ExtendedVector) -> np.ndarray:
        N, K = self.N, self.n_nodes
        rhs = np.zeros(self._dim1 + 2 * N + 1, dtype=complex)
        for n in u.first.sites:
            if abs(n) > N:
                raise DomainError(f"site {n} outside truncation |n| <= {N}")
            vals = u.first.evaluate(n, self.y_nodes)
            rhs[(n + N) * K:(n + N) * K + K] = vals
        for n, val in u.second.items():
            if val != 0:
                if abs(n) > N:
                    raise DomainError(f"site {n} outside truncation |n| <= {N}")
                rhs[self._dim1 + n + N] = val
        return rhs

    def form(self, u: ExtendedVector, v: ExtendedVector) -> complex:
        """<R_B(z) u, v> on the truncated extended space."""
        x = self._lu.solve(self._rhs(u))
        N, K = self.N, self.n_nodes
        total = 0.0 + 0.0j
        for n in v.first.sites:
            vals = np.conjugate(v.first.evaluate(n, self.y_nodes))
            seg = x[(n + N) * K:(n + N) * K + K]
            total += np.sum(self.weights * seg * vals)
        for n, val in v.second.items():
            if val != 0:
                total += x[self._dim1 + n + N] * np.conjugate(val)
        return complex(total)

    def r22_entry(self, n: int, n_prime: int) -> complex:
        return self.form(ExtendedVector.from_parts(second={n_prime: 1.0}),
                         ExtendedVector.from_parts(second={n: 1.0}))
