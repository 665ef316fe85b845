"""Galerkin operator matrices from connection coefficients, and their compression."""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np
import scipy.sparse as sp

from .errors import RegularityError, ShapeError
from .wavelets import DyadicGrid, FilterPair, dyadic_values, fwt_matrix


@dataclass(frozen=True, eq=False)
class ConnectionTable:
    """Gamma_l = int phi^(d)(x) phi(x - l) dx for l in ``shifts``."""

    derivative_order: int
    shifts: np.ndarray
    values: np.ndarray
    filter: FilterPair

    @property
    def half_width(self) -> int:
        return int(self.shifts[-1])

    def __getitem__(self, shift: int) -> float:
        if abs(shift) > self.half_width:
            return 0.0
        return float(self.values[shift + self.half_width])

    def as_dict(self) -> dict[int, float]:
        return {int(s): float(v) for s, v in zip(self.shifts, self.values)}


def connection_coefficients(filt: FilterPair, derivative_order: int) -> ConnectionTable:
    """Solve the refinement eigenproblem for the derivative connection coefficients.

    The table satisfies Gamma = 2**d T Gamma with
    T[l, n] = sum_k h_k h_{k+n-2l}, normalized by sum_l l**d Gamma_l = (-1)**d d!.
    """
    d = int(derivative_order)
    if d < 1:
        raise ValueError("derivative_order must be a positive integer")
    if filt.vanishing_moments < d + 1:
        raise RegularityError(
            f"{filt.name} is not smooth enough for order-{d} connection coefficients "
            f"(need at least {d + 1} vanishing moments)"
        )
    h = filt.lowpass
    L = filt.length
    w = L - 2
    shifts = np.arange(-w, w + 1)
    size = len(shifts)

    def hh(k):
        return h[k] if 0 <= k < L else 0.0

    t = np.zeros((size, size))
    for i, l in enumerate(shifts):
        for j, n in enumerate(shifts):
            t[i, j] = sum(h[k] * hh(k + n - 2 * l) for k in range(L))
    a = np.vstack([2.0**d * t - np.eye(size), (shifts.astype(float) ** d)[None, :]])
    rhs = np.zeros(size + 1)
    rhs[-1] = (-1) ** d * factorial(d)
    gamma, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    # exact (anti)symmetry: odd orders antisymmetric, even symmetric
    gamma = 0.5 * (gamma + (-1) ** d * gamma[::-1])
    if d % 2:
        gamma[w] = 0.0
    return ConnectionTable(d, shifts, gamma, filt)


def connection_quadrature(filt: FilterPair, derivative_order: int, level: int = 12) -> dict[int, float]:
    """Quadrature oracle for first-order tables from dyadic cascade samples.

    phi' is approximated by centred differences of exact dyadic values, and the
    integral is taken for l >= 0 only; negative shifts follow by parts
    (Gamma_{-l} = -Gamma_l), which keeps the singular side of phi' away from the
    product.  Only ``derivative_order == 1`` is supported.
    """
    if derivative_order != 1:
        raise ValueError("the quadrature oracle covers first derivatives only")
    _, phi, _ = dyadic_values(filt, level)
    s = 2**level
    dphi = np.gradient(phi, 1.0 / s)
    w = filt.length - 2
    out = {}
    for l in range(0, w + 1):
        off = l * s
        out[l] = float(np.sum(dphi[off:] * phi[: len(phi) - off]) / s)
    for l in range(1, w + 1):
        out[-l] = -out[l]
    out[0] = 0.0
    return dict(sorted(out.items()))


def assemble_derivative_matrix(table: ConnectionTable, grid: DyadicGrid) -> np.ndarray:
    """Circulant Galerkin matrix of d^d/dx^d on the periodic level-j scaling space.

    Row m, column n holds 2**(j d) * Gamma_{m-n}; acting on scaling (or sample)
    coefficients it returns the coefficients of the derivative.
    """
    return circulant_from_table(table, grid.n_points, grid.spacing)


def circulant_from_table(table: ConnectionTable, n: int, spacing: float) -> np.ndarray:
    if n < 1:
        raise ShapeError("matrix size must be positive")
    mat = np.zeros((n, n))
    rows = np.arange(n)
    for shift, value in zip(table.shifts, table.values):
        if value == 0.0:
            continue
        # entry (m, n) with m - n == shift
        mat[rows, (rows - shift) % n] += value
    return mat / spacing**table.derivative_order


def scaling_overlaps(filt: FilterPair, quad_level: int = 12, extrapolate: bool = True) -> dict[int, float]:
    """int phi(x) phi(x - l) dx by Riemann sums of dyadic cascade values.

    With ``extrapolate`` the sums at levels ``quad_level - 1 .. quad_level + 1``
    are combined by Aitken's delta-squared rule, which removes the leading
    Hoelder-rate error of the rough low-order filters.
    """

    def riemann(level):
        _, phi, _ = dyadic_values(filt, level)
        s = 2**level
        out = {}
        for l in range(-(filt.length - 2), filt.length - 1):
            off = abs(l) * s
            out[l] = float(np.sum(phi[off:] * phi[: len(phi) - off]) / s) if off < len(phi) else 0.0
        return out

    if not extrapolate:
        return riemann(quad_level)
    a, b, c = (riemann(quad_level + k) for k in (-1, 0, 1))
    out = {}
    for l in b:
        den = c[l] - 2 * b[l] + a[l]
        num = (c[l] - b[l]) ** 2
        out[l] = c[l] - num / den if abs(den) > 1e-14 and abs(num / den) < abs(c[l] - b[l]) * 1e3 else c[l]
    return out


def mass_matrix(filt: FilterPair, grid: DyadicGrid, quad_level: int = 12, extrapolate: bool = True) -> np.ndarray:
    """Quadrature-backed Gram matrix of the periodized level-j scaling functions.

    This is the only integral-operator kernel in the model; it equals the
    identity up to quadrature error.
    """
    overlap = scaling_overlaps(filt, quad_level, extrapolate)
    n = grid.n_points
    mat = np.zeros((n, n))
    rows = np.arange(n)
    for l, v in overlap.items():
        mat[rows, (rows - l) % n] += v
    return mat


def wavelet_domain(matrix: np.ndarray, filt: FilterPair, levels: int | None = None) -> np.ndarray:
    """Standard-form conjugation T A T^T by the periodic FWT matrix T."""
    a = np.asarray(matrix, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ShapeError("wavelet_domain expects a square matrix")
    if levels is None:
        levels = int(np.log2(n))
    t = fwt_matrix(n, filt, levels)
    return t @ a @ t.T


def significant_fraction(matrix: np.ndarray, rel: float = 1e-6) -> float:
    a = np.abs(np.asarray(matrix))
    return float(np.count_nonzero(a > rel * a.max()) / a.size)


@dataclass(frozen=True, eq=False)
class CompressedOperator:
    shape: tuple[int, int]
    threshold: float
    entries: sp.csr_matrix
    dropped_norm_bound: float

    @property
    def stored(self) -> int:
        return int(self.entries.nnz)

    @property
    def sparsity_ratio(self) -> float:
        """Stored entries over total entries."""
        return self.stored / (self.shape[0] * self.shape[1])

    def triplets(self) -> list[tuple[int, int, float]]:
        coo = self.entries.tocoo()
        return list(zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()))


def compress(matrix, threshold: float) -> CompressedOperator:
    """Keep entries with ``|a_ij| > threshold``; bound = Frobenius norm of the rest."""
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    if sp.issparse(matrix):
        a = matrix.tocoo()
        keep = np.abs(a.data) > threshold
        dropped = float(np.sqrt(np.sum(a.data[~keep] ** 2)))
        kept = sp.csr_matrix((a.data[keep], (a.row[keep], a.col[keep])), shape=a.shape)
        return CompressedOperator(a.shape, float(threshold), kept, dropped)
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2:
        raise ShapeError("compress expects a matrix")
    keep = np.abs(a) > threshold
    dropped = float(np.sqrt(np.sum(a[~keep] ** 2)))
    kept = sp.csr_matrix(np.where(keep, a, 0.0))
    kept.eliminate_zeros()
    return CompressedOperator(a.shape, float(threshold), kept, dropped)


def apply_compressed(op: CompressedOperator, vector) -> np.ndarray:
    x = np.asarray(vector)
    if x.shape[0] != op.shape[1]:
        raise ShapeError(f"operator has {op.shape[1]} columns, vector has length {x.shape[0]}")
    return op.entries @ x
