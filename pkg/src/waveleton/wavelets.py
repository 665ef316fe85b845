"""Orthonormal compactly supported wavelets on periodic dyadic grids.

Daubechies filters are built by spectral factorization, scaling functions
by the cascade (refinement) recursion, and all transforms use periodic
convolution so that every transform matrix is exactly orthogonal.

Tree nodes are keyed by ``(level, band)`` where ``level`` is a resolution
level counted over the whole signal (a signal of length ``2**J`` sits at
level ``J``) and ``band`` is the Paley-ordered filter path: the children of
``(j, b)`` are ``(j - 1, 2*b)`` (lowpass) and ``(j - 1, 2*b + 1)``
(highpass).  With this keying the MRA detail space D_j is node ``(j, 1)``
and the coarse approximation V_c is node ``(c, 0)`` in both tree modes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from math import comb, log2

import mpmath
import numpy as np

from .errors import ModeError, ShapeError, UndefinedEntropyError, UnsupportedOrderError

SQRT2 = np.sqrt(2.0)
MAX_VANISHING_MOMENTS = 10


@dataclass(frozen=True, eq=False)
class FilterPair:
    """Quadrature-mirror filter pair of an orthonormal wavelet family."""

    lowpass: np.ndarray
    highpass: np.ndarray
    vanishing_moments: int

    def __post_init__(self):
        lo = np.asarray(self.lowpass, dtype=float)
        lo.setflags(write=False)
        object.__setattr__(self, "lowpass", lo)
        hi = np.asarray(self.highpass, dtype=float)
        hi.setflags(write=False)
        object.__setattr__(self, "highpass", hi)

    @property
    def length(self) -> int:
        return len(self.lowpass)

    @property
    def support(self) -> tuple[int, int]:
        """Support ``[0, L-1]`` of the scaling function and wavelet."""
        return 0, self.length - 1

    @property
    def name(self) -> str:
        return "haar" if self.vanishing_moments == 1 else f"db{self.vanishing_moments}"

    def __repr__(self):
        return f"FilterPair({self.name})"


def quadrature_mirror(lowpass) -> np.ndarray:
    """highpass[k] = (-1)**k * lowpass[L-1-k]."""
    lo = np.asarray(lowpass, dtype=float)
    signs = np.where(np.arange(len(lo)) % 2 == 0, 1.0, -1.0)
    return signs * lo[::-1]


def _daubechies_lowpass(n: int) -> np.ndarray:
    # |H(w)|^2 = cos^{2N}(w/2) P(sin^2(w/2)); factor P, keep roots of the
    # z-polynomial inside the unit circle (extremal phase).
    mpmath.mp.dps = 50
    p_coeffs = [mpmath.mpf(comb(n - 1 + k, k)) for k in range(n)]
    poly = [mpmath.mpf(1)]
    for y in (mpmath.polyroots(p_coeffs[::-1], maxsteps=500, extraprec=200) if n > 1 else []):
        # y = (2 - z - 1/z)/4  ->  z^2 - (2 - 4y) z + 1 = 0
        b = 2 - 4 * y
        disc = mpmath.sqrt(b * b - 4)
        z1, z2 = (b + disc) / 2, (b - disc) / 2
        z = z1 if abs(z1) < 1 else z2
        # multiply poly by (x - z)
        poly = [c for c in poly] + [mpmath.mpf(0)]
        for i in range(len(poly) - 1, 0, -1):
            poly[i] = poly[i] - z * poly[i - 1]
    for _ in range(n):
        poly = poly + [mpmath.mpf(0)]
        for i in range(len(poly) - 1, 0, -1):
            poly[i] = poly[i] + poly[i - 1]
    coeffs = [mpmath.re(c) for c in poly]
    total = mpmath.fsum(coeffs)
    scale = mpmath.sqrt(2) / total
    h = np.array([float(c * scale) for c in coeffs])
    # roots inside the unit circle give the front-loaded (extremal phase) filter
    # when read from the lowest power; enforce that orientation explicitly
    if np.cumsum(h[::-1] ** 2)[len(h) // 2 - 1] > np.cumsum(h**2)[len(h) // 2 - 1]:
        h = h[::-1].copy()
    return h


def daubechies_filter(vanishing_moments: int) -> FilterPair:
    """Extremal-phase Daubechies filter with ``vanishing_moments`` moments."""
    n = int(vanishing_moments)
    if n != vanishing_moments or not 1 <= n <= MAX_VANISHING_MOMENTS:
        raise UnsupportedOrderError(
            f"vanishing_moments must be an integer in [1, {MAX_VANISHING_MOMENTS}], got {vanishing_moments!r}"
        )
    if n == 1:
        lo = np.array([1.0, 1.0]) / SQRT2
    else:
        lo = _daubechies_lowpass(n)
    return FilterPair(lo, quadrature_mirror(lo), n)


def haar() -> FilterPair:
    return daubechies_filter(1)


@dataclass(frozen=True)
class DyadicGrid:
    """Uniform periodic grid with ``2**level`` points per unit length on ``[a, b)``."""

    level: int
    extent: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        a, b = self.extent
        if not b > a:
            raise ShapeError(f"empty extent {self.extent}")
        n = (b - a) * 2.0**self.level
        if abs(n - round(n)) > 1e-9 or round(n) < 1:
            raise ShapeError(f"extent {self.extent} does not hold an integer number of level-{self.level} cells")

    @property
    def spacing(self) -> float:
        return 2.0 ** (-self.level)

    @property
    def n_points(self) -> int:
        a, b = self.extent
        return int(round((b - a) * 2.0**self.level))

    @property
    def points(self) -> np.ndarray:
        return self.extent[0] + self.spacing * np.arange(self.n_points)

    @property
    def length(self) -> float:
        return self.extent[1] - self.extent[0]


# --------------------------------------------------------------------------
# scaling function and wavelet values


def _integer_values(filt: FilterPair) -> np.ndarray:
    h = filt.lowpass
    L = filt.length
    m = np.zeros((L, L))
    for i in range(L):
        for j in range(L):
            k = 2 * i - j
            if 0 <= k < L:
                m[i, j] = SQRT2 * h[k]
    # phi(x) = sqrt2 sum_k h_k phi(2x - k) at integers, sum phi(k) = 1,
    # phi(L-1) = 0 (right-continuous support [0, L-1))
    a = np.vstack([m - np.eye(L), np.ones((1, L)), np.eye(L)[-1:]])
    rhs = np.zeros(L + 2)
    rhs[L] = 1.0
    values, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    values[-1] = 0.0
    return values / values.sum()


def dyadic_values(filt: FilterPair, level: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact values of phi and psi at ``x = i / 2**level`` on ``[0, L-1]``."""
    if level < 0:
        raise ShapeError("level must be nonnegative")
    h, g = filt.lowpass, filt.highpass
    L = filt.length
    phi = _integer_values(filt)
    for r in range(1, level + 1):
        n = (L - 1) * 2**r + 1
        new = np.zeros(n)
        step = 2 ** (r - 1)
        idx = np.arange(n)
        for k, hk in enumerate(h):
            src = idx - k * step
            ok = (src >= 0) & (src < len(phi))
            new[ok] += SQRT2 * hk * phi[src[ok]]
        phi = new
    # psi(x) = sqrt2 sum_k g_k phi(2x - k); 2x - k is again a level-`level` point
    n = len(phi)
    psi = np.zeros(n)
    idx = np.arange(n)
    step = 2**level
    for k, gk in enumerate(g):
        src = 2 * idx - k * step
        ok = (src >= 0) & (src < n)
        psi[ok] += SQRT2 * gk * phi[src[ok]]
    x = np.arange(n) / 2.0**level
    return x, phi, psi


@dataclass(frozen=True, eq=False)
class CascadeSamples:
    x: np.ndarray
    phi: np.ndarray
    psi: np.ndarray


def cascade_eval(filt: FilterPair, grid: DyadicGrid) -> CascadeSamples:
    """Sample phi and psi (not periodized) at the points of ``grid``.

    Grid points must be dyadic at the grid level; values outside the support
    ``[0, L-1)`` are zero.
    """
    if grid.level < 0:
        raise ShapeError("grid level must be nonnegative")
    _, phi, psi = dyadic_values(filt, grid.level)
    x = grid.points
    idx = np.rint(x * 2.0**grid.level).astype(int)
    if np.max(np.abs(idx - x * 2.0**grid.level)) > 1e-9:
        raise ShapeError("grid origin is not a dyadic point of the grid level")
    ok = (idx >= 0) & (idx < len(phi) - 1)
    out_phi = np.zeros(len(x))
    out_psi = np.zeros(len(x))
    out_phi[ok] = phi[idx[ok]]
    out_psi[ok] = psi[idx[ok]]
    return CascadeSamples(x, out_phi, out_psi)


# --------------------------------------------------------------------------
# periodic filter-bank steps along the last axis


def _check_even(n: int):
    if n % 2:
        raise ShapeError(f"cannot split a band of odd length {n}")


def analysis_step(x: np.ndarray, filt: FilterPair) -> tuple[np.ndarray, np.ndarray]:
    """One periodic analysis step along the last axis: (approximation, detail)."""
    x = np.asarray(x, dtype=float)
    m = x.shape[-1]
    _check_even(m)
    idx = (2 * np.arange(m // 2)[:, None] + np.arange(filt.length)[None, :]) % m
    blocks = x[..., idx]
    return blocks @ filt.lowpass, blocks @ filt.highpass


def synthesis_step(approx: np.ndarray, detail: np.ndarray, filt: FilterPair) -> np.ndarray:
    """Adjoint (= inverse) of :func:`analysis_step`."""
    approx = np.asarray(approx, dtype=float)
    detail = np.asarray(detail, dtype=float)
    if approx.shape != detail.shape:
        raise ShapeError("approximation and detail bands differ in shape")
    half = approx.shape[-1]
    m = 2 * half
    out = np.zeros(approx.shape[:-1] + (m,))
    base = 2 * np.arange(half)
    for k in range(filt.length):
        idx = (base + k) % m
        out[..., idx] += filt.lowpass[k] * approx + filt.highpass[k] * detail
    return out


# --------------------------------------------------------------------------
# coefficient trees


@dataclass
class CoefficientTree:
    mode: str
    depth: int
    base_level: int
    nodes: dict = field(default_factory=dict)

    @property
    def top_level(self) -> int:
        return self.base_level + self.depth

    @property
    def length(self) -> int:
        return sum(len(self.nodes[n]) for n in self.leaf_cover())

    def leaf_cover(self) -> list[tuple[int, int]]:
        """A disjoint cover of the whole signal made of stored nodes."""
        if self.mode == "mra":
            return mra_nodes(self)
        return [(self.base_level, b) for b in range(2**self.depth)]

    def approximation(self) -> np.ndarray:
        return self.nodes[(self.base_level, 0)]

    def detail(self, level: int) -> np.ndarray:
        return self.nodes[(level, 1)]

    def to_vector(self) -> np.ndarray:
        """MRA coefficients in order ``[V_c, D_c, D_{c+1}, ...]``."""
        if self.mode != "mra":
            raise ModeError("to_vector is defined for mra trees")
        return np.concatenate([self.nodes[n] for n in mra_nodes(self)])

    @classmethod
    def from_vector(cls, vector, depth: int, top_level: int | None = None) -> "CoefficientTree":
        vector = np.asarray(vector, dtype=float)
        n = len(vector)
        if n % 2**depth:
            raise ShapeError(f"length {n} not divisible by 2**{depth}")
        top = _default_top(n, depth) if top_level is None else top_level
        base = top - depth
        tree = cls("mra", depth, base)
        size = n // 2**depth
        tree.nodes[(base, 0)] = vector[:size].copy()
        pos = size
        for j in range(base, top):
            tree.nodes[(j, 1)] = vector[pos:pos + size].copy()
            pos += size
            size *= 2
        return tree


def mra_nodes(tree: CoefficientTree) -> list[tuple[int, int]]:
    c = tree.base_level
    return [(c, 0)] + [(j, 1) for j in range(c, tree.top_level)]


def _default_top(n: int, depth: int) -> int:
    if n > 0 and n & (n - 1) == 0:
        return int(log2(n))
    return depth


def _check_levels(n: int, levels: int):
    if levels < 0:
        raise ShapeError("levels must be nonnegative")
    if n == 0 or n % 2**levels:
        raise ShapeError(f"signal length {n} is not divisible by 2**{levels}")


def fwt(signal, filt: FilterPair, levels: int, top_level: int | None = None) -> CoefficientTree:
    """Periodic fast wavelet transform over ``levels`` dyadic splits."""
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1:
        raise ShapeError("fwt expects a one-dimensional signal")
    _check_levels(len(x), levels)
    top = _default_top(len(x), levels) if top_level is None else top_level
    tree = CoefficientTree("mra", levels, top - levels)
    approx = x
    for j in range(top - 1, top - levels - 1, -1):
        approx, detail = analysis_step(approx, filt)
        tree.nodes[(j, 1)] = detail
    tree.nodes[(top - levels, 0)] = approx
    return tree


def ifwt(tree: CoefficientTree, filt: FilterPair) -> np.ndarray:
    if tree.mode != "mra":
        raise ModeError("ifwt expects an mra-mode tree; use packet_reconstruct for packets")
    approx = tree.nodes[(tree.base_level, 0)]
    for j in range(tree.base_level, tree.top_level):
        approx = synthesis_step(approx, tree.nodes[(j, 1)], filt)
    return approx


def fwt_axis(x, filt: FilterPair, levels: int, axis: int = -1) -> np.ndarray:
    """MRA transform of every 1-D slice along ``axis``, packed as ``to_vector``."""
    x = np.moveaxis(np.asarray(x, dtype=float), axis, -1)
    _check_levels(x.shape[-1], levels)
    parts = []
    approx = x
    for _ in range(levels):
        approx, detail = analysis_step(approx, filt)
        parts.append(detail)
    out = np.concatenate([approx] + parts[::-1], axis=-1)
    return np.moveaxis(out, -1, axis)


def ifwt_axis(c, filt: FilterPair, levels: int, axis: int = -1) -> np.ndarray:
    c = np.moveaxis(np.asarray(c, dtype=float), axis, -1)
    n = c.shape[-1]
    _check_levels(n, levels)
    size = n // 2**levels
    approx = c[..., :size]
    pos = size
    for _ in range(levels):
        approx = synthesis_step(approx, c[..., pos:pos + size], filt)
        pos += size
        size *= 2
    return np.moveaxis(approx, -1, axis)


def fwt_matrix(n: int, filt: FilterPair, levels: int) -> np.ndarray:
    """Orthogonal matrix ``T`` with ``T @ x == fwt(x).to_vector()``."""
    return fwt_axis(np.eye(n), filt, levels, axis=0)


# --------------------------------------------------------------------------
# wavelet packets


def packet_decompose(signal, filt: FilterPair, depth: int, top_level: int | None = None) -> CoefficientTree:
    """Full wavelet-packet tree: every node down to ``depth`` splits."""
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1:
        raise ShapeError("packet_decompose expects a one-dimensional signal")
    _check_levels(len(x), depth)
    top = _default_top(len(x), depth) if top_level is None else top_level
    tree = CoefficientTree("packet", depth, top - depth)
    tree.nodes[(top, 0)] = x.copy()
    for j in range(top, top - depth, -1):
        for b in range(2 ** (top - j)):
            lo, hi = analysis_step(tree.nodes[(j, b)], filt)
            tree.nodes[(j - 1, 2 * b)] = lo
            tree.nodes[(j - 1, 2 * b + 1)] = hi
    return tree


def _check_packet(tree: CoefficientTree):
    if tree.mode != "packet":
        raise ModeError("operation requires a packet-mode tree")


def packet_reconstruct(tree: CoefficientTree, filt: FilterPair, basis=None) -> np.ndarray:
    """Synthesize the root signal from the nodes in ``basis`` (default: deepest level)."""
    _check_packet(tree)
    if basis is None:
        basis = tree.leaf_cover()
    chosen = set(basis)
    top = tree.top_level

    def value(node):
        if node in chosen:
            return np.asarray(tree.nodes[node], dtype=float)
        j, b = node
        if j <= tree.base_level:
            raise ShapeError(f"basis does not cover node {node}")
        return synthesis_step(value((j - 1, 2 * b)), value((j - 1, 2 * b + 1)), filt)

    return value((top, 0))


def zero_packet_tree(n: int, depth: int, top_level: int | None = None) -> CoefficientTree:
    """Packet tree of zeros matching the layout of ``packet_decompose``."""
    _check_levels(n, depth)
    top = _default_top(n, depth) if top_level is None else top_level
    tree = CoefficientTree("packet", depth, top - depth)
    for j in range(top, top - depth - 1, -1):
        size = n // 2 ** (top - j)
        for b in range(2 ** (top - j)):
            tree.nodes[(j, b)] = np.zeros(size)
    return tree


def packet_atom(n: int, filt: FilterPair, node: tuple[int, int], index: int,
                top_level: int | None = None) -> np.ndarray:
    """Discrete packet function: synthesis of a unit coefficient at ``node[index]``."""
    top = _default_top(n, 0) if top_level is None else top_level
    j, b = node
    depth = top - j
    if depth < 0 or not 0 <= b < 2**depth:
        raise ShapeError(f"node {node} outside a tree rooted at level {top}")
    tree = zero_packet_tree(n, depth, top)
    coeffs = tree.nodes[node]
    if not 0 <= index < len(coeffs):
        raise ShapeError(f"index {index} outside node {node} of length {len(coeffs)}")
    coeffs[index] = 1.0
    basis = _cover_containing(tree, node)
    return packet_reconstruct(tree, filt, basis)


def _cover_containing(tree: CoefficientTree, node) -> list[tuple[int, int]]:
    # siblings of every ancestor plus the node itself
    cover = [node]
    j, b = node
    while j < tree.top_level:
        cover.append((j, b ^ 1))
        j, b = j + 1, b // 2
    return cover


def shannon_entropy(coefficients) -> float:
    """-sum p ln p with p = c**2 / sum c**2 (nats)."""
    c = np.ravel(np.asarray(coefficients, dtype=float))
    energy = float(np.sum(c * c))
    if energy == 0.0:
        raise UndefinedEntropyError("entropy of an all-zero coefficient set is undefined")
    p = c * c / energy
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def _node_cost(coeffs: np.ndarray, energy: float) -> float:
    p = coeffs * coeffs / energy
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def basis_cost(tree: CoefficientTree, basis) -> float:
    """Additive Shannon cost of a node cover; equals the entropy of its coefficients."""
    energy = float(np.sum(tree.nodes[(tree.top_level, 0)] ** 2)) if (tree.top_level, 0) in tree.nodes else \
        sum(float(np.sum(tree.nodes[n] ** 2)) for n in basis)
    if energy == 0.0:
        raise UndefinedEntropyError("zero-energy tree")
    return sum(_node_cost(tree.nodes[n], energy) for n in basis)


def best_basis(tree: CoefficientTree, tie_tol: float = 1e-12) -> list[tuple[int, int]]:
    """Minimal-entropy admissible cover (Coifman-Wickerhauser); parents win ties."""
    _check_packet(tree)
    top = tree.top_level
    energy = float(np.sum(tree.nodes[(top, 0)] ** 2))
    if energy == 0.0:
        raise UndefinedEntropyError("best basis of a zero signal is undefined")
    best = {}
    for b in range(2**tree.depth):
        node = (tree.base_level, b)
        best[node] = (_node_cost(tree.nodes[node], energy), [node])
    for j in range(tree.base_level + 1, top + 1):
        for b in range(2 ** (top - j)):
            node = (j, b)
            own = _node_cost(tree.nodes[node], energy)
            c0, l0 = best[(j - 1, 2 * b)]
            c1, l1 = best[(j - 1, 2 * b + 1)]
            if own <= c0 + c1 + tie_tol:
                best[node] = (own, [node])
            else:
                best[node] = (c0 + c1, l0 + l1)
    return sorted(best[(top, 0)][1], key=lambda n: (-n[0], n[1]))


def admissible_bases(tree: CoefficientTree):
    """Enumerate every admissible cover of a packet tree (exponential; small depths only)."""
    _check_packet(tree)

    def covers(node):
        j, b = node
        yield [node]
        if j > tree.base_level:
            for left, right in product(list(covers((j - 1, 2 * b))), list(covers((j - 1, 2 * b + 1)))):
                yield left + right

    return list(covers((tree.top_level, 0)))
