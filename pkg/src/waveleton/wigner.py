"""Wigner quasiprobability functions of pure states on periodic phase-space grids.

Layout of a :class:`PhaseSpaceField`: ``values[i, m]`` is W at
``q_i = q_lo + i*dq`` and ``p_m = p_lo + m*dp`` with ``dq = (q_hi-q_lo)/nq``
and ``dp = (p_hi-p_lo)/np``; both axes are periodic.

The transform samples the autocorrelation ``conj(psi(q+y)) psi(q-y)`` on
``y_k = k*dy`` with ``dy = pi*hbar/(np*dp)`` and ``k`` in ``[-np/2, np/2]``
(the two end points share one DFT bin and get half weight each), so a single
length-``np`` DFT per row lands exactly on the p-grid.  Off-grid values of
psi come from band-limited (Fourier-shift) interpolation; with the default
p-grid ``dy = dq/2``, i.e. the y-grid is the 2x oversampled q-grid.  The
autocorrelation is cut at ``|y| <= y_window`` (default a quarter of the q
period) so that a state never interferes with its own periodic image.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import AliasingError, EmptyStateError, ShapeError
from .wavelets import FilterPair, packet_atom, packet_reconstruct


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@dataclass(frozen=True, eq=False)
class PhaseSpaceField:
    values: np.ndarray
    q_extent: tuple[float, float]
    p_extent: tuple[float, float]
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ShapeError("PhaseSpaceField values must be a 2-D array")
        nq, np_ = v.shape
        if not (_is_pow2(nq) and _is_pow2(np_)):
            raise ShapeError(f"grid sizes must be powers of two, got {v.shape}")
        if not (self.q_extent[1] > self.q_extent[0] and self.p_extent[1] > self.p_extent[0]):
            raise ShapeError("empty phase-space extent")
        if self.hbar <= 0 or self.mass <= 0:
            raise ValueError("hbar and mass must be positive")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "q_extent", (float(self.q_extent[0]), float(self.q_extent[1])))
        object.__setattr__(self, "p_extent", (float(self.p_extent[0]), float(self.p_extent[1])))

    @property
    def nq(self) -> int:
        return self.values.shape[0]

    @property
    def np(self) -> int:
        return self.values.shape[1]

    @property
    def dq(self) -> float:
        return (self.q_extent[1] - self.q_extent[0]) / self.nq

    @property
    def dp(self) -> float:
        return (self.p_extent[1] - self.p_extent[0]) / self.np

    @property
    def q(self) -> np.ndarray:
        return self.q_extent[0] + self.dq * np.arange(self.nq)

    @property
    def p(self) -> np.ndarray:
        return self.p_extent[0] + self.dp * np.arange(self.np)

    @property
    def cell_area(self) -> float:
        return self.dq * self.dp

    def mesh(self):
        return np.meshgrid(self.q, self.p, indexing="ij")

    def total(self) -> float:
        """Integral of W over the grid (midpoint rule on the periodic cell)."""
        return float(self.values.sum() * self.cell_area)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.values**2) * self.cell_area))

    def purity(self) -> float:
        return float(2 * np.pi * self.hbar * np.sum(self.values**2) * self.cell_area)

    def q_marginal(self) -> np.ndarray:
        return self.values.sum(axis=1) * self.dp

    def p_marginal(self) -> np.ndarray:
        return self.values.sum(axis=0) * self.dq

    def with_values(self, values) -> "PhaseSpaceField":
        return replace(self, values=np.asarray(values, dtype=float))

    def same_grid(self, other: "PhaseSpaceField") -> bool:
        return (self.values.shape == other.values.shape and self.q_extent == other.q_extent
                and self.p_extent == other.p_extent)


@dataclass(frozen=True, eq=False)
class PureState:
    """Wave function samples on a periodic q-grid, normalized with grid weight dq."""

    samples: np.ndarray
    q_extent: tuple[float, float]

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.ndim != 1 or len(s) < 2:
            raise ShapeError("PureState samples must be a 1-D sequence")
        object.__setattr__(self, "samples", s)
        norm = np.sum(np.abs(s) ** 2) * self.dq
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state is not normalized (norm {norm:.12g}); use PureState.normalized")

    @classmethod
    def normalized(cls, samples, q_extent) -> "PureState":
        s = np.asarray(samples, dtype=complex)
        dq = (q_extent[1] - q_extent[0]) / len(s)
        norm = np.sqrt(np.sum(np.abs(s) ** 2) * dq)
        if norm == 0:
            raise EmptyStateError("cannot normalize a zero state")
        return cls(s / norm, q_extent)

    @property
    def n(self) -> int:
        return len(self.samples)

    @property
    def dq(self) -> float:
        return (self.q_extent[1] - self.q_extent[0]) / len(self.samples)

    @property
    def q(self) -> np.ndarray:
        return self.q_extent[0] + self.dq * np.arange(self.n)

    @property
    def period(self) -> float:
        return self.q_extent[1] - self.q_extent[0]

    def translated(self, steps: int) -> "PureState":
        """Shift by an integer number of grid steps (periodic)."""
        return PureState(np.roll(self.samples, steps), self.q_extent)


# --------------------------------------------------------------------------
# state constructors


def q_grid(n: int, q_extent) -> np.ndarray:
    return q_extent[0] + (q_extent[1] - q_extent[0]) / n * np.arange(n)


def gaussian_state(n: int, q_extent, sigma: float = 1.0, q0: float = 0.0, p0: float = 0.0,
                   hbar: float = 1.0) -> PureState:
    q = q_grid(n, q_extent)
    psi = (np.pi * sigma**2) ** -0.25 * np.exp(-((q - q0) ** 2) / (2 * sigma**2) + 1j * p0 * q / hbar)
    return PureState.normalized(psi, q_extent)


def cat_state(n: int, q_extent, a: float = 2.0, sigma: float = 0.5, hbar: float = 1.0) -> PureState:
    """Even superposition of Gaussians centred at +-a."""
    q = q_grid(n, q_extent)
    g = np.exp(-((q - a) ** 2) / (2 * sigma**2)) + np.exp(-((q + a) ** 2) / (2 * sigma**2))
    return PureState.normalized(g, q_extent)


def packet_state(atoms, weights, filt: FilterPair, n: int, q_extent, top_level: int | None = None) -> PureState:
    """Superposition of discrete wavelet-packet functions.

    ``atoms`` are ``(level, band, index)`` triples in the keying of
    :mod:`waveleton.wavelets`; ``weights`` are their real amplitudes.
    """
    atoms = [tuple(int(v) for v in a) for a in atoms]
    weights = np.asarray(weights, dtype=float)
    if not atoms:
        raise EmptyStateError("empty packet selection")
    if len(weights) != len(atoms):
        raise ShapeError("one weight per packet atom is required")
    if not np.all(np.isfinite(weights)):
        raise ValueError("packet weights must be finite")
    psi = np.zeros(n)
    for (level, band, index), w in zip(atoms, weights):
        psi += w * packet_atom(n, filt, (level, band), index, top_level)
    if not np.any(psi):
        raise EmptyStateError("packet superposition vanishes")
    return PureState.normalized(psi, q_extent)


def node_state(tree, filt: FilterPair, basis, coefficients, q_extent) -> PureState:
    """Synthesize a state from per-node coefficient arrays of a packet tree layout."""
    if not basis:
        raise EmptyStateError("empty packet selection")
    work = type(tree)(tree.mode, tree.depth, tree.base_level, {k: np.zeros_like(v) for k, v in tree.nodes.items()})
    for node, c in zip(basis, coefficients):
        work.nodes[tuple(node)] = np.asarray(c, dtype=float)
    psi = packet_reconstruct(work, filt, [tuple(b) for b in basis])
    return PureState.normalized(psi, q_extent)


# --------------------------------------------------------------------------
# transforms


def default_p_extent(state: PureState, np_: int, hbar: float = 1.0) -> tuple[float, float]:
    """Symmetric p-range whose y-grid spans the autocorrelation window exactly."""
    p_max = min(np.pi * hbar / state.dq, np.pi * hbar * np_ / state.period)
    return (-p_max, p_max)


def _shifted(psi_hat: np.ndarray, kappa: np.ndarray, shifts: np.ndarray, nyquist: int | None) -> np.ndarray:
    phase = np.exp(1j * kappa[None, :] * shifts[:, None])
    if nyquist is not None:
        # split the Nyquist mode symmetrically: e^{iKs} + e^{-iKs} -> 2 cos(Ks)
        phase[:, nyquist] = np.cos(kappa[nyquist] * shifts)
    return np.fft.ifft(psi_hat[None, :] * phase, axis=1)


def wigner_of_state(state: PureState, np_: int | None = None, p_extent=None, hbar: float = 1.0,
                    mass: float = 1.0, y_window: float | None = None, edge_tol: float = 1e-12) -> PhaseSpaceField:
    """W(q,p) = (1/(pi hbar)) int conj(psi(q+y)) psi(q-y) exp(2ipy/hbar) dy on the grid."""
    n = state.n
    np_ = n if np_ is None else int(np_)
    if not _is_pow2(np_):
        raise ShapeError("np must be a power of two")
    if p_extent is None:
        p_extent = default_p_extent(state, np_, hbar)
    p_lo, p_hi = float(p_extent[0]), float(p_extent[1])
    if not p_hi > p_lo:
        raise ShapeError("empty p extent")
    p_nyq = np.pi * hbar / state.dq
    if max(abs(p_lo), abs(p_hi)) > p_nyq * (1 + 1e-12):
        raise AliasingError(
            f"p extent {p_extent} exceeds the Nyquist momentum pi*hbar/dq = {p_nyq:.6g}"
        )
    edge = np.abs(state.samples[[0, 1, -2, -1]]).max()
    if edge > edge_tol * max(np.abs(state.samples).max(), 1e-300):
        warnings.warn(f"state does not decay at the domain edges (|psi| = {edge:.3g})", stacklevel=2)

    dp = (p_hi - p_lo) / np_
    dy = np.pi * hbar / (np_ * dp)
    if y_window is None:
        y_window = state.period / 4
    ks = np.arange(-np_ // 2, np_ // 2 + 1)
    y = ks * dy

    psi_hat = np.fft.fft(state.samples)
    kappa = 2 * np.pi * np.fft.fftfreq(n, state.dq)
    nyquist = n // 2 if n % 2 == 0 else None
    plus = _shifted(psi_hat, kappa, y, nyquist)      # psi(q_i + y_k)
    minus = plus[::-1]                                 # psi(q_i - y_k)
    corr = np.conj(plus) * minus                       # (k, i)
    corr[np.abs(y) > y_window * (1 + 1e-12)] = 0.0
    corr = corr * np.exp(2j * p_lo * y / hbar)[:, None]
    # fold k = +np/2 onto k = -np/2 with half weights each
    folded = corr[:-1].copy()
    folded[0] = 0.5 * (corr[0] + corr[-1])
    # e^{2 pi i m k / np} summed over k in [-np/2, np/2)
    spectrum = np.fft.ifft(np.fft.ifftshift(folded, axes=0), axis=0) * np_
    w = spectrum.T * (dy / (np.pi * hbar))
    scale = max(1.0, float(np.abs(w.real).max()))
    residue = float(np.abs(w.imag).max())
    assert residue <= 1e-10 * scale, f"Wigner transform left an imaginary residue {residue:.3g}"
    return PhaseSpaceField(w.real.copy(), state.q_extent, (p_lo, p_hi), hbar=hbar, mass=mass)


def wigner_of_packets(atoms, weights, filt: FilterPair, n: int, q_extent, hbar: float = 1.0,
                      np_: int | None = None, p_extent=None, mass: float = 1.0,
                      top_level: int | None = None, **kwargs) -> PhaseSpaceField:
    """Wigner function of a weighted superposition of wavelet-packet atoms."""
    state = packet_state(atoms, weights, filt, n, q_extent, top_level)
    return wigner_of_state(state, np_, p_extent, hbar, mass, **kwargs)


def momentum_density(state: PureState, p, hbar: float = 1.0) -> np.ndarray:
    """|phi(p)|^2 from the direct discrete Fourier sum of psi."""
    p = np.asarray(p, dtype=float)
    kernel = np.exp(-1j * np.outer(p, state.q) / hbar)
    phi = kernel @ state.samples * state.dq / np.sqrt(2 * np.pi * hbar)
    return np.abs(phi) ** 2


def wigner_negativity(field: PhaseSpaceField) -> float:
    """int |W| - int W (zero for nonnegative fields)."""
    w = field.values
    return float(np.sum(np.abs(w) - w) * field.cell_area)


# --------------------------------------------------------------------------
# closed forms


def gaussian_wigner(q, p, sigma: float = 1.0, q0: float = 0.0, p0: float = 0.0, hbar: float = 1.0):
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    return np.exp(-((q - q0) ** 2) / sigma**2 - sigma**2 * (p - p0) ** 2 / hbar**2) / (np.pi * hbar)


def gaussian_field(nq: int, np_: int, q_extent, p_extent, sigma: float = 1.0, q0: float = 0.0,
                   p0: float = 0.0, hbar: float = 1.0, mass: float = 1.0) -> PhaseSpaceField:
    """Closed-form coherent-state Wigner function sampled on a grid."""
    q = q_grid(nq, q_extent)
    p = q_grid(np_, p_extent)
    qq, pp = np.meshgrid(q, p, indexing="ij")
    w = gaussian_wigner(qq, pp, sigma, q0, p0, hbar)
    return PhaseSpaceField(w, q_extent, p_extent, hbar=hbar, mass=mass)


def cat_wigner(q, p, a: float = 2.0, sigma: float = 0.5, hbar: float = 1.0):
    """Closed form for the even cat state normalized on the real line."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    norm = 2 * (1 + np.exp(-(a**2) / sigma**2))
    g = lambda c: np.exp(-((q - c) ** 2) / sigma**2 - sigma**2 * p**2 / hbar**2)
    cross = 2 * np.exp(-(q**2) / sigma**2 - sigma**2 * p**2 / hbar**2) * np.cos(2 * a * p / hbar)
    return (g(a) + g(-a) + cross) / (np.pi * hbar * norm)
