"""Truncated Moyal evolution of Wigner functions by the method of lines.

The right-hand side is

    dW/dt = -(p/m) dW/dq
            + sum_{l=0}^{min(L, (D-1)//2)} (-1)^l (hbar/2)^(2l) / (2l+1)!  U^(2l+1)(q) d^(2l+1)W/dp^(2l+1)

for a polynomial potential U of degree D.  q- and p-derivatives are taken
either spectrally (FFT) or with circulant connection-coefficient matrices of a
Daubechies filter acting on the sample values.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache
from math import factorial

import numpy as np
import scipy.sparse as sp

from .errors import CFLError, DivergenceError, ModeError, ShapeError
from .operators import circulant_from_table, connection_coefficients
from .wavelets import daubechies_filter
from .wigner import PhaseSpaceField


@dataclass(frozen=True)
class Potential:
    """Polynomial U(q) = sum_k coefficients[k] q**k."""

    coefficients: tuple[float, ...] = ()

    def __post_init__(self):
        c = [float(v) for v in self.coefficients]
        if not all(np.isfinite(c)):
            raise ValueError("potential coefficients must be finite")
        while c and c[-1] == 0.0:
            c.pop()
        object.__setattr__(self, "coefficients", tuple(c))

    @classmethod
    def harmonic(cls, omega: float = 1.0, mass: float = 1.0) -> "Potential":
        return cls((0.0, 0.0, 0.5 * mass * omega**2))

    @classmethod
    def quartic(cls, lam: float) -> "Potential":
        return cls((0.0, 0.0, 0.0, 0.0, lam))

    @property
    def degree(self) -> int:
        """Degree D; -1 for the zero polynomial."""
        return len(self.coefficients) - 1

    def derivative(self, order: int = 1) -> "Potential":
        c = list(self.coefficients)
        for _ in range(order):
            c = [k * c[k] for k in range(1, len(c))]
        return Potential(tuple(c))

    def __call__(self, q):
        q = np.asarray(q, dtype=float)
        out = np.zeros_like(q)
        for c in reversed(self.coefficients):
            out = out * q + c
        return out


@dataclass(frozen=True)
class DynamicsConfig:
    mass: float = 1.0
    hbar: float = 1.0
    truncation: int = 1
    dt: float = 1e-3
    t_final: float = 1.0
    scheme: str = "rk4"
    stride: int = 1
    backend: str = "spectral"
    wavelet_order: int = 8
    cfl: float = 0.5

    def __post_init__(self):
        if self.mass <= 0 or self.hbar <= 0:
            raise ValueError("mass and hbar must be positive")
        if self.dt <= 0 or self.t_final <= 0:
            raise ValueError("dt and t_final must be positive")
        if self.truncation < 0:
            raise ValueError("truncation order must be >= 0")
        if self.scheme != "rk4":
            raise ModeError(f"unknown time-stepping scheme {self.scheme!r}")
        if self.backend not in ("spectral", "wavelet"):
            raise ModeError(f"unknown derivative backend {self.backend!r}")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")


def moyal_coefficient(l: int, hbar: float) -> float:
    return (-1) ** l * (hbar / 2) ** (2 * l) / factorial(2 * l + 1)


def active_orders(potential: Potential, truncation: int) -> list[int]:
    """Moyal orders l that contribute: l <= L and 2l+1 <= D."""
    top = min(truncation, (potential.degree - 1) // 2) if potential.degree >= 1 else -1
    return list(range(top + 1))


# --------------------------------------------------------------------------
# derivatives


def spectral_derivative(values: np.ndarray, order: int, spacing: float, axis: int) -> np.ndarray:
    n = values.shape[axis]
    k = 2 * np.pi * np.fft.rfftfreq(n, d=spacing)
    mult = (1j * k) ** order
    if order % 2 and n % 2 == 0:
        mult[-1] = 0.0
    shape = [1] * values.ndim
    shape[axis] = len(k)
    spectrum = np.fft.rfft(values, axis=axis) * mult.reshape(shape)
    return np.fft.irfft(spectrum, n=n, axis=axis)


@lru_cache(maxsize=32)
def _wavelet_d1(n: int, spacing: float, wavelet_order: int) -> np.ndarray:
    table = connection_coefficients(daubechies_filter(wavelet_order), 1)
    mat = circulant_from_table(table, n, spacing)
    mat.setflags(write=False)
    return mat


def derivative_matrix(n: int, spacing: float, order: int, backend: str = "spectral",
                      wavelet_order: int = 8) -> np.ndarray:
    """Dense periodic differentiation matrix of the given order."""
    if backend == "spectral":
        return spectral_derivative(np.eye(n), order, spacing, axis=0)
    if backend == "wavelet":
        return np.linalg.matrix_power(_wavelet_d1(n, float(spacing), wavelet_order), order)
    raise ModeError(f"unknown derivative backend {backend!r}")


def differentiate(values: np.ndarray, order: int, spacing: float, axis: int,
                  backend: str = "spectral", wavelet_order: int = 8) -> np.ndarray:
    if order == 0:
        return values.copy()
    if backend == "spectral":
        return spectral_derivative(values, order, spacing, axis)
    if backend == "wavelet":
        d1 = _wavelet_d1(values.shape[axis], float(spacing), wavelet_order)
        out = np.moveaxis(values, axis, 0)
        for _ in range(order):
            out = np.tensordot(d1, out, axes=(1, 0))
        return np.moveaxis(out, 0, axis)
    raise ModeError(f"unknown derivative backend {backend!r}")


# --------------------------------------------------------------------------
# right-hand side


def moyal_terms(field: PhaseSpaceField, potential: Potential, config: DynamicsConfig) -> dict:
    """Individual contributions to dW/dt: key 'kinetic' and integer keys l."""
    w = field.values
    q, p = field.q, field.p
    opts = dict(backend=config.backend, wavelet_order=config.wavelet_order)
    terms = {"kinetic": -(p[None, :] / config.mass) * differentiate(w, 1, field.dq, 0, **opts)}
    for l in active_orders(potential, config.truncation):
        order = 2 * l + 1
        du = potential.derivative(order)(q)
        terms[l] = moyal_coefficient(l, config.hbar) * du[:, None] * differentiate(w, order, field.dp, 1, **opts)
    return terms


def _rhs_values(field: PhaseSpaceField, potential: Potential, config: DynamicsConfig) -> np.ndarray:
    terms = moyal_terms(field, potential, config)
    out = terms.pop("kinetic")
    for l in sorted(terms):
        out = out + terms[l]
    return out


def moyal_rhs(field: PhaseSpaceField, potential: Potential, config: DynamicsConfig) -> PhaseSpaceField:
    return field.with_values(_rhs_values(field, potential, config))


def moyal_operator(field: PhaseSpaceField, potential: Potential, config: DynamicsConfig) -> sp.csr_matrix:
    """Sparse matrix R with vec(dW/dt) = R vec(W), row-major (q outer) ordering."""
    nq, np_ = field.values.shape
    opts = dict(backend=config.backend, wavelet_order=config.wavelet_order)
    dq = sp.csr_matrix(derivative_matrix(nq, field.dq, 1, **opts))
    op = -sp.kron(dq, sp.diags(field.p / config.mass))
    for l in active_orders(potential, config.truncation):
        order = 2 * l + 1
        du = potential.derivative(order)(field.q)
        dp = sp.csr_matrix(derivative_matrix(np_, field.dp, order, **opts))
        op = op + moyal_coefficient(l, config.hbar) * sp.kron(sp.diags(du), dp)
    out = sp.csr_matrix(op)
    out.eliminate_zeros()
    return out


# --------------------------------------------------------------------------
# time stepping


def cfl_limit(field: PhaseSpaceField, potential: Potential, config: DynamicsConfig) -> float:
    """c * min(dq*m/p_max, dp/max|U'|); terms with a vanishing speed are dropped."""
    p_max = float(np.max(np.abs(field.p)))
    slope = float(np.max(np.abs(potential.derivative(1)(field.q)))) if potential.degree >= 1 else 0.0
    bounds = []
    if p_max > 0:
        bounds.append(field.dq * config.mass / p_max)
    if slope > 0:
        bounds.append(field.dp / slope)
    return config.cfl * min(bounds) if bounds else np.inf


def check_cfl(field: PhaseSpaceField, potential: Potential, config: DynamicsConfig) -> None:
    limit = cfl_limit(field, potential, config)
    if config.dt > limit:
        raise CFLError(f"dt={config.dt:g} exceeds the stability bound {limit:.6g}", field="dynamics.dt")


def check_edge_decay(field: PhaseSpaceField, tol: float = 1e-8) -> bool:
    """Warn if the field does not decay towards the boundary of the periodic cell."""
    v = np.abs(field.values)
    scale = v.max()
    if scale == 0:
        return True
    edge = max(v[0].max(), v[-1].max(), v[:, 0].max(), v[:, -1].max())
    if edge > tol * scale:
        warnings.warn(f"field reaches the domain edge (relative magnitude {edge / scale:.2e})",
                      UserWarning, stacklevel=2)
        return False
    return True


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    fields: list = field(default_factory=list)

    def __len__(self):
        return len(self.fields)

    def __getitem__(self, i) -> PhaseSpaceField:
        return self.fields[i]

    @property
    def final(self) -> PhaseSpaceField:
        return self.fields[-1]


def _rk4_step(w, dt, rhs):
    k1 = rhs(w)
    k2 = rhs(w + 0.5 * dt * k1)
    k3 = rhs(w + 0.5 * dt * k2)
    k4 = rhs(w + dt * k3)
    return w + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def step_schedule(config: DynamicsConfig) -> np.ndarray:
    """Step sizes reaching t_final exactly; the last step is shortened if needed."""
    n_full = int(np.floor(config.t_final / config.dt + 1e-9))
    steps = [config.dt] * n_full
    rest = config.t_final - n_full * config.dt
    if rest > 1e-12 * config.dt:
        steps.append(rest)
    return np.asarray(steps)


def evolve(initial: PhaseSpaceField, potential: Potential, config: DynamicsConfig,
           edge_tol: float | None = 1e-8) -> Trajectory:
    """Fixed-step RK4 trajectory with snapshots every ``config.stride`` steps and at t_final."""
    check_cfl(initial, potential, config)
    if edge_tol is not None:
        check_edge_decay(initial, edge_tol)
    base = replace(initial)

    def rhs(w):
        return _rhs_values(base.with_values(w), potential, config)

    w = initial.values.copy()
    times, fields = [0.0], [initial]
    t = 0.0
    steps = step_schedule(config)
    for i, h in enumerate(steps, start=1):
        w = _rk4_step(w, h, rhs)
        t += h
        if not np.all(np.isfinite(w)):
            raise DivergenceError(i)
        if i % config.stride == 0 or i == len(steps):
            times.append(t if i < len(steps) else config.t_final)
            fields.append(initial.with_values(w.copy()))
    return Trajectory(np.asarray(times), fields)
