"""Tensor-product Galerkin reduction of the linear Moyal evolution.

Trial and test spaces coincide.  The time axis is a Haar space on
``[0, T]`` (boxes of width ``dt = T/N_t``, or their Haar MRA rotation); the
q- and p-axes carry periodized Daubechies scaling spaces at the grid level,
optionally rotated into an MRA basis.  Scaling coefficients at the grid
level are identified with ``sqrt(h) * samples``, so the spatial Galerkin
matrix of the generator is the method-of-lines operator itself.

In the box basis the upwind time derivative gives, for ``k >= 1``,

    (a_k - a_{k-1}) - dt * R a_k = 0

and the test equations of the first time function are replaced by the
initial condition ``a_0 = sqrt(dt) * w0``.  The box coefficient ``a_k``
then approximates ``sqrt(dt) W(t_k)`` at ``t_k = k*dt``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import BasisError, LevelError, ModeError, NestingError, RankError, ShapeError
from .moyal import DynamicsConfig, Potential, moyal_operator
from .operators import CompressedOperator, compress, scaling_overlaps
from .wavelets import FilterPair, analysis_step, fwt_axis, fwt_matrix, haar, ifwt_axis, synthesis_step
from .wigner import PhaseSpaceField

DENSE_LIMIT = 10_000


@dataclass(frozen=True, eq=False)
class AxisSpec:
    """One factor space: 2**level periodized functions of ``filter`` on ``extent``."""

    filter: FilterPair
    level: int
    mode: str = "scaling"
    extent: tuple[float, float] = (0.0, 1.0)
    base_level: int = 0

    def __post_init__(self):
        if self.level < 0:
            raise LevelError("axis level must be nonnegative")
        if self.mode not in ("scaling", "mra"):
            raise ModeError(f"unknown axis mode {self.mode!r}")
        if self.mode == "mra" and not 0 <= self.base_level <= self.level:
            raise LevelError(f"base level {self.base_level} outside [0, {self.level}]")
        if not self.extent[1] > self.extent[0]:
            raise ShapeError("empty axis extent")

    @property
    def count(self) -> int:
        return 2**self.level

    @property
    def spacing(self) -> float:
        return (self.extent[1] - self.extent[0]) / self.count

    def rotation(self) -> np.ndarray:
        """Orthogonal map scaling coefficients -> basis coefficients."""
        if self.mode == "scaling":
            return np.eye(self.count)
        return fwt_matrix(self.count, self.filter, self.level - self.base_level)

    def gram(self, quad_level: int = 12) -> np.ndarray:
        """Gram matrix of the continuous basis functions by cascade quadrature."""
        n = self.count
        g = np.zeros((n, n))
        rows = np.arange(n)
        for l, v in scaling_overlaps(self.filter, quad_level).items():
            g[rows, (rows - l) % n] += v
        r = self.rotation()
        return r @ g @ r.T

    def synthesis(self) -> np.ndarray:
        """Grid values (rows) of each basis function (columns) at the sample points."""
        return self.rotation().T / np.sqrt(self.spacing)


@dataclass(frozen=True, eq=False)
class TensorBasis:
    factors: tuple[AxisSpec, ...]

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(a.count for a in self.factors)

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    @property
    def time(self) -> AxisSpec:
        return self.factors[0]

    @property
    def space(self) -> tuple[AxisSpec, ...]:
        return self.factors[1:]


def build_tensor_basis(specs, tol: float = 1e-8, quad_level: int = 12) -> TensorBasis:
    """Validate per-axis orthonormality and form the tensor basis.

    ``specs`` are :class:`AxisSpec` instances or ``(filter, level, mode)`` /
    ``(filter, level, mode, extent)`` tuples.
    """
    axes = []
    for s in specs:
        axes.append(s if isinstance(s, AxisSpec) else AxisSpec(*s))
    if not axes:
        raise BasisError("a tensor basis needs at least one axis")
    for i, a in enumerate(axes):
        dev = float(np.abs(a.gram(quad_level) - np.eye(a.count)).max())
        if dev > tol:
            raise BasisError(f"axis {i} ({a.filter.name}, level {a.level}) is not orthonormal: "
                             f"max |G - I| = {dev:.3e}")
    return TensorBasis(tuple(axes))


@dataclass(eq=False)
class GalerkinSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    basis: TensorBasis
    ic_rows: np.ndarray
    template: PhaseSpaceField | None = None
    coefficients: np.ndarray | None = None
    residuals: np.ndarray | None = None
    method: str | None = None
    step_operator: sp.csr_matrix | None = None

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def _spatial_rotation(basis: TensorBasis) -> np.ndarray | None:
    rots = [a.rotation() for a in basis.space]
    if all(a.mode == "scaling" for a in basis.space):
        return None
    out = rots[0]
    for r in rots[1:]:
        out = np.kron(out, r)
    return out


def gdr_assemble(operator, basis: TensorBasis, initial, template: PhaseSpaceField | None = None) -> GalerkinSystem:
    """Square system for the tensor coefficients of dW/dt = R W.

    ``operator`` acts on row-major grid vectors of the spatial axes;
    ``initial`` is a :class:`PhaseSpaceField` or grid-value array at t = 0.
    """
    t_axis = basis.time
    if t_axis.filter.length != 2:
        raise BasisError("the time axis must use the Haar filter")
    if isinstance(initial, PhaseSpaceField):
        template = template or initial
        w0 = initial.values
    else:
        w0 = np.asarray(initial, dtype=float)
    space_counts = tuple(a.count for a in basis.space)
    if w0.shape != space_counts:
        raise ShapeError(f"initial data shape {w0.shape} does not match spatial counts {space_counts}")
    n_space = int(np.prod(space_counts))
    r = sp.csr_matrix(operator)
    if r.shape != (n_space, n_space):
        raise ShapeError(f"operator shape {r.shape} does not match {n_space} spatial unknowns")

    # spatial coefficients: c = sqrt(h_q h_p) * samples, rotated per axis
    scale = float(np.sqrt(np.prod([a.spacing for a in basis.space])))
    rot = _spatial_rotation(basis)
    c0 = scale * w0.ravel()
    if rot is not None:
        r = sp.csr_matrix(rot @ r.toarray() @ rot.T)
        c0 = rot @ c0

    nt = t_axis.count
    dt = t_axis.spacing
    shift = sp.diags([np.ones(nt - 1)], [-1], shape=(nt, nt))
    active = sp.diags(np.r_[0.0, np.ones(nt - 1)])
    eye_s = sp.identity(n_space, format="csr")
    k = sp.kron(sp.identity(nt) - shift, eye_s) - dt * sp.kron(active, r)
    b = np.zeros(nt * n_space)
    b[:n_space] = np.sqrt(dt) * c0
    if t_axis.mode == "mra":
        big = sp.kron(sp.csr_matrix(t_axis.rotation()), eye_s)
        k = big @ k @ big.T
        b = big @ b
    k = sp.csr_matrix(k)
    k.eliminate_zeros()
    return GalerkinSystem(k, b, basis, np.arange(n_space), template,
                          step_operator=sp.csr_matrix(eye_s - dt * r))


def _deficient_indices(mat: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    _, rr, piv = sla.qr(mat, pivoting=True, mode="economic")
    d = np.abs(np.diag(rr))
    small = d <= rtol * max(d[0], 1e-300)
    return np.sort(piv[small])


def _time_sweep_preconditioner(system: GalerkinSystem) -> spla.LinearOperator:
    """Block forward substitution over the time boxes with a factorized step operator.

    It inverts the uncompressed box-form system exactly, so GMRES only has to
    absorb the compression and rounding error.
    """
    t_axis = system.basis.time
    nt = t_axis.count
    step = spla.splu(system.step_operator.tocsc())
    rot = t_axis.rotation() if t_axis.mode == "mra" else None

    def apply(v):
        blocks = np.asarray(v, dtype=float).reshape(nt, -1)
        if rot is not None:
            blocks = rot.T @ blocks
        out = np.empty_like(blocks)
        out[0] = blocks[0]
        for k in range(1, nt):
            out[k] = step.solve(blocks[k] + out[k - 1])
        if rot is not None:
            out = rot @ out
        return out.ravel()

    return spla.LinearOperator(system.matrix.shape, apply)


def gdr_solve(system: GalerkinSystem, tol: float = 1e-10, dense_limit: int = DENSE_LIMIT) -> np.ndarray:
    """Solve for the coefficient tensor of shape ``basis.counts``.

    Systems up to ``dense_limit`` unknowns use a dense LU factorization;
    larger ones use GMRES on the (threshold-zero) compressed operator,
    preconditioned by a block sweep over the time boxes.
    """
    n = system.size
    if n <= dense_limit:
        a = system.matrix.toarray()
        lu, piv = sla.lu_factor(a, check_finite=True)
        pivots = np.abs(np.diag(lu))
        if pivots.min() <= 1e-13 * pivots.max():
            raise RankError("singular Galerkin system", _deficient_indices(a))
        x = sla.lu_solve((lu, piv), system.rhs)
        system.method = "dense"
    else:
        op: CompressedOperator = compress(system.matrix, 0.0)
        x, info = spla.gmres(op.entries, system.rhs, M=_time_sweep_preconditioner(system),
                             rtol=1e-14, atol=0.1 * tol, restart=50, maxiter=50)
        if info != 0:
            raise RankError(f"iterative solver did not converge (info={info})")
        system.method = "gmres"
    res = system.matrix @ x - system.rhs
    if not np.all(np.isfinite(x)) or np.abs(res).max() > tol:
        raise RankError(f"residual {np.abs(res).max():.3e} exceeds tolerance {tol:g}")
    system.coefficients = x.reshape(system.basis.counts)
    system.residuals = res
    return system.coefficients


def residual_projections(system: GalerkinSystem) -> np.ndarray:
    """Recompute the projected residuals for the stored coefficients."""
    if system.coefficients is None:
        raise ValueError("system has not been solved")
    return system.matrix @ system.coefficients.ravel() - system.rhs


def gdr_reconstruct(system: GalerkinSystem) -> tuple[np.ndarray, list[PhaseSpaceField]]:
    """Times t_k = k*dt and the reconstructed grid fields W(t_k)."""
    if system.coefficients is None:
        raise ValueError("system has not been solved")
    basis = system.basis
    a = system.coefficients.reshape(basis.time.count, -1)
    if basis.time.mode == "mra":
        a = basis.time.rotation().T @ a
    rot = _spatial_rotation(basis)
    if rot is not None:
        a = a @ rot
    scale = float(np.sqrt(np.prod([ax.spacing for ax in basis.space])))
    dt = basis.time.spacing
    shape = tuple(ax.count for ax in basis.space)
    values = a / (np.sqrt(dt) * scale)
    times = basis.time.extent[0] + dt * np.arange(basis.time.count)
    if system.template is None:
        return times, [v.reshape(shape) for v in values]
    return times, [system.template.with_values(v.reshape(shape)) for v in values]


@dataclass(frozen=True, eq=False)
class GDRResult:
    times: np.ndarray
    fields: list
    system: GalerkinSystem = field(repr=False)


def gdr_evolve(initial: PhaseSpaceField, potential: Potential, config: DynamicsConfig, n_time: int,
               t_final: float | None = None, space_filter: FilterPair | None = None,
               mode: str = "scaling", tol: float = 1e-10) -> GDRResult:
    """Assemble and solve the GDR system for the Moyal generator on the field's grid."""
    t_final = config.t_final if t_final is None else t_final
    if n_time < 1 or n_time & (n_time - 1):
        raise LevelError("n_time must be a power of two")
    space_filter = space_filter or haar()
    nq, np_ = initial.values.shape
    basis = build_tensor_basis([
        AxisSpec(haar(), int(np.log2(n_time)), "scaling", (0.0, t_final)),
        AxisSpec(space_filter, int(np.log2(nq)), mode, initial.q_extent),
        AxisSpec(space_filter, int(np.log2(np_)), mode, initial.p_extent),
    ])
    system = gdr_assemble(moyal_operator(initial, potential, config), basis, initial)
    gdr_solve(system, tol=tol)
    times, fields = gdr_reconstruct(system)
    return GDRResult(times, fields, system)


# --------------------------------------------------------------------------
# multiscale splitting


@dataclass(frozen=True, eq=False)
class MultiscaleParts:
    slow: np.ndarray
    fast: dict
    split_levels: tuple[int, ...]
    axes: tuple[int, ...]

    def total(self) -> np.ndarray:
        out = self.slow.copy()
        for l in sorted(self.fast):
            out = out + self.fast[l]
        return out

    def energies(self) -> dict:
        e = {"slow": float(np.sum(self.slow**2))}
        e.update({l: float(np.sum(v**2)) for l, v in self.fast.items()})
        return e


def _axis_level(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise LevelError(f"axis length {n} is not a power of two")
    return int(np.log2(n))


def multiscale_decompose(values, filt: FilterPair, split_levels, axes=None) -> MultiscaleParts:
    """Slow part in V_N (per axis) plus fast parts grouped by detail level l >= N.

    Levels are domain-relative: an axis of length 2**J carries the ladder
    V_0 ⊂ ... ⊂ V_J.  A tensor block belongs to fast level l when l is the
    largest detail level among its axis factors.
    """
    x = values.values if isinstance(values, PhaseSpaceField) else np.asarray(values, dtype=float)
    axes = tuple(range(x.ndim)) if axes is None else tuple(a % x.ndim for a in axes)
    if np.isscalar(split_levels) or np.ndim(split_levels) == 0:
        split = tuple(int(split_levels) for _ in axes)
    else:
        split = tuple(int(s) for s in split_levels)
    if len(split) != len(axes):
        raise LevelError("one split level per decomposed axis is required")
    coeffs = x
    labels = []
    for ax, n_split in zip(axes, split):
        j = _axis_level(x.shape[ax])
        if not 0 <= n_split <= j:
            raise LevelError(f"split level {n_split} outside the ladder [0, {j}] on axis {ax}")
        coeffs = fwt_axis(coeffs, filt, j - n_split, axis=ax)
        lab = np.full(x.shape[ax], -1)
        for l in range(n_split, j):
            lab[2**l: 2**(l + 1)] = l
        shape = [1] * x.ndim
        shape[ax] = x.shape[ax]
        labels.append(lab.reshape(shape))
    top = labels[0]
    for lab in labels[1:]:
        top = np.maximum(top, lab)
    top = np.broadcast_to(top, x.shape)

    def back(mask):
        c = np.where(mask, coeffs, 0.0)
        for ax, n_split in zip(axes, split):
            c = ifwt_axis(c, filt, _axis_level(x.shape[ax]) - n_split, axis=ax)
        return c

    slow = back(top == -1)
    fast = {int(l): back(top == l) for l in np.unique(top) if l >= 0}
    return MultiscaleParts(slow, fast, split, axes)


def _prolong(values: np.ndarray, filt: FilterPair, steps: tuple[int, ...]) -> np.ndarray:
    v = values
    for ax, k in enumerate(steps):
        for _ in range(k):
            moved = np.moveaxis(v, ax, -1)
            moved = np.sqrt(2.0) * synthesis_step(moved, np.zeros_like(moved), filt)
            v = np.moveaxis(moved, -1, ax)
    return v


def restrict(fine: PhaseSpaceField, levels: int = 1, filt: FilterPair | None = None) -> PhaseSpaceField:
    """Orthogonal projection onto the coarser grid (approximation part, value-scaled)."""
    filt = filt or haar()
    v = fine.values
    for ax in range(2):
        for _ in range(levels):
            moved = np.moveaxis(v, ax, -1)
            approx, _ = analysis_step(moved, filt)
            v = np.moveaxis(approx / np.sqrt(2.0), -1, ax)
    return PhaseSpaceField(v, fine.q_extent, fine.p_extent, fine.hbar, fine.mass)


def cutoff_error(coarse: PhaseSpaceField, fine: PhaseSpaceField, filt: FilterPair | None = None) -> float:
    """L2 norm of ``fine - prolong(coarse)`` on the fine grid.

    Prolongation inserts zero detail coefficients with ``filt`` (Haar by
    default, i.e. piecewise-constant refinement).
    """
    filt = filt or haar()
    if coarse.q_extent != fine.q_extent or coarse.p_extent != fine.p_extent:
        raise NestingError("coarse and fine grids cover different extents")
    steps = []
    for nc, nf in zip(coarse.values.shape, fine.values.shape):
        if nf < nc or nf % nc or (nf // nc) & (nf // nc - 1):
            raise NestingError(f"grid of {nc} points does not nest in {nf}")
        steps.append(int(np.log2(nf // nc)))
    up = _prolong(coarse.values, filt, tuple(steps))
    return float(np.sqrt(np.sum((fine.values - up) ** 2) * fine.cell_area))

