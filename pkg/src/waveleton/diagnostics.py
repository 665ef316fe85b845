"""Hierarchy norms, scale-level approximations and pattern classification."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import LevelError, ShapeError, UndefinedEntropyError
from .wavelets import FilterPair, daubechies_filter, fwt_axis, ifwt_axis, shannon_entropy
from .wigner import PhaseSpaceField, wigner_negativity

LABELS = ("waveleton", "chaotic-like", "interference", "unclassified")


@dataclass(frozen=True, eq=False)
class MultiParticleField:
    """s-particle component on a regular grid in (q_1, p_1, ..., q_s, p_s); stored, never evolved."""

    values: np.ndarray
    spacings: tuple[float, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != len(self.spacings):
            raise ShapeError("one grid spacing per axis is required")
        object.__setattr__(self, "values", v)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.values**2) * np.prod(self.spacings)))


@dataclass(frozen=True, eq=False)
class WignerHierarchy:
    scalar_part: float = 0.0
    components: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not np.isfinite(self.scalar_part):
            raise ValueError("scalar part must be finite")


def fock_norm(h: WignerHierarchy) -> float:
    """sqrt(W_0**2 + sum_s ||W_s||**2) with grid quadrature for every component."""
    total = float(h.scalar_part) ** 2
    for c in h.components:
        total += c.l2_norm() ** 2
    return float(np.sqrt(total))


def _level_of(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise LevelError(f"axis length {n} is not a power of two")
    return int(np.log2(n))


def scale_approximation(field: PhaseSpaceField, level: int, filt: FilterPair) -> PhaseSpaceField:
    """Orthogonal projection onto V_level (x) V_level; axes of length 2**J sit at level J."""
    v = field.values
    levels = [_level_of(n) for n in v.shape]
    top = min(levels)
    if not 0 <= level <= top:
        raise LevelError(f"level {level} outside [0, {top}]")
    for ax, j in enumerate(levels):
        depth = j - level
        if depth == 0:
            continue
        c = fwt_axis(v, filt, depth, axis=ax)
        keep = np.zeros(v.shape[ax], dtype=bool)
        keep[: 2**level] = True
        shape = [1] * v.ndim
        shape[ax] = -1
        c = np.where(keep.reshape(shape), c, 0.0)
        v = ifwt_axis(c, filt, depth, axis=ax)
    return field.with_values(v)


@dataclass(frozen=True)
class ClassifyConfig:
    """Thresholds for the pattern labels (conventions, tunable)."""

    entropy_max: float = 1.5
    participation_max: float = 8.0
    chaos_margin: float = 1.0
    negativity_min: float = 0.05
    filter_order: int = 3
    analysis_levels: int = 4
    energy_fraction: float = 0.99


@dataclass(frozen=True)
class PatternReport:
    entropy: float
    participation_ratio: float
    negativity: float
    dominant_mode_count: int
    n_coefficients: int
    label: str
    time: float | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def _depth(n: int, levels: int) -> int:
    return min(levels, _level_of(n))


def analysis_coefficients(field: PhaseSpaceField, filt: FilterPair, levels: int) -> np.ndarray:
    """Separable MRA coefficients of W, ``levels`` steps along each axis."""
    c = field.values
    for ax in range(2):
        c = fwt_axis(c, filt, _depth(c.shape[ax], levels), axis=ax)
    return c


def field_from_coefficients(coefficients, template: PhaseSpaceField, filt: FilterPair,
                            levels: int) -> PhaseSpaceField:
    c = np.asarray(coefficients, dtype=float)
    if c.shape != template.values.shape:
        raise ShapeError("coefficient array does not match the template grid")
    for ax in range(2):
        c = ifwt_axis(c, filt, _depth(c.shape[ax], levels), axis=ax)
    return template.with_values(c)


def participation_ratio(coefficients) -> float:
    c2 = np.ravel(np.asarray(coefficients, dtype=float)) ** 2
    s = c2.sum()
    if s == 0:
        raise UndefinedEntropyError("participation ratio of an all-zero coefficient set is undefined")
    return float(s * s / np.sum(c2 * c2))


def dominant_mode_count(coefficients, fraction: float = 0.99) -> int:
    """Fewest coefficients whose squared sum reaches ``fraction`` of the energy."""
    c2 = np.sort(np.ravel(np.asarray(coefficients, dtype=float)) ** 2)[::-1]
    cum = np.cumsum(c2)
    return int(np.searchsorted(cum, fraction * cum[-1] * (1 - 1e-14)) + 1)


def renormalized(field: PhaseSpaceField) -> PhaseSpaceField:
    """W / int W when that integral is positive, else W / int |W|."""
    total = field.total()
    if total > 0:
        return field.with_values(field.values / total)
    absint = float(np.sum(np.abs(field.values)) * field.cell_area)
    if absint == 0:
        raise UndefinedEntropyError("cannot normalize a zero field")
    return field.with_values(field.values / absint)


def label_for(entropy: float, participation: float, negativity: float, n_coefficients: int,
              config: ClassifyConfig) -> str:
    if entropy <= config.entropy_max and participation <= config.participation_max:
        return "waveleton"
    if entropy >= np.log(n_coefficients) - config.chaos_margin:
        return "chaotic-like"
    if negativity >= config.negativity_min:
        return "interference"
    return "unclassified"


def classify(field: PhaseSpaceField, filt: FilterPair | None = None,
             config: ClassifyConfig | None = None, time: float | None = None) -> PatternReport:
    config = config or ClassifyConfig()
    filt = filt or daubechies_filter(config.filter_order)
    if not np.any(field.values):
        raise UndefinedEntropyError("classification of a zero field is undefined")
    c = analysis_coefficients(field, filt, config.analysis_levels)
    h = shannon_entropy(c)
    pr = participation_ratio(c)
    neg = wigner_negativity(renormalized(field))
    label = label_for(h, pr, neg, c.size, config)
    return PatternReport(h, pr, neg, dominant_mode_count(c, config.energy_fraction), int(c.size), label, time)
